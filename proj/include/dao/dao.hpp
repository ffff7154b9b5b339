// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dao/bytes.hpp"
#include "dao/circuit.hpp"
#include "dao/commitment.hpp"
#include "dao/error.hpp"
#include "dao/game.hpp"
#include "dao/game_io.hpp"
#include "dao/gas.hpp"
#include "dao/kv_config.hpp"
#include "dao/ledger.hpp"
#include "dao/merkle.hpp"
#include "dao/orchestrator.hpp"
#include "dao/proof.hpp"
#include "dao/public_inputs.hpp"
#include "dao/rng.hpp"
#include "dao/sha256.hpp"
#include "dao/trading.hpp"
