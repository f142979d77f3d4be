#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

// Umbrella header.

#include "canonical.hpp"
#include "diversity.hpp"
#include "embed.hpp"
#include "grpo.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "normalize.hpp"
#include "policy.hpp"
#include "remote_embedder.hpp"
#include "rewards.hpp"
#include "schema.hpp"
#include "task.hpp"
#include "trainer.hpp"
