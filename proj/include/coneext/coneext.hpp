// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "chains.hpp"
#include "extension.hpp"
#include "laurent.hpp"
#include "mellin.hpp"
#include "model_io.hpp"
#include "pairing.hpp"
#include "pencil.hpp"
#include "smith.hpp"
#include "suite.hpp"
#include "types.hpp"
#include "zoo.hpp"
