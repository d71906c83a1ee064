// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bundle.hpp"
#include "cfg.hpp"
#include "common.hpp"
#include "corpus.hpp"
#include "disasm.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "features.hpp"
#include "fragments.hpp"
#include "gbdt.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "opcodes.hpp"
#include "scan.hpp"
#include "synth.hpp"
#include "tfidf.hpp"
#include "vocabulary.hpp"
