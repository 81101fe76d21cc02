// Copyright 2026 The LDEB Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ldeb/corpus.hpp"
#include "ldeb/dataset.hpp"
#include "ldeb/emosum.hpp"
#include "ldeb/error.hpp"
#include "ldeb/evaluate.hpp"
#include "ldeb/featurize.hpp"
#include "ldeb/forest.hpp"
#include "ldeb/hiersplit.hpp"
#include "ldeb/mlp.hpp"
#include "ldeb/parallel.hpp"
#include "ldeb/pipeline.hpp"
#include "ldeb/rng.hpp"
