// Copyright 2026 The agreebench Authors.
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

#ifndef AGREEBENCH_AGREEBENCH_HPP_
#define AGREEBENCH_AGREEBENCH_HPP_

#include "agreebench/conllu.hpp"
#include "agreebench/external_scorer.hpp"
#include "agreebench/harness.hpp"
#include "agreebench/lexicon.hpp"
#include "agreebench/miner.hpp"
#include "agreebench/ngram.hpp"
#include "agreebench/nonce.hpp"
#include "agreebench/pipeline.hpp"
#include "agreebench/random.hpp"
#include "agreebench/report.hpp"
#include "agreebench/stats.hpp"
#include "agreebench/test_item.hpp"
#include "agreebench/version.hpp"
#include "agreebench/vocabulary.hpp"

#endif  // AGREEBENCH_AGREEBENCH_HPP_
