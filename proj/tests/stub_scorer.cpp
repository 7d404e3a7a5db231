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
//
// Conformance stub for the external scorer protocol. The first argument
// picks a behaviour:
//
//   ok            well-behaved; logprob = -(prefix length) - len(candidate)/10
//   nan           answers the 3rd request with a NaN literal
//   badid         answers the 2nd request with the wrong id
//   badjson       answers the 2nd request with garbage
//   exit-early    exits after the 2nd request without answering
//   nohandshake   exits before the handshake
//   exit-nonzero  behaves like ok, exits 3 at end of input
//   slow-start    waits 200 ms before the handshake (timeout tests)

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include "json.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "ok";
  if (mode == "nohandshake") return 0;
  if (mode == "slow-start") {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  std::cout << R"({"name": "stub-)" << mode << R"(", "perplexity": 42.5})"
            << std::endl;

  std::string line;
  int n = 0;
  while (std::getline(std::cin, line)) {
    ++n;
    auto req = nlohmann::json::parse(line);
    const auto id = req.at("id").get<long long>();
    const auto& prefix = req.at("prefix");
    const auto& cands = req.at("candidates");
    const double base = -static_cast<double>(prefix.size());
    const double a = base - cands[0].get<std::string>().size() / 10.0;
    const double b = base - cands[1].get<std::string>().size() / 10.0;
    if (mode == "nan" && n == 3) {
      std::cout << R"({"id": )" << id << R"(, "logprobs": [NaN, -1.0]})"
                << std::endl;
      continue;
    }
    if (mode == "badid" && n == 2) {
      std::cout << R"({"id": )" << id + 100 << R"(, "logprobs": [-1.0, -2.0]})"
                << std::endl;
      continue;
    }
    if (mode == "badjson" && n == 2) {
      std::cout << "this is not json" << std::endl;
      continue;
    }
    if (mode == "exit-early" && n == 2) return 0;
    nlohmann::json resp;
    resp["id"] = id;
    resp["logprobs"] = {a, b};
    std::cout << resp.dump() << std::endl;
  }
  return mode == "exit-nonzero" ? 3 : 0;
}
