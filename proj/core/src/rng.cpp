// Copyright 2026 The QattenLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qattenlab/rng.hpp"

#include <sstream>

#include "qattenlab/error.hpp"

namespace qattenlab {

int Rng::uniform_int(int n) {
  if (n <= 0) throw ContractError("uniform_int: n must be positive");
  const uint64_t bound = static_cast<uint64_t>(n);
  // Lemire's multiply-shift with rejection of the biased low range.
  uint64_t x = gen_();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  uint64_t lo = static_cast<uint64_t>(m);
  if (lo < bound) {
    const uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) {
      x = gen_();
      m = static_cast<__uint128_t>(x) * bound;
      lo = static_cast<uint64_t>(m);
    }
  }
  return static_cast<int>(m >> 64);
}

std::string Rng::save_state() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream is(state);
  is >> gen_;
  if (is.fail()) throw IoError("Rng::load_state: malformed engine state");
}

uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index) {
  // splitmix64 finalizer over a chained combination of the labels.
  uint64_t z = base;
  for (uint64_t v : {stream, index}) {
    z += 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
  }
  return z;
}

}  // namespace qattenlab
