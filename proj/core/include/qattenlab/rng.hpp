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

#ifndef QATTENLAB_RNG_HPP_
#define QATTENLAB_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>

namespace qattenlab {

// Deterministic random source. The draw algorithms are implemented here
// (rather than with std::uniform_*_distribution) so that a given seed yields
// the same stream on every standard library implementation, which the
// byte-identical-output guarantees depend on.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer in [0, n); n must be positive. Unbiased (rejection on the
  // widening-multiply remainder).
  int uniform_int(int n);

  // Serialized engine state, for exact checkpoint resume.
  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::mt19937_64 gen_;
};

// Derives an independent stream seed from a base seed and stream labels, so
// that e.g. evaluation episode k of evaluation pass j has a seed that does
// not depend on how much training happened in between.
uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index = 0);

}  // namespace qattenlab

#endif  // QATTENLAB_RNG_HPP_
