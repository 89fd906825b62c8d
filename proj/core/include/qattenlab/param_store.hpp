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

#ifndef QATTENLAB_PARAM_STORE_HPP_
#define QATTENLAB_PARAM_STORE_HPP_

#include <map>
#include <string>
#include <vector>

#include "qattenlab/array.hpp"
#include "qattenlab/rng.hpp"

namespace qattenlab {

// Named learnable parameters with matching gradient buffers. Iteration order
// is the lexicographic order of the names, so optimizer updates, checkpoint
// layout, and finite-difference sweeps are all deterministic.
class ParamStore {
 public:
  // Registers a new parameter; the name must be unused. Gradient starts zero.
  Array& add(const std::string& name, Array init);

  bool has(const std::string& name) const;
  const Array& value(const std::string& name) const;
  Array& value_mut(const std::string& name);
  const Array& grad(const std::string& name) const;
  Array& grad_mut(const std::string& name);

  void zero_grads();
  double grad_global_norm() const;
  // Rescales all gradients so their global L2 norm is at most max_norm.
  void clip_grads(double max_norm);

  std::vector<std::string> names() const;
  size_t count() const { return entries_.size(); }
  int total_elements() const;

  // Overwrites this store's values from another store with identical names
  // and shapes (hard target-network update).
  void copy_values_from(const ParamStore& src);

 private:
  struct Entry {
    Array value;
    Array grad;
  };
  std::map<std::string, Entry> entries_;
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization for a weight of
// shape (fan_in, fan_out). Biases are registered as zeros.
Array init_weight(Rng& rng, int fan_in, int fan_out);

// Registers "<prefix>.w" (in x out) and, when with_bias, "<prefix>.b" (1 x out).
void add_linear(ParamStore& store, Rng& rng, const std::string& prefix, int in,
                int out, bool with_bias = true);

}  // namespace qattenlab

#endif  // QATTENLAB_PARAM_STORE_HPP_
