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

#include "qattenlab/param_store.hpp"

#include <cmath>

#include "qattenlab/error.hpp"

namespace qattenlab {

Array& ParamStore::add(const std::string& name, Array init) {
  auto [it, inserted] = entries_.try_emplace(name);
  if (!inserted) throw ContractError("parameter already registered: " + name);
  it->second.grad = Array::zeros(init.shape);
  it->second.value = std::move(init);
  return it->second.value;
}

bool ParamStore::has(const std::string& name) const { return entries_.count(name) > 0; }

const Array& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.value;
}

Array& ParamStore::value_mut(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.value;
}

const Array& ParamStore::grad(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.grad;
}

Array& ParamStore::grad_mut(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries_) {
    for (double& g : e.grad.data) g = 0.0;
  }
}

double ParamStore::grad_global_norm() const {
  double sq = 0.0;
  for (const auto& [name, e] : entries_) {
    for (double g : e.grad.data) sq += g * g;
  }
  return std::sqrt(sq);
}

void ParamStore::clip_grads(double max_norm) {
  const double norm = grad_global_norm();
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (auto& [name, e] : entries_) {
    for (double& g : e.grad.data) g *= scale;
  }
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

int ParamStore::total_elements() const {
  int n = 0;
  for (const auto& [name, e] : entries_) n += e.value.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& src) {
  if (src.entries_.size() != entries_.size()) {
    throw ContractError("copy_values_from: parameter sets differ in size");
  }
  auto dst_it = entries_.begin();
  for (const auto& [name, e] : src.entries_) {
    if (dst_it->first != name || !dst_it->second.value.same_shape(e.value)) {
      throw ContractError("copy_values_from: mismatch at parameter " + name);
    }
    dst_it->second.value.data = e.value.data;
    ++dst_it;
  }
}

Array init_weight(Rng& rng, int fan_in, int fan_out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Array w = Array::zeros({fan_in, fan_out});
  for (double& x : w.data) x = rng.uniform(-bound, bound);
  return w;
}

void add_linear(ParamStore& store, Rng& rng, const std::string& prefix, int in,
                int out, bool with_bias) {
  store.add(prefix + ".w", init_weight(rng, in, out));
  if (with_bias) store.add(prefix + ".b", Array::zeros({1, out}));
}

}  // namespace qattenlab
