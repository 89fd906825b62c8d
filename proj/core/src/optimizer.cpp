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

#include "qattenlab/optimizer.hpp"

#include <cmath>

namespace qattenlab {

void RmsProp::step(ParamStore& store) {
  for (const std::string& name : store.names()) {
    const Array& g = store.grad(name);
    Array& p = store.value_mut(name);
    auto [it, inserted] = v_.try_emplace(name);
    if (inserted) it->second = Array::zeros(p.shape);
    Array& v = it->second;
    for (int i = 0; i < p.size(); ++i) {
      v[i] = config_.smoothing * v[i] + (1.0 - config_.smoothing) * g[i] * g[i];
      p[i] -= config_.learning_rate * g[i] / (std::sqrt(v[i]) + config_.epsilon);
    }
  }
}

}  // namespace qattenlab
