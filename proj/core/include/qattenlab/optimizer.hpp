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

#ifndef QATTENLAB_OPTIMIZER_HPP_
#define QATTENLAB_OPTIMIZER_HPP_

#include <map>
#include <string>

#include "qattenlab/param_store.hpp"

namespace qattenlab {

struct RmsPropConfig {
  double learning_rate = 5e-4;
  double smoothing = 0.99;  // decay of the squared-gradient average
  double epsilon = 1e-5;
};

// RMSProp: v <- s*v + (1-s)*g^2;  p <- p - lr * g / (sqrt(v) + eps).
// Second-moment accumulators are created lazily per parameter and are part
// of the training state serialized into checkpoints.
class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig config = {}) : config_(config) {}

  const RmsPropConfig& config() const { return config_; }

  // Applies one update from the gradients currently held in the store.
  void step(ParamStore& store);

  // Accumulator access for checkpointing (name -> second-moment array).
  const std::map<std::string, Array>& second_moments() const { return v_; }
  void set_second_moment(const std::string& name, Array v) { v_[name] = std::move(v); }

 private:
  RmsPropConfig config_;
  std::map<std::string, Array> v_;
};

}  // namespace qattenlab

#endif  // QATTENLAB_OPTIMIZER_HPP_
