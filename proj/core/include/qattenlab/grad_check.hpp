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

#ifndef QATTENLAB_GRAD_CHECK_HPP_
#define QATTENLAB_GRAD_CHECK_HPP_

#include <functional>
#include <string>

#include "qattenlab/param_store.hpp"

namespace qattenlab {

struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  std::string worst_param;  // name of the parameter with the largest error
  int worst_index = -1;     // flat element index within that parameter
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  int elements_checked = 0;
};

// Compares analytic gradients against central finite differences.
//
// `f` evaluates the scalar objective for a given parameter assignment; it
// must be a pure function of the store's values. `store` enters with the
// point to check; its gradient buffers are overwritten with the analytic
// gradient produced by `analytic` (which should build a tape and call
// backward). Every element e of every parameter is then perturbed by ±h and
// the relative error
//     |num - ana| / max(|num|, |ana|, floor)
// is computed with floor = 1e-8, so that gradients that are genuinely zero
// compare under an absolute criterion instead of dividing by zero.
GradCheckReport grad_check(
    const std::function<double(const ParamStore&)>& f,
    const std::function<void(ParamStore&)>& analytic, ParamStore& store,
    double h, double tolerance);

}  // namespace qattenlab

#endif  // QATTENLAB_GRAD_CHECK_HPP_
