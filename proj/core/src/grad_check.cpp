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

#include "qattenlab/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace qattenlab {

GradCheckReport grad_check(const std::function<double(const ParamStore&)>& f,
                           const std::function<void(ParamStore&)>& analytic,
                           ParamStore& store, double h, double tolerance) {
  store.zero_grads();
  analytic(store);

  GradCheckReport report;
  constexpr double kFloor = 1e-8;
  for (const std::string& name : store.names()) {
    const Array& g = store.grad(name);
    Array& p = store.value_mut(name);
    for (int i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = f(store);
      p[i] = saved - h;
      const double down = f(store);
      p[i] = saved;
      const double num = (up - down) / (2.0 * h);
      const double ana = g[i];
      const double denom = std::max({std::fabs(num), std::fabs(ana), kFloor});
      const double rel = std::fabs(num - ana) / denom;
      ++report.elements_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.analytic_at_worst = ana;
        report.numeric_at_worst = num;
      }
    }
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace qattenlab
