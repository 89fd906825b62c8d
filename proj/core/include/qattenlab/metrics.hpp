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

#ifndef QATTENLAB_METRICS_HPP_
#define QATTENLAB_METRICS_HPP_

#include <fstream>
#include <string>

#include "qattenlab/trainer.hpp"

namespace qattenlab {

// Append-only CSV evaluation log:
//
//   step,median_return,mean_return,win_rate,loss,epsilon
//
// One header line, then one row per evaluation. Values are printed with 12
// significant digits so a reread round-trips them. Each row is written as a
// single buffered line and flushed, so a crash between rows leaves a
// parseable file.
class MetricsLog {
 public:
  // Starts a fresh log (truncates, writes the header).
  static MetricsLog create(const std::string& path);

  // Reopens an existing log for a resumed run: rows with step > max_step
  // are dropped (they belong to the future of the checkpoint being resumed)
  // and the step of the last surviving row is stored in *last_kept_step
  // (-1 when only the header survives). Appending continues from there.
  static MetricsLog open_for_resume(const std::string& path,
                                    long long max_step,
                                    long long* last_kept_step);

  void append(const EvalRow& row);

  const std::string& path() const { return path_; }

 private:
  MetricsLog(std::string path, std::ofstream out)
      : path_(std::move(path)), out_(std::move(out)) {}

  std::string path_;
  std::ofstream out_;
};

}  // namespace qattenlab

#endif  // QATTENLAB_METRICS_HPP_
