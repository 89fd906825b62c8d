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

#include "qattenlab/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

constexpr const char* kHeader = "step,median_return,mean_return,win_rate,loss,epsilon";

std::string format_row(const EvalRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                row.step, row.median_return, row.mean_return, row.win_rate,
                row.loss, row.epsilon);
  return buf;
}

}  // namespace

MetricsLog MetricsLog::create(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("metrics log: cannot open " + path + " for writing");
  out << kHeader << '\n';
  out.flush();
  if (!out) throw IoError("metrics log: write to " + path + " failed");
  return MetricsLog(path, std::move(out));
}

MetricsLog MetricsLog::open_for_resume(const std::string& path,
                                       long long max_step,
                                       long long* last_kept_step) {
  std::ifstream in(path);
  if (!in) throw IoError("metrics log: cannot open " + path + " to resume");
  std::vector<std::string> kept;
  std::string line;
  long long last = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      if (line != kHeader) {
        throw IoError("metrics log: " + path + " has an unexpected header");
      }
      kept.push_back(line);
      first = false;
      continue;
    }
    long long step = 0;
    try {
      step = std::stoll(line.substr(0, line.find(',')));
    } catch (const std::exception&) {
      throw IoError("metrics log: " + path + " has a malformed row");
    }
    if (step > max_step) break;
    kept.push_back(line);
    last = step;
  }
  in.close();
  if (first) throw IoError("metrics log: " + path + " is empty");

  // Rewrite through a temp file so a crash cannot half-truncate the log.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("metrics log: cannot open " + tmp + " for writing");
    for (const std::string& row : kept) out << row << '\n';
    out.flush();
    if (!out) throw IoError("metrics log: write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path);

  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("metrics log: cannot reopen " + path + " to append");
  if (last_kept_step) *last_kept_step = last;
  return MetricsLog(path, std::move(out));
}

void MetricsLog::append(const EvalRow& row) {
  out_ << format_row(row);
  out_.flush();
  if (!out_) throw IoError("metrics log: write to " + path_ + " failed");
}

}  // namespace qattenlab
