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

#ifndef QATTENLAB_TESTS_TEST_HELPERS_HPP_
#define QATTENLAB_TESTS_TEST_HELPERS_HPP_

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qattenlab/array.hpp"
#include "qattenlab/rng.hpp"

namespace qattenlab::testing {

// Fixture files are addressed relative to the repository root; ctest runs
// the unit binaries with that as the working directory.
inline std::string game_file(const std::string& name) {
  return (std::filesystem::path("games") / name).string();
}

// A unique scratch directory per test case, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("qattenlab-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline Array random_array(std::vector<int> shape, Rng& rng, double lo = -1.0,
                          double hi = 1.0) {
  Array a = Array::zeros(std::move(shape));
  for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform(lo, hi);
  return a;
}

inline double max_abs_diff(const Array& a, const Array& b) {
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (d > worst) worst = d;
  }
  return worst;
}

}  // namespace qattenlab::testing

#endif  // QATTENLAB_TESTS_TEST_HELPERS_HPP_
