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

#ifndef QATTENLAB_CHECKPOINT_HPP_
#define QATTENLAB_CHECKPOINT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qattenlab/array.hpp"
#include "qattenlab/replay_buffer.hpp"

namespace qattenlab {

// A full snapshot of training state. Arrays hold every learnable parameter
// (online and target copies) plus optimizer accumulators, keyed by sectioned
// names ("online/agent.fc1.w", "target/...", "opt/..."). Counters carry the
// step/episode bookkeeping that seeds every random stream, so restoring a
// checkpoint continues the run exactly where it left off. The replay buffer
// is optional: resuming training needs it; pure evaluation does not.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  uint32_t version = kVersion;
  std::map<std::string, Array> arrays;
  std::map<std::string, uint64_t> counters;
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> text;
  bool has_buffer = false;
  std::vector<Episode> buffer;  // oldest first
};

// Binary serialization with a trailing-proof layout: fixed magic + version,
// payload length, and a CRC-32 over the payload. The file is written to a
// temporary sibling and renamed into place, so a crash never leaves a
// partial file under the target name. Load verifies magic, version, length,
// and checksum before decoding anything; any mismatch raises IoError.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qattenlab

#endif  // QATTENLAB_CHECKPOINT_HPP_
