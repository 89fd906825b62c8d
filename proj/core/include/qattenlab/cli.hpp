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

#ifndef QATTENLAB_CLI_HPP_
#define QATTENLAB_CLI_HPP_

namespace qattenlab {

// Command-line entry point. Subcommands:
//
//   train <config.json> [--resume <checkpoint>]
//       Train per the run config; writes metrics.csv and checkpoint.bin
//       into the config's output directory. --resume restores the
//       checkpoint, truncates metrics.csv back to the restored step, and
//       continues the run deterministically.
//   eval <checkpoint> <config.json>
//       Restores the checkpoint and prints greedy evaluation statistics.
//   verify-theory [--suite-seed N] [--out report.json]
//       Runs the synthetic verification suite; prints the JSON report (or
//       writes it to --out). Exit 0 iff every asserted check passed.
//   export-attention <checkpoint> <config.json> [--episodes N] [--seed S]
//       Rolls out greedy episodes and writes per-step attention CSVs into
//       the config's output directory.
//   oracle <env-file> [--gamma g]
//       Prints the optimal discounted return of a small environment and
//       one optimal joint policy (one line per stage).
//
// Returns the process exit status: 0 on success, 1 on runtime errors
// (message on stderr), 2 on usage errors (unknown subcommand or bad
// arguments, usage text on stderr).
int run_cli(int argc, const char* const* argv);

}  // namespace qattenlab

#endif  // QATTENLAB_CLI_HPP_
