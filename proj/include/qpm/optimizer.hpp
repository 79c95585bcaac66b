// Copyright 2026 The qpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "qpm/protocols.hpp"
#include "qpm/scenario.hpp"
#include "qpm/random.hpp"
#include "qpm/sdp.hpp"

namespace qpm {

enum class Objective { kAverage, kWorst };

std::string to_string(Objective objective);
Objective objective_from_string(const std::string& name);

struct SeesawConfig {
  int max_outer_iterations = 500;
  // stop once an outer iteration gains less than window_tolerance this many times in a row
  int window = 3;
  double window_tolerance = 1e-7;
  int restarts = 20;
  std::uint64_t seed = 0;
  Objective objective = Objective::kAverage;
  double solver_tolerance = 1e-8;
  int solver_max_iterations = 100000;
  // also optimise the shared state (classical protocols only)
  bool optimize_state = false;

  void validate() const;
};

/// One see-saw sub-problem. `blocks` lists the optimised operators in protocol order
/// (effects by c; decoders by (c, y) row-major; or the single state/encoder block).
/// For the worst-case objective `worst_scalar` is the free scalar t.
struct SeesawSdp {
  SdpProblem problem;
  std::vector<int> blocks;
  int worst_scalar = -1;
};

SeesawSdp build_measurement_sdp(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective);
SeesawSdp build_decoder_sdp(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective);
SeesawSdp build_state_sdp(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective);
SeesawSdp build_quantum_encoder_sdp(const QuantumProtocol& p, const ScenarioSpec& s, Objective objective);
SeesawSdp build_quantum_decoder_sdp(const QuantumProtocol& p, const ScenarioSpec& s, Objective objective);

/// Average or catalogue-minimum fidelity of a protocol.
double protocol_objective(const ClassicalProtocol& p, const ScenarioSpec& s, Objective objective);
double protocol_objective(const QuantumProtocol& p, const ScenarioSpec& s, Objective objective);

/// Haar-conjugated projective encoder and random decoders.
ClassicalProtocol random_classical_protocol(const ScenarioSpec& s, const ResourceSpec& r, Rng& rng);
QuantumProtocol random_quantum_protocol(const ScenarioSpec& s, const ResourceSpec& r, Rng& rng);

template <typename Protocol>
struct SeesawRun {
  int restart = 0;
  std::uint64_t seed = 0;
  double fidelity = 0.0;
  // objective after every accepted or rejected sub-step; non-decreasing
  std::vector<double> trace;
  // average-objective trace of the warm-up stage of a worst-case restart
  std::vector<double> warmup_trace;
  int outer_iterations = 0;
  bool converged = false;
  Protocol protocol;
};

template <typename Protocol>
struct SeesawResult {
  std::vector<SeesawRun<Protocol>> runs;
  int best = 0;

  const SeesawRun<Protocol>& best_run() const { return runs.at(best); }
  /// max - min final fidelity over restarts.
  double spread() const {
    double lo = runs.front().fidelity;
    double hi = lo;
    for (const auto& r : runs) {
      lo = std::min(lo, r.fidelity);
      hi = std::max(hi, r.fidelity);
    }
    return hi - lo;
  }
};

/// Alternating search from a given starting protocol.
SeesawRun<ClassicalProtocol> seesaw_from(ClassicalProtocol start, const ScenarioSpec& s, const SeesawConfig& cfg);
SeesawRun<QuantumProtocol> seesaw_from(QuantumProtocol start, const ScenarioSpec& s, const SeesawConfig& cfg);

/// cfg.restarts random starts with seeds derive_seed(cfg.seed, restart), run in parallel.
/// Worst-case restarts are first optimised for the average objective.
SeesawResult<ClassicalProtocol> seesaw_run(const ScenarioSpec& s, const ResourceSpec& r, const SeesawConfig& cfg);
SeesawResult<QuantumProtocol> seesaw_run_quantum(const ScenarioSpec& s, const ResourceSpec& r,
                                                 const SeesawConfig& cfg);

// ---------------------------------------------------------------------------
// Entanglement-assisted random access codes

struct RacSeesawResult {
  QuantumRacParts parts;
  double success = 0.0;
  std::vector<double> trace;
  std::uint64_t seed = 0;
  int restart = 0;
  std::vector<double> restart_values;
};

/// Alternates Alice's POVMs {A_{c|x}} and Bob's {B_{b|y,c}} for a fixed shared state
/// (dims {d_a, d_b}) and `messages` classical messages.
RacSeesawResult rac_seesaw(int n_inputs, int d, const Operator& shared_state, int messages, const SeesawConfig& cfg);

/// True when, for some y, Bob's POVMs for two messages are not related by an outcome
/// relabeling (within `tol` entrywise).
bool is_adaptive(const QuantumRacParts& parts, double tol = 1e-3);

}  // namespace qpm
