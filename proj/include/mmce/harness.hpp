// SPDX-License-Identifier: Apache-2.0
//
// mmce: compressive channel estimation for frequency-selective hybrid mmWave MIMO
// Copyright (C) 2026 The mmce authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMCE_HARNESS_HPP
#define MMCE_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmce/bounds.hpp"
#include "mmce/channel.hpp"
#include "mmce/metrics.hpp"
#include "mmce/recovery.hpp"
#include "mmce/training.hpp"

namespace mmce {

enum class Algorithm { swomp, ss_swomp_th, omp };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

/// Monte-Carlo sweep configuration. A single transmit RF chain is assumed
/// throughout (frequency-flat scalar training symbols).
struct SimConfig {
    int n_t = 32;
    int n_r = 32;
    int l_r = 4;
    int num_subcarriers = 16; // K
    int num_taps = 4;         // N_c
    int num_paths = 4;        // L
    int g_t = 64;
    int g_r = 64;
    std::vector<int> frames = {80, 120}; // M values
    int n_q = 2;
    double rolloff = 0.8;
    double symbol_period = 1.0 / 1760.0;
    std::vector<double> snr_db = {-15.0, -10.0, -5.0, 0.0, 5.0, 10.0};
    int trials = 50;
    std::uint64_t seed = 1;
    bool on_grid = true;
    std::vector<Algorithm> algorithms = {Algorithm::swomp, Algorithm::ss_swomp_th,
                                         Algorithm::omp};
    int num_streams = 2; // N_s for the rate metric
    int threads = 0;     // 0 = hardware concurrency

    // Recovery knobs; max_iters <= 0 means the 2 N_c L default.
    int max_iters = 0;
    int k_p = 4;
    double beta = 0.025;
    NoiseKnowledge sigma2_mode = NoiseKnowledge::genie;

    int effective_max_iters() const {
        return max_iters > 0 ? max_iters : 2 * num_taps * num_paths;
    }
    void validate() const;
};

/// Flat `key = value` config file ('#' starts a comment). Unknown keys fail.
SimConfig parse_config_file(const std::string& path);
void apply_config_line(SimConfig& cfg, const std::string& key,
                       const std::string& value);

struct AlgoMetrics {
    double nmse = 0.0; // linear
    double rate = 0.0; // bits/s/Hz
    OpCounts ops;
    int iterations = 0;
};

struct TrialResult {
    std::map<Algorithm, AlgoMetrics> metrics;
    double ncrlb = 0.0; // linear
    bool ok = false;
    std::string error;
};

/// One Monte-Carlo trial: a child seed from (seed, trial_index), one draw of
/// channel + training + noise, every configured algorithm on identical data.
TrialResult run_trial(const SimConfig& cfg, double snr_db, int num_frames,
                      int trial_index, const DictionaryPair& dict,
                      const std::shared_ptr<const Eigen::MatrixXcd>& psi);

struct SweepRow {
    std::string algorithm;
    double snr_db = 0.0;
    int m_frames = 0;
    int trials = 0;        // trials aggregated into this row
    double nmse_db = 0.0;  // 10 log10 of the mean linear NMSE
    double rate_bps_hz = 0.0;
    double ncrlb_db = 0.0;
    double ops_projection = 0.0; // mean per trial
    double ops_wls = 0.0;
    double ops_total = 0.0;
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int failed_trials = 0;
};

/// Full sweep over snr_db x frames x trials. Trials may run on several
/// threads; per-trial results are deterministic and aggregated in a fixed
/// order, so the result does not depend on the thread count.
SweepResult run_sweep(const SimConfig& cfg);

/// CSV with header
/// algorithm,snr_db,m_frames,trials,nmse_db,rate_bps_hz,ncrlb_db,ops_projection,ops_wls,ops_total,seed
/// preceded by '#' comment lines (config echo plus one timestamp line).
void write_csv(const SweepResult& result, const SimConfig& cfg,
               const std::string& path);
std::string csv_string(const SweepResult& result, const SimConfig& cfg);

} // namespace mmce

#endif
