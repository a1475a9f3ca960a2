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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mmce/errors.hpp"
#include "mmce/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo sweeps for frequency-selective hybrid mmWave MIMO "
                 "channel estimation (SW-OMP, SS-SW-OMP+Th, per-subcarrier OMP)"};

    std::string config_path;
    std::string out_path = "sweep.csv";
    std::string algo;
    std::string grid;
    std::vector<double> snr;
    std::vector<int> frames;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    int threads = -1;

    app.add_option("--config", config_path, "flat key = value configuration file");
    app.add_option("--out", out_path, "output CSV path (default sweep.csv)");
    app.add_option("--seed", seed, "root RNG seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--snr", snr, "SNR grid in dB")->delimiter(',');
    app.add_option("--frames", frames, "training frame counts M")->delimiter(',');
    app.add_option("--trials", trials, "Monte-Carlo trials per sweep point");
    app.add_option("--algo", algo, "swomp, ss-swomp-th, omp or all");
    app.add_option("--grid", grid, "on (dictionary-grid angles) or off");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    mmce::SimConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = mmce::parse_config_file(config_path);
        }
        if (seed_set) cfg.seed = seed;
        if (!snr.empty()) cfg.snr_db = snr;
        if (!frames.empty()) cfg.frames = frames;
        if (trials > 0) cfg.trials = trials;
        if (!algo.empty()) mmce::apply_config_line(cfg, "algo", algo);
        if (!grid.empty()) mmce::apply_config_line(cfg, "grid", grid);
        if (threads >= 0) cfg.threads = threads;
        cfg.validate();
    } catch (const mmce::InvalidConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 1;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        {
            // Fail on an unwritable output path before any computation.
            std::ofstream probe(out_path, std::ios::app);
            if (!probe) {
                std::cerr << "cannot write output file: " << out_path << "\n";
                return 2;
            }
        }
        const mmce::SweepResult result = mmce::run_sweep(cfg);
        mmce::write_csv(result, cfg, out_path);
        std::cout << "wrote " << result.rows.size() << " rows to " << out_path;
        if (result.failed_trials > 0) {
            std::cout << " (" << result.failed_trials << " failed trials excluded)";
        }
        std::cout << "\n";
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
