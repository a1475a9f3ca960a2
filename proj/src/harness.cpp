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

#include "mmce/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "mmce/errors.hpp"
#include "mmce/rng.hpp"

namespace mmce {

std::string algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::swomp:
        return "swomp";
    case Algorithm::ss_swomp_th:
        return "ss-swomp-th";
    case Algorithm::omp:
        return "omp";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "swomp") return Algorithm::swomp;
    if (name == "ss-swomp-th") return Algorithm::ss_swomp_th;
    if (name == "omp") return Algorithm::omp;
    throw InvalidConfigError("unknown algorithm: " + name);
}

void SimConfig::validate() const {
    if (n_t < 1 || n_r < 1 || l_r < 1 || g_t < 1 || g_r < 1) {
        throw InvalidConfigError("config: dimensions must be >= 1");
    }
    if (l_r > n_r) {
        throw InvalidConfigError("config: l_r cannot exceed n_r");
    }
    if (num_subcarriers < 1 || num_taps < 1 || num_paths < 1) {
        throw InvalidConfigError("config: K, N_c and L must be >= 1");
    }
    if (num_taps > num_subcarriers) {
        throw InvalidConfigError("config: N_c cannot exceed K");
    }
    if (trials < 1) {
        throw InvalidConfigError("config: trials must be >= 1");
    }
    if (frames.empty() || snr_db.empty()) {
        throw InvalidConfigError("config: need at least one M and one SNR value");
    }
    for (int m : frames) {
        if (m < 1) throw InvalidConfigError("config: frame counts must be >= 1");
    }
    for (double s : snr_db) {
        if (!std::isfinite(s)) throw InvalidConfigError("config: SNR must be finite");
    }
    if (algorithms.empty()) {
        throw InvalidConfigError("config: no algorithms selected");
    }
    if (num_streams < 1 || num_streams > std::min(n_t, n_r)) {
        throw InvalidConfigError("config: N_s must be in [1, min(N_t, N_r)]");
    }
    if (k_p < 1 || k_p > num_subcarriers) {
        throw InvalidConfigError("config: k_p must be in [1, K]");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw InvalidConfigError("config: beta must be in (0, 1)");
    }
    if (n_q < 1) {
        throw InvalidConfigError("config: n_q must be >= 1");
    }
    if (rolloff < 0.0 || rolloff > 1.0) {
        throw InvalidConfigError("config: rolloff must be in [0, 1]");
    }
    if (symbol_period <= 0.0) {
        throw InvalidConfigError("config: t_s must be positive");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        parts.push_back(trim(item));
    }
    return parts;
}

std::vector<Algorithm> parse_algorithms(const std::string& value) {
    if (value == "all") {
        return {Algorithm::swomp, Algorithm::ss_swomp_th, Algorithm::omp};
    }
    std::vector<Algorithm> out;
    for (const auto& name : split(value, ',')) {
        out.push_back(algorithm_from_name(name));
    }
    return out;
}

} // namespace

void apply_config_line(SimConfig& cfg, const std::string& key,
                       const std::string& value) {
    try {
        if (key == "n_t") cfg.n_t = std::stoi(value);
        else if (key == "n_r") cfg.n_r = std::stoi(value);
        else if (key == "l_r") cfg.l_r = std::stoi(value);
        else if (key == "k") cfg.num_subcarriers = std::stoi(value);
        else if (key == "n_c") cfg.num_taps = std::stoi(value);
        else if (key == "l") cfg.num_paths = std::stoi(value);
        else if (key == "g_t") cfg.g_t = std::stoi(value);
        else if (key == "g_r") cfg.g_r = std::stoi(value);
        else if (key == "n_q") cfg.n_q = std::stoi(value);
        else if (key == "rolloff") cfg.rolloff = std::stod(value);
        else if (key == "t_s") cfg.symbol_period = std::stod(value);
        else if (key == "trials") cfg.trials = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "n_s") cfg.num_streams = std::stoi(value);
        else if (key == "threads") cfg.threads = std::stoi(value);
        else if (key == "max_iters") cfg.max_iters = std::stoi(value);
        else if (key == "k_p") cfg.k_p = std::stoi(value);
        else if (key == "beta") cfg.beta = std::stod(value);
        else if (key == "m" || key == "frames") {
            cfg.frames.clear();
            for (const auto& v : split(value, ',')) cfg.frames.push_back(std::stoi(v));
        } else if (key == "snr") {
            cfg.snr_db.clear();
            for (const auto& v : split(value, ',')) cfg.snr_db.push_back(std::stod(v));
        } else if (key == "grid") {
            if (value == "on") cfg.on_grid = true;
            else if (value == "off") cfg.on_grid = false;
            else throw InvalidConfigError("config: grid must be 'on' or 'off'");
        } else if (key == "algo") {
            cfg.algorithms = parse_algorithms(value);
        } else if (key == "sigma2_mode") {
            if (value == "genie") cfg.sigma2_mode = NoiseKnowledge::genie;
            else if (value == "estimated") cfg.sigma2_mode = NoiseKnowledge::estimated;
            else throw InvalidConfigError("config: sigma2_mode must be genie or estimated");
        } else {
            throw InvalidConfigError("config: unknown key '" + key + "'");
        }
    } catch (const InvalidConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidConfigError("config: bad value for key '" + key + "'");
    }
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfigError("config: cannot open " + path);
    }
    SimConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfigError("config: line " + std::to_string(line_no) +
                                     " is not 'key = value'");
        }
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

namespace {

// Per-path steering matrices on the merged true support (duplicate on-grid
// (aoa, aod) pairs collapse to one column so the FIM stays nonsingular).
void true_steering_columns(const ChannelRealization& ch, int n_t, int n_r,
                           Eigen::MatrixXcd& a_t_cols, Eigen::MatrixXcd& a_r_cols) {
    std::vector<std::pair<double, double>> pairs;
    if (ch.on_grid) {
        std::set<std::pair<int, int>> seen;
        for (const auto& p : ch.paths) {
            if (seen.insert({p.aod_idx, p.aoa_idx}).second) {
                pairs.emplace_back(p.aod, p.aoa);
            }
        }
    } else {
        for (const auto& p : ch.paths) {
            pairs.emplace_back(p.aod, p.aoa);
        }
    }
    a_t_cols.resize(n_t, static_cast<Eigen::Index>(pairs.size()));
    a_r_cols.resize(n_r, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        a_t_cols.col(static_cast<Eigen::Index>(i)) = ula_steering(pairs[i].first, n_t);
        a_r_cols.col(static_cast<Eigen::Index>(i)) = ula_steering(pairs[i].second, n_r);
    }
}

} // namespace

TrialResult run_trial(const SimConfig& cfg, double snr_db, int num_frames,
                      int trial_index, const DictionaryPair& dict,
                      const std::shared_ptr<const Eigen::MatrixXcd>& psi) {
    TrialResult result;
    try {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial_index)));

        ChannelConfig ch_cfg;
        ch_cfg.num_tx = cfg.n_t;
        ch_cfg.num_rx = cfg.n_r;
        ch_cfg.num_paths = cfg.num_paths;
        ch_cfg.num_taps = cfg.num_taps;
        ch_cfg.symbol_period = cfg.symbol_period;
        ch_cfg.rolloff = cfg.rolloff;
        ch_cfg.on_grid = cfg.on_grid;
        const ChannelRealization ch = draw_channel(ch_cfg, &dict, rng);

        const TrainingEnsemble tr = draw_training(rng, num_frames, cfg.n_t, cfg.n_r,
                                                  cfg.l_r, cfg.n_q,
                                                  cfg.num_subcarriers);
        const MeasurementOperator op = build_operator(tr, dict, psi);
        const double sigma2 = std::pow(10.0, -snr_db / 10.0);
        const ReceivedEnsemble rcv =
            synthesize_received(ch, tr, op, sigma2, rng, cfg.num_subcarriers);

        std::vector<Eigen::MatrixXcd> h_true(static_cast<std::size_t>(cfg.num_subcarriers));
        for (int k = 0; k < cfg.num_subcarriers; ++k) {
            h_true[static_cast<std::size_t>(k)] = freq_response(ch, k, cfg.num_subcarriers);
        }

        Eigen::MatrixXcd a_t_cols, a_r_cols;
        true_steering_columns(ch, cfg.n_t, cfg.n_r, a_t_cols, a_r_cols);
        result.ncrlb = crlb_report(op, a_t_cols, a_r_cols, sigma2, h_true).ncrlb;

        RecoveryConfig rc;
        rc.epsilon = sigma2;
        rc.max_iters = cfg.effective_max_iters();
        rc.k_p = cfg.k_p;
        rc.beta = cfg.beta;
        rc.sigma2_mode = cfg.sigma2_mode;

        for (Algorithm algo : cfg.algorithms) {
            SparseEstimate est;
            switch (algo) {
            case Algorithm::swomp:
                est = swomp(rcv.y, op, rc);
                break;
            case Algorithm::ss_swomp_th:
                est = ss_swomp_th(rcv.y, op, rc);
                break;
            case Algorithm::omp:
                est = omp_per_subcarrier(rcv.y, op, rc);
                break;
            }
            AlgoMetrics m;
            m.nmse = nmse(est.channel, h_true);
            m.rate = spectral_efficiency(est.channel, h_true, snr_db, cfg.num_streams);
            m.ops = est.ops;
            m.iterations = est.iterations;
            result.metrics[algo] = m;
        }
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    return result;
}

SweepResult run_sweep(const SimConfig& cfg) {
    cfg.validate();
    const DictionaryPair dict = build_dictionary(cfg.n_t, cfg.n_r, cfg.g_t, cfg.g_r);
    const auto psi = build_psi(dict);

    struct Point {
        double snr_db;
        int m;
    };
    std::vector<Point> points;
    for (double snr : cfg.snr_db) {
        for (int m : cfg.frames) {
            points.push_back({snr, m});
        }
    }

    const std::size_t jobs = points.size() * static_cast<std::size_t>(cfg.trials);
    std::vector<TrialResult> results(jobs);
    int thread_count = cfg.threads > 0
                           ? cfg.threads
                           : static_cast<int>(std::thread::hardware_concurrency());
    thread_count = std::max(1, std::min<int>(thread_count, static_cast<int>(jobs)));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs) break;
            const Point& pt = points[i / static_cast<std::size_t>(cfg.trials)];
            const int trial = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
            results[i] = run_trial(cfg, pt.snr_db, pt.m, trial, dict, psi);
        }
    };
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    SweepResult sweep;
    for (std::size_t p = 0; p < points.size(); ++p) {
        struct Acc {
            double nmse = 0.0, rate = 0.0;
            double proj = 0.0, wls = 0.0, total = 0.0;
        };
        std::map<Algorithm, Acc> acc;
        double ncrlb_sum = 0.0;
        int ok_count = 0;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const TrialResult& tr =
                results[p * static_cast<std::size_t>(cfg.trials) +
                        static_cast<std::size_t>(trial)];
            if (!tr.ok) {
                ++sweep.failed_trials;
                std::cerr << "trial failed (snr=" << points[p].snr_db
                          << ", m=" << points[p].m << ", trial=" << trial
                          << "): " << tr.error << "\n";
                continue;
            }
            ++ok_count;
            ncrlb_sum += tr.ncrlb;
            for (const auto& [algo, m] : tr.metrics) {
                auto& a = acc[algo];
                a.nmse += m.nmse;
                a.rate += m.rate;
                a.proj += static_cast<double>(m.ops.projection);
                a.wls += static_cast<double>(m.ops.wls);
                a.total += static_cast<double>(m.ops.total());
            }
        }
        for (Algorithm algo : cfg.algorithms) {
            SweepRow row;
            row.algorithm = algorithm_name(algo);
            row.snr_db = points[p].snr_db;
            row.m_frames = points[p].m;
            row.trials = ok_count;
            row.seed = cfg.seed;
            if (ok_count > 0) {
                const auto& a = acc[algo];
                row.nmse_db = to_db(a.nmse / ok_count);
                row.rate_bps_hz = a.rate / ok_count;
                row.ncrlb_db = to_db(ncrlb_sum / ok_count);
                row.ops_projection = a.proj / ok_count;
                row.ops_wls = a.wls / ok_count;
                row.ops_total = a.total / ok_count;
            }
            sweep.rows.push_back(row);
        }
    }
    return sweep;
}

namespace {

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::string algorithms_string(const SimConfig& cfg) {
    std::string s;
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
        if (i) s += ",";
        s += algorithm_name(cfg.algorithms[i]);
    }
    return s;
}

} // namespace

std::string csv_string(const SweepResult& result, const SimConfig& cfg) {
    std::ostringstream out;
    std::time_t now = std::time(nullptr);
    char ts[64];
    std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated: " << ts << "\n";
    out << "# config: n_t=" << cfg.n_t << " n_r=" << cfg.n_r << " l_r=" << cfg.l_r
        << " k=" << cfg.num_subcarriers << " n_c=" << cfg.num_taps
        << " l=" << cfg.num_paths << " g_t=" << cfg.g_t << " g_r=" << cfg.g_r
        << " n_q=" << cfg.n_q << " rolloff=" << fmt_double(cfg.rolloff)
        << " t_s=" << fmt_double(cfg.symbol_period) << " n_s=" << cfg.num_streams
        << " grid=" << (cfg.on_grid ? "on" : "off")
        << " k_p=" << cfg.k_p << " beta=" << fmt_double(cfg.beta)
        << " max_iters=" << cfg.effective_max_iters() << " sigma2_mode="
        << (cfg.sigma2_mode == NoiseKnowledge::genie ? "genie" : "estimated")
        << " algo=" << algorithms_string(cfg) << " trials=" << cfg.trials << "\n";
    out << "algorithm,snr_db,m_frames,trials,nmse_db,rate_bps_hz,ncrlb_db,"
           "ops_projection,ops_wls,ops_total,seed\n";
    for (const auto& row : result.rows) {
        out << row.algorithm << ',' << fmt_double(row.snr_db) << ','
            << row.m_frames << ',' << row.trials << ',' << fmt_double(row.nmse_db)
            << ',' << fmt_double(row.rate_bps_hz) << ',' << fmt_double(row.ncrlb_db)
            << ',' << fmt_double(row.ops_projection) << ','
            << fmt_double(row.ops_wls) << ',' << fmt_double(row.ops_total) << ','
            << row.seed << "\n";
    }
    return out.str();
}

void write_csv(const SweepResult& result, const SimConfig& cfg,
               const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_csv: cannot open " + path);
    }
    out << csv_string(result, cfg);
    if (!out) {
        throw std::runtime_error("write_csv: write failed for " + path);
    }
}

} // namespace mmce
