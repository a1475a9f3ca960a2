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

#include "mmce/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <utility>

#include "mmce/errors.hpp"

namespace mmce {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
    const double px = kPi * x;
    if (std::abs(px) < 1e-8) {
        return 1.0 - px * px / 6.0;
    }
    return std::sin(px) / px;
}

} // namespace

ArrayGeometry::ArrayGeometry(int n) : num_antennas(n) {
    if (n < 1) {
        throw InvalidDimensionError("ArrayGeometry: antenna count must be >= 1");
    }
}

Eigen::VectorXcd ArrayGeometry::steering(double angle) const {
    return ula_steering(angle, num_antennas);
}

Eigen::VectorXcd ula_steering(double angle, int n) {
    if (n < 1) {
        throw InvalidDimensionError("ula_steering: antenna count must be >= 1");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double c = std::cos(angle);
    Eigen::VectorXcd a(n);
    for (int m = 0; m < n; ++m) {
        a(m) = std::polar(scale, static_cast<double>(m) * kPi * c);
    }
    return a;
}

double raised_cosine(double t, double ts, double rolloff) {
    if (ts <= 0.0) {
        throw InvalidConfigError("raised_cosine: symbol period must be positive");
    }
    if (rolloff < 0.0 || rolloff > 1.0) {
        throw InvalidConfigError("raised_cosine: roll-off must be in [0, 1]");
    }
    const double x = t / ts;
    if (rolloff == 0.0) {
        return sinc(x);
    }
    const double u = 2.0 * rolloff * x;
    const double den = 1.0 - u * u;
    if (std::abs(den) < 1e-9) {
        // removable singularity at |t| = ts / (2 rolloff)
        return (kPi / 4.0) * sinc(1.0 / (2.0 * rolloff));
    }
    return sinc(x) * std::cos(kPi * rolloff * x) / den;
}

Eigen::VectorXd path_tap_profile(double delay, int num_taps, double ts,
                                 double rolloff) {
    Eigen::VectorXd q(num_taps);
    for (int d = 0; d < num_taps; ++d) {
        q(d) = raised_cosine(static_cast<double>(d) * ts - delay, ts, rolloff);
    }
    const double norm = q.norm();
    if (norm > 0.0) {
        q /= norm;
    }
    return q;
}

DictionaryPair build_dictionary(int n_t, int n_r, int g_t, int g_r) {
    if (n_t < 1 || n_r < 1) {
        throw InvalidDimensionError("build_dictionary: antenna counts must be >= 1");
    }
    if (g_t < 1 || g_r < 1) {
        throw InvalidDimensionError("build_dictionary: grid sizes must be >= 1");
    }
    DictionaryPair dict;
    dict.grid_tx.resize(g_t);
    dict.grid_rx.resize(g_r);
    dict.a_tilde_t.resize(n_t, g_t);
    dict.a_tilde_r.resize(n_r, g_r);
    for (int i = 0; i < g_t; ++i) {
        const double c = -1.0 + 2.0 * static_cast<double>(i) / g_t;
        dict.grid_tx(i) = std::acos(c);
        dict.a_tilde_t.col(i) = ula_steering(dict.grid_tx(i), n_t);
    }
    for (int i = 0; i < g_r; ++i) {
        const double c = -1.0 + 2.0 * static_cast<double>(i) / g_r;
        dict.grid_rx(i) = std::acos(c);
        dict.a_tilde_r.col(i) = ula_steering(dict.grid_rx(i), n_r);
    }
    return dict;
}

namespace {

// Partial Fisher-Yates: k distinct indices from [0, n). Falls back to
// with-replacement draws when k > n (collisions are merged downstream).
std::vector<int> sample_indices(int n, int k, Rng& rng) {
    std::vector<int> out(k);
    if (k <= n) {
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < k; ++i) {
            const int j =
                i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
    } else {
        for (int i = 0; i < k; ++i) {
            out[i] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        }
    }
    return out;
}

} // namespace

ChannelRealization draw_channel(const ChannelConfig& cfg,
                                const DictionaryPair* dict, Rng& rng) {
    if (cfg.num_paths < 1 || cfg.num_taps < 1) {
        throw InvalidConfigError("draw_channel: need num_paths >= 1 and num_taps >= 1");
    }
    if (cfg.num_tx < 1 || cfg.num_rx < 1) {
        throw InvalidDimensionError("draw_channel: antenna counts must be >= 1");
    }
    if (cfg.on_grid && dict == nullptr) {
        throw InvalidConfigError("draw_channel: on-grid mode needs a dictionary");
    }
    if (cfg.symbol_period <= 0.0) {
        throw InvalidConfigError("draw_channel: symbol period must be positive");
    }

    ChannelRealization ch;
    ch.num_taps = cfg.num_taps;
    ch.symbol_period = cfg.symbol_period;
    ch.pathloss = cfg.pathloss;
    ch.rolloff = cfg.rolloff;
    ch.on_grid = cfg.on_grid;
    ch.scale = std::sqrt(static_cast<double>(cfg.num_tx) * cfg.num_rx /
                         (static_cast<double>(cfg.num_paths) * cfg.pathloss));
    ch.paths.resize(cfg.num_paths);

    const double max_delay = static_cast<double>(cfg.num_taps - 1) * cfg.symbol_period;
    for (auto& p : ch.paths) {
        p.delay = rng.uniform(0.0, max_delay);
    }
    if (cfg.on_grid) {
        const auto rx_idx = sample_indices(static_cast<int>(dict->num_rx_points()),
                                           cfg.num_paths, rng);
        const auto tx_idx = sample_indices(static_cast<int>(dict->num_tx_points()),
                                           cfg.num_paths, rng);
        for (int l = 0; l < cfg.num_paths; ++l) {
            ch.paths[l].aoa_idx = rx_idx[l];
            ch.paths[l].aod_idx = tx_idx[l];
            ch.paths[l].aoa = dict->grid_rx(rx_idx[l]);
            ch.paths[l].aod = dict->grid_tx(tx_idx[l]);
        }
    } else {
        for (auto& p : ch.paths) {
            p.aoa = rng.uniform(0.0, kPi);
            p.aod = rng.uniform(0.0, kPi);
        }
    }
    for (auto& p : ch.paths) {
        p.gain = rng.complex_normal();
    }

    Eigen::MatrixXcd a_r(cfg.num_rx, cfg.num_paths);
    Eigen::MatrixXcd a_t(cfg.num_tx, cfg.num_paths);
    Eigen::MatrixXd profiles(cfg.num_taps, cfg.num_paths);
    for (int l = 0; l < cfg.num_paths; ++l) {
        a_r.col(l) = ula_steering(ch.paths[l].aoa, cfg.num_rx);
        a_t.col(l) = ula_steering(ch.paths[l].aod, cfg.num_tx);
        profiles.col(l) = path_tap_profile(ch.paths[l].delay, cfg.num_taps,
                                           cfg.symbol_period, cfg.rolloff);
    }

    ch.taps.resize(cfg.num_taps);
    for (int d = 0; d < cfg.num_taps; ++d) {
        Eigen::VectorXcd w(cfg.num_paths);
        for (int l = 0; l < cfg.num_paths; ++l) {
            w(l) = ch.scale * ch.paths[l].gain * profiles(d, l);
        }
        ch.taps[d] = a_r * w.asDiagonal() * a_t.adjoint();
    }
    return ch;
}

Eigen::MatrixXcd freq_response(const ChannelRealization& ch, int k, int fft_size) {
    if (ch.num_taps > fft_size) {
        throw InvalidConfigError("freq_response: more taps than FFT points");
    }
    if (k < 0 || k >= fft_size) {
        throw InvalidConfigError("freq_response: subcarrier index out of range");
    }
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(ch.taps[0].rows(), ch.taps[0].cols());
    for (int d = 0; d < ch.num_taps; ++d) {
        const double phase = -2.0 * kPi * static_cast<double>(k) * d / fft_size;
        h += ch.taps[d] * std::polar(1.0, phase);
    }
    return h;
}

namespace {

// (aod_idx, aoa_idx) -> per-path accumulation index, collisions merged.
std::map<std::pair<int, int>, std::vector<int>>
grid_pair_map(const ChannelRealization& ch) {
    std::map<std::pair<int, int>, std::vector<int>> pairs;
    for (int l = 0; l < static_cast<int>(ch.paths.size()); ++l) {
        pairs[{ch.paths[l].aod_idx, ch.paths[l].aoa_idx}].push_back(l);
    }
    return pairs;
}

} // namespace

Eigen::VectorXcd true_sparse_vector(const ChannelRealization& ch,
                                    const DictionaryPair& dict, int k,
                                    int fft_size) {
    if (!ch.on_grid) {
        throw UnsupportedModeError(
            "true_sparse_vector: channel was drawn off-grid; no exact sparse "
            "representation exists");
    }
    if (ch.num_taps > fft_size) {
        throw InvalidConfigError("true_sparse_vector: more taps than FFT points");
    }
    const Eigen::Index g_r = dict.num_rx_points();
    Eigen::VectorXcd h_v =
        Eigen::VectorXcd::Zero(dict.num_tx_points() * g_r);
    for (const auto& [pair, path_ids] : grid_pair_map(ch)) {
        const Eigen::Index linear = static_cast<Eigen::Index>(pair.first) * g_r + pair.second;
        std::complex<double> coeff(0.0, 0.0);
        for (int l : path_ids) {
            const Eigen::VectorXd q = path_tap_profile(
                ch.paths[l].delay, ch.num_taps, ch.symbol_period, ch.rolloff);
            std::complex<double> gk(0.0, 0.0);
            for (int d = 0; d < ch.num_taps; ++d) {
                gk += q(d) * std::polar(1.0, -2.0 * kPi * k * d / fft_size);
            }
            coeff += ch.scale * ch.paths[l].gain * gk;
        }
        h_v(linear) = coeff;
    }
    return h_v;
}

std::vector<Eigen::Index> true_support(const ChannelRealization& ch,
                                       const DictionaryPair& dict) {
    if (!ch.on_grid) {
        throw UnsupportedModeError("true_support: channel was drawn off-grid");
    }
    std::vector<Eigen::Index> support;
    const Eigen::Index g_r = dict.num_rx_points();
    for (const auto& [pair, path_ids] : grid_pair_map(ch)) {
        support.push_back(static_cast<Eigen::Index>(pair.first) * g_r + pair.second);
    }
    std::sort(support.begin(), support.end());
    return support;
}

} // namespace mmce
