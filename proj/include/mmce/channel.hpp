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

#ifndef MMCE_CHANNEL_HPP
#define MMCE_CHANNEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "mmce/rng.hpp"

namespace mmce {

/// Half-wavelength uniform linear array.
struct ArrayGeometry {
    int num_antennas = 1;

    explicit ArrayGeometry(int n);

    /// Steering vector at the given angle (unit l2 norm).
    Eigen::VectorXcd steering(double angle) const;
};

/// Steering vector of an n-element half-wavelength ULA:
/// entry m is sqrt(1/n)·exp(j·m·pi·cos(angle)), m = 0..n-1.
Eigen::VectorXcd ula_steering(double angle, int n);

/// Raised-cosine impulse response p_rc(t) with symbol period ts and the given
/// roll-off factor. p_rc(0) = 1, zeros at nonzero integer multiples of ts; the
/// removable singularity at |t| = ts/(2·rolloff) is evaluated by its limit
/// (pi/4)·sinc(1/(2·rolloff)).
double raised_cosine(double t, double ts, double rolloff);

/// One propagation path. Grid indices are set in on-grid mode (-1 otherwise).
struct PathParams {
    std::complex<double> gain;
    double delay = 0.0; // seconds
    double aoa = 0.0;   // radians, [0, pi]
    double aod = 0.0;   // radians, [0, pi]
    int aoa_idx = -1;   // receive-grid index in on-grid mode
    int aod_idx = -1;   // transmit-grid index in on-grid mode
};

/// Transmit/receive steering dictionaries on grids uniform in cos(angle)
/// over [-1, 1), i.e. cos(theta_i) = -1 + 2i/G.
struct DictionaryPair {
    Eigen::VectorXd grid_tx; // G_t angles (radians)
    Eigen::VectorXd grid_rx; // G_r angles (radians)
    Eigen::MatrixXcd a_tilde_t; // N_t x G_t
    Eigen::MatrixXcd a_tilde_r; // N_r x G_r

    Eigen::Index num_tx_points() const { return grid_tx.size(); }
    Eigen::Index num_rx_points() const { return grid_rx.size(); }
};

DictionaryPair build_dictionary(int n_t, int n_r, int g_t, int g_r);

struct ChannelConfig {
    int num_tx = 32;
    int num_rx = 32;
    int num_paths = 4;
    int num_taps = 4;
    double symbol_period = 1.0 / 1760.0;
    double rolloff = 0.8;
    double pathloss = 1.0;
    bool on_grid = true;
};

/// A drawn geometric channel: L paths and the N_c derived delay-tap matrices
/// H_d (N_r x N_t), with H_d = scale * sum_l gain_l q_l[d] a_R(aoa_l) a_T*(aod_l)
/// where q_l is the path's unit-l2 sampled pulse profile.
struct ChannelRealization {
    std::vector<PathParams> paths;
    std::vector<Eigen::MatrixXcd> taps; // N_c matrices, N_r x N_t
    int num_taps = 0;
    double symbol_period = 0.0;
    double pathloss = 1.0;
    double scale = 1.0; // sqrt(N_t N_r / (L rho_L))
    double rolloff = 0.0;
    bool on_grid = false;
};

/// Samples of the pulse-shaping filter at tap offsets d·ts - delay,
/// d = 0..num_taps-1, normalized to unit l2 norm.
Eigen::VectorXd path_tap_profile(double delay, int num_taps, double ts,
                                 double rolloff);

/// Draw L i.i.d. paths (delays uniform on [0,(N_c-1)Ts], angles uniform on
/// [0,pi) or snapped to the dictionary grids without replacement, gains
/// CN(0,1)) and assemble the tap matrices. `dict` is required in on-grid mode.
ChannelRealization draw_channel(const ChannelConfig& cfg,
                                const DictionaryPair* dict, Rng& rng);

/// Frequency response at subcarrier k of a K-point OFDM grid:
/// H[k] = sum_d H_d exp(-j 2 pi k d / K).
Eigen::MatrixXcd freq_response(const ChannelRealization& ch, int k, int fft_size);

/// Exact on-grid sparse representation h_v[k] = vec(Delta[k]) of length
/// G_t·G_r such that (conj(A~_T) kron A~_R) h_v[k] = vec(H[k]). Colliding
/// (aoa, aod) grid pairs are merged by complex addition.
Eigen::VectorXcd true_sparse_vector(const ChannelRealization& ch,
                                    const DictionaryPair& dict, int k,
                                    int fft_size);

/// Sorted union of the per-tap supports (= supp(h_v[k]) for every k),
/// as linear indices aod_idx * G_r + aoa_idx with collisions merged.
std::vector<Eigen::Index> true_support(const ChannelRealization& ch,
                                       const DictionaryPair& dict);

} // namespace mmce

#endif
