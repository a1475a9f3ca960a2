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

#ifndef MMCE_TRAINING_HPP
#define MMCE_TRAINING_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "mmce/channel.hpp"
#include "mmce/rng.hpp"

namespace mmce {

struct TrainingFrame {
    Eigen::VectorXcd precoder; // f_tr, N_t entries of squared modulus 1/N_t
    Eigen::MatrixXcd combiner; // W_tr, N_r x L_r, entries of squared modulus 1/N_r
};

/// M frames of quantized-phase analog training precoders/combiners plus the
/// per-frame, per-subcarrier QPSK training symbols.
struct TrainingEnsemble {
    std::vector<TrainingFrame> frames;
    Eigen::MatrixXcd symbols; // M x K, unit modulus
    int num_frames = 0;
    int quant_bits = 0;
};

/// Draw M i.i.d. frames; every phase lies on the 2^quant_bits-point grid
/// {2 pi q / 2^quant_bits}.
TrainingEnsemble draw_training(Rng& rng, int num_frames, int n_t, int n_r,
                               int l_r, int quant_bits, int num_subcarriers);

/// The stacked measurement operator for one training ensemble:
///   Phi   (M L_r x N_t N_r), row block m = f_tr^(m)T kron W_tr^(m)*,
///   Psi   (N_t N_r x G_t G_r) = conj(A~_T) kron A~_R (shared across trials),
///   Upsilon = Phi Psi and its whitened form Upsilon_w = D_w^{-1} Upsilon,
///   C_w   = blkdiag(W^(m)* W^(m)) with Cholesky C_w = D_w^* D_w (D_w upper).
class MeasurementOperator {
  public:
    Eigen::MatrixXcd phi;
    std::shared_ptr<const Eigen::MatrixXcd> psi_ptr;
    Eigen::MatrixXcd upsilon;
    Eigen::MatrixXcd upsilon_w;
    Eigen::MatrixXcd noise_coupling; // dense C_w
    Eigen::MatrixXcd chol;           // dense D_w (upper triangular)
    std::vector<Eigen::MatrixXcd> cw_blocks; // M blocks, L_r x L_r
    std::vector<Eigen::MatrixXcd> dw_blocks; // M upper-triangular factors

    int num_frames = 0;
    int num_rf_chains = 0; // L_r
    int num_tx = 0;
    int num_rx = 0;
    Eigen::Index grid_tx = 0;
    Eigen::Index grid_rx = 0;

    Eigen::Index rows() const { return static_cast<Eigen::Index>(num_frames) * num_rf_chains; }
    Eigen::Index atoms() const { return grid_tx * grid_rx; }
    const Eigen::MatrixXcd& psi() const { return *psi_ptr; }

    /// Noise-isotropizing transform D_w^{-*} v, applied blockwise by
    /// triangular solves (never forms an inverse). cov(whiten(n_c)) = sigma^2 I.
    Eigen::VectorXcd whiten(const Eigen::VectorXcd& v) const;

    /// whiten() applied to each column.
    Eigen::MatrixXcd whiten_cols(const Eigen::MatrixXcd& m) const;
};

MeasurementOperator build_operator(const TrainingEnsemble& tr,
                                   const DictionaryPair& dict);

/// Same, reusing a prebuilt Psi (it only depends on the dictionary, so
/// parallel trials share one copy).
MeasurementOperator build_operator(const TrainingEnsemble& tr,
                                   const DictionaryPair& dict,
                                   std::shared_ptr<const Eigen::MatrixXcd> psi);

/// Kronecker dictionary Psi = conj(A~_T) kron A~_R.
std::shared_ptr<const Eigen::MatrixXcd> build_psi(const DictionaryPair& dict);

/// Symbol-compensated stacked observations, one length-M·L_r vector per
/// subcarrier: y[k] = Phi vec(H[k]) + blkdiag(W^(m)*) n[k], n ~ CN(0, sigma2 I).
struct ReceivedEnsemble {
    std::vector<Eigen::VectorXcd> y;
    double sigma2_true = 0.0;
};

ReceivedEnsemble synthesize_received(const ChannelRealization& ch,
                                     const TrainingEnsemble& tr,
                                     const MeasurementOperator& op,
                                     double sigma2, Rng& rng,
                                     int num_subcarriers);

/// Free-function form of MeasurementOperator::whiten.
Eigen::VectorXcd whiten(const MeasurementOperator& op, const Eigen::VectorXcd& v);

} // namespace mmce

#endif
