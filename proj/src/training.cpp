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

#include "mmce/training.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "mmce/errors.hpp"

namespace mmce {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> quantized_phase_entry(double magnitude, int quant_bits,
                                           Rng& rng) {
    const std::uint64_t levels = 1ULL << quant_bits;
    const auto q = rng.uniform_index(levels);
    return std::polar(magnitude, 2.0 * kPi * static_cast<double>(q) /
                                     static_cast<double>(levels));
}

} // namespace

TrainingEnsemble draw_training(Rng& rng, int num_frames, int n_t, int n_r,
                               int l_r, int quant_bits, int num_subcarriers) {
    if (num_frames < 1) {
        throw InvalidConfigError("draw_training: need at least one frame");
    }
    if (quant_bits < 1) {
        throw InvalidConfigError("draw_training: need at least one quantization bit");
    }
    if (n_t < 1 || n_r < 1 || l_r < 1) {
        throw InvalidDimensionError("draw_training: dimensions must be >= 1");
    }
    if (l_r > n_r) {
        throw InvalidDimensionError(
            "draw_training: more RF chains than receive antennas");
    }

    TrainingEnsemble tr;
    tr.num_frames = num_frames;
    tr.quant_bits = quant_bits;
    tr.frames.resize(num_frames);
    const double f_mag = 1.0 / std::sqrt(static_cast<double>(n_t));
    const double w_mag = 1.0 / std::sqrt(static_cast<double>(n_r));
    for (auto& frame : tr.frames) {
        frame.precoder.resize(n_t);
        for (int i = 0; i < n_t; ++i) {
            frame.precoder(i) = quantized_phase_entry(f_mag, quant_bits, rng);
        }
        frame.combiner.resize(n_r, l_r);
        for (int c = 0; c < l_r; ++c) {
            for (int r = 0; r < n_r; ++r) {
                frame.combiner(r, c) = quantized_phase_entry(w_mag, quant_bits, rng);
            }
        }
    }
    tr.symbols.resize(num_frames, num_subcarriers);
    for (int m = 0; m < num_frames; ++m) {
        for (int k = 0; k < num_subcarriers; ++k) {
            const auto q = rng.uniform_index(4);
            tr.symbols(m, k) =
                std::polar(1.0, kPi / 4.0 + static_cast<double>(q) * kPi / 2.0);
        }
    }
    return tr;
}

Eigen::VectorXcd MeasurementOperator::whiten(const Eigen::VectorXcd& v) const {
    if (v.size() != rows()) {
        throw InvalidDimensionError("whiten: vector length mismatch");
    }
    Eigen::VectorXcd out(v.size());
    for (int m = 0; m < num_frames; ++m) {
        out.segment(static_cast<Eigen::Index>(m) * num_rf_chains, num_rf_chains) =
            dw_blocks[m].triangularView<Eigen::Upper>().adjoint().solve(
                v.segment(static_cast<Eigen::Index>(m) * num_rf_chains, num_rf_chains));
    }
    return out;
}

Eigen::MatrixXcd MeasurementOperator::whiten_cols(const Eigen::MatrixXcd& m_in) const {
    if (m_in.rows() != rows()) {
        throw InvalidDimensionError("whiten_cols: row count mismatch");
    }
    Eigen::MatrixXcd out(m_in.rows(), m_in.cols());
    for (int m = 0; m < num_frames; ++m) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(m) * num_rf_chains;
        out.middleRows(r0, num_rf_chains) =
            dw_blocks[m].triangularView<Eigen::Upper>().adjoint().solve(
                m_in.middleRows(r0, num_rf_chains));
    }
    return out;
}

std::shared_ptr<const Eigen::MatrixXcd> build_psi(const DictionaryPair& dict) {
    const Eigen::Index n_t = dict.a_tilde_t.rows();
    const Eigen::Index n_r = dict.a_tilde_r.rows();
    const Eigen::Index g_t = dict.num_tx_points();
    const Eigen::Index g_r = dict.num_rx_points();
    auto psi = std::make_shared<Eigen::MatrixXcd>(n_t * n_r, g_t * g_r);
    for (Eigen::Index t = 0; t < g_t; ++t) {
        for (Eigen::Index it = 0; it < n_t; ++it) {
            psi->block(it * n_r, t * g_r, n_r, g_r) =
                std::conj(dict.a_tilde_t(it, t)) * dict.a_tilde_r;
        }
    }
    return psi;
}

MeasurementOperator build_operator(const TrainingEnsemble& tr,
                                   const DictionaryPair& dict) {
    return build_operator(tr, dict, build_psi(dict));
}

MeasurementOperator build_operator(const TrainingEnsemble& tr,
                                   const DictionaryPair& dict,
                                   std::shared_ptr<const Eigen::MatrixXcd> psi) {
    if (tr.frames.empty()) {
        throw InvalidConfigError("build_operator: empty training ensemble");
    }
    MeasurementOperator op;
    op.num_frames = tr.num_frames;
    op.num_tx = static_cast<int>(tr.frames[0].precoder.size());
    op.num_rx = static_cast<int>(tr.frames[0].combiner.rows());
    op.num_rf_chains = static_cast<int>(tr.frames[0].combiner.cols());
    op.grid_tx = dict.num_tx_points();
    op.grid_rx = dict.num_rx_points();
    if (dict.a_tilde_t.rows() != op.num_tx || dict.a_tilde_r.rows() != op.num_rx) {
        throw InvalidDimensionError("build_operator: dictionary/training mismatch");
    }
    if (psi->rows() != static_cast<Eigen::Index>(op.num_tx) * op.num_rx ||
        psi->cols() != op.atoms()) {
        throw InvalidDimensionError("build_operator: Psi dimension mismatch");
    }
    op.psi_ptr = std::move(psi);

    const Eigen::Index l_r = op.num_rf_chains;
    const Eigen::Index n_t = op.num_tx;
    const Eigen::Index n_r = op.num_rx;

    op.phi.resize(op.rows(), n_t * n_r);
    op.upsilon.resize(op.rows(), op.atoms());
    op.cw_blocks.resize(op.num_frames);
    op.dw_blocks.resize(op.num_frames);

    for (int m = 0; m < op.num_frames; ++m) {
        const auto& f = tr.frames[m].precoder;
        const Eigen::MatrixXcd w_adj = tr.frames[m].combiner.adjoint(); // L_r x N_r
        const Eigen::Index r0 = static_cast<Eigen::Index>(m) * l_r;

        // Phi^(m) = f^T kron W*
        for (Eigen::Index it = 0; it < n_t; ++it) {
            op.phi.block(r0, it * n_r, l_r, n_r) = f(it) * w_adj;
        }

        // Upsilon^(m) = (f^T conj(A~_T)) kron (W* A~_R)
        const Eigen::VectorXcd vt = dict.a_tilde_t.adjoint() * f; // entries f^T conj(a~_t)
        const Eigen::MatrixXcd wb = w_adj * dict.a_tilde_r;       // L_r x G_r
        for (Eigen::Index t = 0; t < op.grid_tx; ++t) {
            op.upsilon.block(r0, t * op.grid_rx, l_r, op.grid_rx) = vt(t) * wb;
        }

        // Gram block and its Cholesky factor, with one jitter retry.
        Eigen::MatrixXcd cw = tr.frames[m].combiner.adjoint() * tr.frames[m].combiner;
        Eigen::LLT<Eigen::MatrixXcd> llt(cw);
        if (llt.info() != Eigen::Success) {
            const double jitter = 1e-12 * cw.real().trace() / static_cast<double>(l_r);
            cw += jitter * Eigen::MatrixXcd::Identity(l_r, l_r);
            llt.compute(cw);
            if (llt.info() != Eigen::Success) {
                throw IllConditionedCombinerError(
                    "build_operator: combiner Gram block not positive definite");
            }
        }
        op.cw_blocks[m] = cw;
        op.dw_blocks[m] = llt.matrixL().adjoint(); // upper factor, C_w = D_w^* D_w
    }

    op.noise_coupling = Eigen::MatrixXcd::Zero(op.rows(), op.rows());
    op.chol = Eigen::MatrixXcd::Zero(op.rows(), op.rows());
    for (int m = 0; m < op.num_frames; ++m) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(m) * l_r;
        op.noise_coupling.block(r0, r0, l_r, l_r) = op.cw_blocks[m];
        op.chol.block(r0, r0, l_r, l_r) = op.dw_blocks[m];
    }

    // Upsilon_w = D_w^{-1} Upsilon, blockwise.
    op.upsilon_w.resize(op.rows(), op.atoms());
    for (int m = 0; m < op.num_frames; ++m) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(m) * l_r;
        op.upsilon_w.middleRows(r0, l_r) =
            op.dw_blocks[m].triangularView<Eigen::Upper>().solve(
                op.upsilon.middleRows(r0, l_r));
    }
    return op;
}

ReceivedEnsemble synthesize_received(const ChannelRealization& ch,
                                     const TrainingEnsemble& tr,
                                     const MeasurementOperator& op,
                                     double sigma2, Rng& rng,
                                     int num_subcarriers) {
    if (sigma2 < 0.0) {
        throw InvalidConfigError("synthesize_received: sigma2 must be >= 0");
    }
    const int l_r = op.num_rf_chains;
    const double noise_scale = std::sqrt(sigma2);

    ReceivedEnsemble rcv;
    rcv.sigma2_true = sigma2;
    rcv.y.resize(num_subcarriers);
    Eigen::VectorXcd n_unit(op.num_rx);
    for (int k = 0; k < num_subcarriers; ++k) {
        const Eigen::MatrixXcd h_k = freq_response(ch, k, num_subcarriers);
        Eigen::VectorXcd yk(op.rows());
        for (int m = 0; m < op.num_frames; ++m) {
            for (int i = 0; i < op.num_rx; ++i) {
                n_unit(i) = rng.complex_normal();
            }
            // Symbol compensation is exact for unit-modulus QPSK, so the
            // compensated frame is W* H f + W* n with n in the compensated domain.
            yk.segment(static_cast<Eigen::Index>(m) * l_r, l_r) =
                tr.frames[m].combiner.adjoint() *
                (h_k * tr.frames[m].precoder + noise_scale * n_unit);
        }
        rcv.y[k] = std::move(yk);
    }
    return rcv;
}

Eigen::VectorXcd whiten(const MeasurementOperator& op, const Eigen::VectorXcd& v) {
    return op.whiten(v);
}

} // namespace mmce
