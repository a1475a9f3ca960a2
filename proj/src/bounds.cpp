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

#include "mmce/bounds.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "mmce/errors.hpp"

namespace mmce {

Eigen::MatrixXcd fim_from_columns(const MeasurementOperator& op,
                                  const Eigen::MatrixXcd& columns, double sigma2) {
    if (columns.rows() != op.rows()) {
        throw InvalidDimensionError("fim_from_columns: column length mismatch");
    }
    if (sigma2 <= 0.0) {
        throw InvalidConfigError("fim_from_columns: sigma2 must be positive");
    }
    const Eigen::MatrixXcd u = op.whiten_cols(columns);
    Eigen::MatrixXcd info = (u.adjoint() * u) / sigma2;
    Eigen::LLT<Eigen::MatrixXcd> llt(info);
    if (llt.info() != Eigen::Success) {
        throw DegenerateSupportError("fim: information matrix is not positive definite");
    }
    return info;
}

Eigen::MatrixXcd fim(const MeasurementOperator& op,
                     const std::vector<Eigen::Index>& support, double sigma2) {
    if (support.empty()) {
        throw InvalidConfigError("fim: empty support");
    }
    Eigen::MatrixXcd cols(op.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = op.upsilon.col(support[i]);
    }
    return fim_from_columns(op, cols, sigma2);
}

Eigen::MatrixXcd crlb_from_fim(const Eigen::MatrixXcd& fim_matrix) {
    Eigen::LLT<Eigen::MatrixXcd> llt(fim_matrix);
    if (llt.info() != Eigen::Success) {
        throw DegenerateSupportError("crlb: information matrix is not positive definite");
    }
    return llt.solve(
        Eigen::MatrixXcd::Identity(fim_matrix.rows(), fim_matrix.cols()));
}

double gamma_channel(const Eigen::MatrixXcd& crlb,
                     const Eigen::MatrixXcd& a_t_cols,
                     const Eigen::MatrixXcd& a_r_cols) {
    if (a_t_cols.cols() != crlb.rows() || a_r_cols.cols() != crlb.rows()) {
        throw InvalidDimensionError("gamma_channel: column count mismatch");
    }
    // The Khatri-Rao Gram factors into the elementwise product of the two
    // small Grams: (conj(a_i) kron b_i)* (conj(a_j) kron b_j)
    //            = conj(a_i* a_j) (b_i* b_j).
    const Eigen::MatrixXcd gram_t = a_t_cols.adjoint() * a_t_cols;
    const Eigen::MatrixXcd gram_r = a_r_cols.adjoint() * a_r_cols;
    const Eigen::MatrixXcd kr_gram = gram_t.conjugate().cwiseProduct(gram_r);
    return (crlb * kr_gram).trace().real();
}

double ncrlb(const Eigen::VectorXd& gamma_h_per_k,
             const std::vector<Eigen::MatrixXcd>& true_channels) {
    if (static_cast<std::size_t>(gamma_h_per_k.size()) != true_channels.size()) {
        throw InvalidDimensionError("ncrlb: per-subcarrier size mismatch");
    }
    double energy = 0.0;
    for (const auto& h : true_channels) {
        energy += h.squaredNorm();
    }
    if (energy <= 0.0) {
        throw UndefinedMetricError("ncrlb: zero-energy channel");
    }
    return gamma_h_per_k.sum() / energy;
}

Eigen::MatrixXcd measurement_columns(const MeasurementOperator& op,
                                     const Eigen::MatrixXcd& a_t_cols,
                                     const Eigen::MatrixXcd& a_r_cols) {
    const Eigen::Index num_paths = a_t_cols.cols();
    if (a_r_cols.cols() != num_paths) {
        throw InvalidDimensionError("measurement_columns: path count mismatch");
    }
    Eigen::MatrixXcd cols(op.rows(), num_paths);
    Eigen::VectorXcd kron_col(static_cast<Eigen::Index>(op.num_tx) * op.num_rx);
    for (Eigen::Index l = 0; l < num_paths; ++l) {
        for (int it = 0; it < op.num_tx; ++it) {
            kron_col.segment(static_cast<Eigen::Index>(it) * op.num_rx, op.num_rx) =
                std::conj(a_t_cols(it, l)) * a_r_cols.col(l);
        }
        cols.col(l) = op.phi * kron_col;
    }
    return cols;
}

CrlbReport crlb_report(const MeasurementOperator& op,
                       const Eigen::MatrixXcd& a_t_cols,
                       const Eigen::MatrixXcd& a_r_cols, double sigma2,
                       const std::vector<Eigen::MatrixXcd>& true_channels) {
    CrlbReport report;
    const Eigen::MatrixXcd cols = measurement_columns(op, a_t_cols, a_r_cols);
    report.fim = fim_from_columns(op, cols, sigma2);
    report.crlb = crlb_from_fim(report.fim);
    const double g_xi = report.crlb.trace().real();
    const double g_h = gamma_channel(report.crlb, a_t_cols, a_r_cols);
    const Eigen::Index num_k = static_cast<Eigen::Index>(true_channels.size());
    report.gamma_xi = Eigen::VectorXd::Constant(num_k, g_xi);
    report.gamma_h = Eigen::VectorXd::Constant(num_k, g_h);
    report.ncrlb = ncrlb(report.gamma_h, true_channels);
    return report;
}

} // namespace mmce
