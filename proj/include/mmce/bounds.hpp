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

#ifndef MMCE_BOUNDS_HPP
#define MMCE_BOUNDS_HPP

#include <Eigen/Dense>
#include <vector>

#include "mmce/training.hpp"

namespace mmce {

/// Fisher information and Cramer-Rao bounds at a known (true) support. The
/// measurement operator is frequency flat, so the FIM and CRLB are common to
/// all subcarriers; the per-subcarrier gamma values are kept for the
/// energy-normalized bound over the K-subcarrier ensemble.
struct CrlbReport {
    Eigen::MatrixXcd fim;  // L x L Hermitian
    Eigen::MatrixXcd crlb; // fim^{-1}
    Eigen::VectorXd gamma_xi; // per subcarrier: trace(CRLB)
    Eigen::VectorXd gamma_h;  // per subcarrier: trace(KR CRLB KR*)
    double ncrlb = 0.0;       // sum_k gamma_h[k] / sum_k ||H[k]||_F^2
};

/// I(xi) = B* C^{-1} B with C = sigma2 C_w, for explicit measurement-domain
/// columns B (one per path).
Eigen::MatrixXcd fim_from_columns(const MeasurementOperator& op,
                                  const Eigen::MatrixXcd& columns, double sigma2);

/// Same with B = Upsilon_{:,T} for an on-grid support T.
Eigen::MatrixXcd fim(const MeasurementOperator& op,
                     const std::vector<Eigen::Index>& support, double sigma2);

/// Inverse of a Hermitian positive definite FIM.
Eigen::MatrixXcd crlb_from_fim(const Eigen::MatrixXcd& fim_matrix);

/// Overall channel-level estimator variance floor:
/// trace((conj(A_T) khatri-rao A_R) CRLB (conj(A_T) khatri-rao A_R)*), where
/// a_t_cols / a_r_cols hold the per-path steering vectors column-wise.
double gamma_channel(const Eigen::MatrixXcd& crlb,
                     const Eigen::MatrixXcd& a_t_cols,
                     const Eigen::MatrixXcd& a_r_cols);

/// Normalized CRLB over the subcarrier ensemble.
double ncrlb(const Eigen::VectorXd& gamma_h_per_k,
             const std::vector<Eigen::MatrixXcd>& true_channels);

/// Full report from the true per-path steering vectors; works for on- and
/// off-grid channels (the measurement columns are Phi (conj(a_T) kron a_R)).
CrlbReport crlb_report(const MeasurementOperator& op,
                       const Eigen::MatrixXcd& a_t_cols,
                       const Eigen::MatrixXcd& a_r_cols, double sigma2,
                       const std::vector<Eigen::MatrixXcd>& true_channels);

/// Measurement-domain columns Phi (conj(a_T,l) kron a_R,l) for each path.
Eigen::MatrixXcd measurement_columns(const MeasurementOperator& op,
                                     const Eigen::MatrixXcd& a_t_cols,
                                     const Eigen::MatrixXcd& a_r_cols);

} // namespace mmce

#endif
