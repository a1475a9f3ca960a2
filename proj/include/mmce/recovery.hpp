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

#ifndef MMCE_RECOVERY_HPP
#define MMCE_RECOVERY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mmce/training.hpp"

namespace mmce {

enum class NoiseKnowledge { genie, estimated };

struct RecoveryConfig {
    double epsilon = 0.0;   // halting MSE threshold (genie mode: noise variance)
    int max_iters = 1;      // iteration cap
    int k_p = 1;            // subcarrier subset size (SS variant)
    double beta = 0.025;    // threshold fraction in (0, 1)
    NoiseKnowledge sigma2_mode = NoiseKnowledge::genie;
};

/// Complex multiply-accumulate counts per pipeline stage, following the
/// per-iteration cost rows of the algorithms' complexity accounting.
struct OpCounts {
    std::uint64_t projection = 0;
    std::uint64_t wls = 0;
    std::uint64_t residual = 0;
    std::uint64_t mse = 0;
    std::uint64_t other = 0;

    std::uint64_t total() const { return projection + wls + residual + mse + other; }
    OpCounts& operator+=(const OpCounts& o) {
        projection += o.projection;
        wls += o.wls;
        residual += o.residual;
        mse += o.mse;
        other += o.other;
        return *this;
    }
};

/// Result of a sparse recovery run. `supports` holds one entry when the
/// algorithm emits a common support shared by all subcarriers (SW-OMP and
/// SS-SW-OMP+Th) and K entries for the per-subcarrier OMP baseline.
struct SparseEstimate {
    std::vector<std::vector<Eigen::Index>> supports;
    std::vector<Eigen::VectorXcd> gains;    // K vectors, gains[k] matches support_for(k)
    std::vector<Eigen::MatrixXcd> channel;  // K reconstructed N_r x N_t matrices
    int iterations = 0;                     // summed over subcarriers for the baseline
    std::vector<double> residual_mse_trace; // weighted MSE per iteration (common-support)
    std::vector<std::vector<double>> per_subcarrier_mse_trace; // baseline only
    std::optional<double> sigma2_hat;       // filled in estimated mode
    OpCounts ops;

    bool common_support() const { return supports.size() == 1; }
    const std::vector<Eigen::Index>& support() const { return supports.front(); }
    const std::vector<Eigen::Index>& support_for(int k) const {
        return common_support() ? supports.front() : supports[static_cast<std::size_t>(k)];
    }
};

/// MVU/WLS gain estimate on a fixed support:
///   xi[k] = (Y_T* C_w^{-1} Y_T)^{-1} Y_T* C_w^{-1} y,  Y_T = Upsilon_{:,T}.
/// Independent of the noise variance. Throws SingularSupportError when the
/// support columns are rank deficient in the C_w^{-1} inner product.
Eigen::VectorXcd wls_gains(const MeasurementOperator& op,
                           const std::vector<Eigen::Index>& support,
                           const Eigen::VectorXcd& y);

/// Simultaneous weighted OMP: one support shared by all subcarriers, chosen
/// by the whitened distributed projection c[k] = Upsilon* D_w^{-*} r[k] and
/// p* = argmax_p sum_k |c_p[k]| (ties to the lowest index), with WLS refits
/// and the weighted residual MSE (1/(K M L_r)) sum_k r*[k] C_w^{-1} r[k] as
/// the halting statistic.
SparseEstimate swomp(const std::vector<Eigen::VectorXcd>& y,
                     const MeasurementOperator& op, const RecoveryConfig& cfg);

/// Subcarrier-selection SW-OMP + thresholding: projects only over the k_p
/// subcarriers of largest l2 norm while WLS refit, residual update and MSE
/// use all K subcarriers; after halting, atoms whose average gain power
/// falls below beta times the maximum average power are pruned (the common
/// support is preserved across subcarriers).
SparseEstimate ss_swomp_th(const std::vector<Eigen::VectorXcd>& y,
                           const MeasurementOperator& op,
                           const RecoveryConfig& cfg);

/// Per-subcarrier OMP baseline: independent supports, unweighted projections
/// and LS refits, per-subcarrier halting on (1/(M L_r)) ||r[k]||^2.
SparseEstimate omp_per_subcarrier(const std::vector<Eigen::VectorXcd>& y,
                                  const MeasurementOperator& op,
                                  const RecoveryConfig& cfg);

struct Sigma2Estimate {
    Eigen::VectorXd per_subcarrier; // sigma2_hat[k]
    double pooled = 0.0;            // BLUE average over subcarriers
};

/// ML noise-variance estimate on a fixed support:
///   sigma2[k] = (1/(M L_r)) (y[k]-Y_T xi[k])* C_w^{-1} (y[k]-Y_T xi[k]),
/// pooled as the arithmetic mean over subcarriers.
Sigma2Estimate estimate_sigma2(const MeasurementOperator& op,
                               const std::vector<Eigen::Index>& support,
                               const std::vector<Eigen::VectorXcd>& y);

/// vec(H_hat[k]) = Psi_{:,T} xi[k], unvectorized to N_r x N_t.
std::vector<Eigen::MatrixXcd> reconstruct_channel(const MeasurementOperator& op,
                                                  const SparseEstimate& estimate);

} // namespace mmce

#endif
