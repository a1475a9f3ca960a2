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

#include "mmce/recovery.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmce/errors.hpp"

namespace mmce {

namespace {

// Relative slack for the estimated-noise halting rule: stop once an
// iteration improves the weighted MSE by less than this fraction.
constexpr double kEstimatedHaltDelta = 0.05;

void validate_inputs(const std::vector<Eigen::VectorXcd>& y,
                     const MeasurementOperator& op, const RecoveryConfig& cfg) {
    if (y.empty()) {
        throw InvalidConfigError("recovery: no received vectors");
    }
    for (const auto& yk : y) {
        if (yk.size() != op.rows()) {
            throw InvalidDimensionError("recovery: received vector length mismatch");
        }
    }
    if (cfg.max_iters < 1) {
        throw InvalidConfigError("recovery: max_iters must be >= 1");
    }
}

// Hermitian positive definite solve of the WLS normal equations for all
// subcarriers at once. u_cols = D_w^{-*} Upsilon_{:,T}, yw[k] = D_w^{-*} y[k].
Eigen::LLT<Eigen::MatrixXcd> factor_normal_matrix(const Eigen::MatrixXcd& u_cols) {
    Eigen::LLT<Eigen::MatrixXcd> llt(u_cols.adjoint() * u_cols);
    bool singular = llt.info() != Eigen::Success;
    if (!singular) {
        // duplicate or near-duplicate atoms leave a collapsed Cholesky pivot
        const Eigen::VectorXd diag = llt.matrixLLT().diagonal().real();
        singular = diag.minCoeff() <= 1e-7 * diag.maxCoeff();
    }
    if (singular) {
        throw SingularSupportError(
            "wls_gains: support columns are rank deficient in the C_w^{-1} "
            "inner product");
    }
    return llt;
}

std::vector<Eigen::Index> all_subcarriers(int count) {
    std::vector<Eigen::Index> ks(static_cast<std::size_t>(count));
    std::iota(ks.begin(), ks.end(), 0);
    return ks;
}

// Shared SW-OMP iteration: `proj_set` is the subcarrier set driving atom
// selection; refits, residuals and the halting MSE always use all K.
SparseEstimate run_simultaneous(const std::vector<Eigen::VectorXcd>& y,
                                const MeasurementOperator& op,
                                const RecoveryConfig& cfg,
                                const std::vector<Eigen::Index>& proj_set,
                                OpCounts ops_init) {
    const int num_k = static_cast<int>(y.size());
    const Eigen::Index rows = op.rows();
    const Eigen::Index atoms = op.atoms();
    const double ml_r = static_cast<double>(rows);

    std::vector<Eigen::VectorXcd> yw(y.size());
    for (int k = 0; k < num_k; ++k) {
        yw[k] = op.whiten(y[k]);
    }
    std::vector<Eigen::VectorXcd> r(y.begin(), y.end()); // raw residuals

    SparseEstimate est;
    est.ops = ops_init;
    est.supports.resize(1);
    est.gains.assign(y.size(), Eigen::VectorXcd());
    auto& support = est.supports.front();

    std::vector<bool> selected(static_cast<std::size_t>(atoms), false);
    Eigen::MatrixXcd raw_cols(rows, 0); // Upsilon_{:,T}
    Eigen::MatrixXcd u_cols(rows, 0);   // whitened support columns
    Eigen::VectorXd scores(atoms);

    const std::uint64_t mlr64 = static_cast<std::uint64_t>(rows);
    double mse = std::numeric_limits<double>::infinity();

    while (true) {
        // Distributed projection over the selection subcarriers.
        scores.setZero();
        for (Eigen::Index k : proj_set) {
            scores += (op.upsilon_w.adjoint() * r[static_cast<std::size_t>(k)])
                          .cwiseAbs();
        }
        const std::uint64_t j = static_cast<std::uint64_t>(support.size()) + 1;
        est.ops.projection += static_cast<std::uint64_t>(proj_set.size()) *
                              (static_cast<std::uint64_t>(atoms) - (j - 1)) * mlr64;

        Eigen::Index best = -1;
        double best_score = -1.0;
        for (Eigen::Index p = 0; p < atoms; ++p) {
            if (!selected[static_cast<std::size_t>(p)] && scores(p) > best_score) {
                best_score = scores(p);
                best = p;
            }
        }
        if (best < 0) {
            break; // every atom already selected
        }
        selected[static_cast<std::size_t>(best)] = true;
        support.push_back(best);

        raw_cols.conservativeResize(Eigen::NoChange, raw_cols.cols() + 1);
        raw_cols.col(raw_cols.cols() - 1) = op.upsilon.col(best);
        u_cols.conservativeResize(Eigen::NoChange, u_cols.cols() + 1);
        u_cols.col(u_cols.cols() - 1) = op.whiten(op.upsilon.col(best));

        // WLS refit on the current support, all subcarriers.
        const auto llt = factor_normal_matrix(u_cols);
        for (int k = 0; k < num_k; ++k) {
            est.gains[k] = llt.solve(u_cols.adjoint() * yw[k]);
            r[k] = y[k] - raw_cols * est.gains[k];
        }
        est.ops.wls += 2 * j * j * mlr64 + j * j * j +
                       static_cast<std::uint64_t>(num_k) * j * mlr64;
        est.ops.residual += static_cast<std::uint64_t>(num_k) * j * mlr64;

        const double prev_mse = mse;
        mse = 0.0;
        for (int k = 0; k < num_k; ++k) {
            mse += (yw[k] - u_cols * est.gains[k]).squaredNorm();
        }
        mse /= static_cast<double>(num_k) * ml_r;
        est.ops.mse += 2 * static_cast<std::uint64_t>(num_k) * mlr64;

        est.residual_mse_trace.push_back(mse);
        ++est.iterations;

        if (cfg.sigma2_mode == NoiseKnowledge::genie) {
            if (mse <= cfg.epsilon) {
                break;
            }
        } else {
            // The pooled ML variance estimate of the current residual equals
            // the MSE itself, so halt when an iteration stops reducing it by
            // more than the slack.
            if (std::isfinite(prev_mse) && mse > prev_mse / (1.0 + kEstimatedHaltDelta)) {
                break;
            }
        }
        if (est.iterations >= cfg.max_iters ||
            static_cast<Eigen::Index>(support.size()) >= std::min(rows, atoms)) {
            break;
        }
    }

    if (cfg.sigma2_mode == NoiseKnowledge::estimated && !est.residual_mse_trace.empty()) {
        est.sigma2_hat = est.residual_mse_trace.back();
    }
    return est;
}

void prune_by_average_power(SparseEstimate& est, double beta, int num_k) {
    auto& support = est.supports.front();
    const Eigen::Index l_hat = static_cast<Eigen::Index>(support.size());
    if (l_hat == 0) {
        return;
    }
    Eigen::VectorXd p_av = Eigen::VectorXd::Zero(l_hat);
    for (int k = 0; k < num_k; ++k) {
        p_av += est.gains[static_cast<std::size_t>(k)].cwiseAbs2();
    }
    p_av /= static_cast<double>(num_k);
    const double p_star = p_av.maxCoeff();
    est.ops.other += static_cast<std::uint64_t>(num_k) * static_cast<std::uint64_t>(l_hat);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < l_hat; ++i) {
        if (p_av(i) >= beta * p_star) {
            keep.push_back(i);
        }
    }
    if (static_cast<Eigen::Index>(keep.size()) == l_hat) {
        return;
    }
    std::vector<Eigen::Index> new_support;
    new_support.reserve(keep.size());
    for (Eigen::Index i : keep) {
        new_support.push_back(support[static_cast<std::size_t>(i)]);
    }
    support = std::move(new_support);
    for (auto& g : est.gains) {
        Eigen::VectorXcd pruned(static_cast<Eigen::Index>(keep.size()));
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(keep.size()); ++i) {
            pruned(i) = g(keep[static_cast<std::size_t>(i)]);
        }
        g = std::move(pruned);
    }
}

} // namespace

Eigen::VectorXcd wls_gains(const MeasurementOperator& op,
                           const std::vector<Eigen::Index>& support,
                           const Eigen::VectorXcd& y) {
    if (support.empty()) {
        throw InvalidConfigError("wls_gains: empty support");
    }
    if (y.size() != op.rows()) {
        throw InvalidDimensionError("wls_gains: vector length mismatch");
    }
    Eigen::MatrixXcd cols(op.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = op.upsilon.col(support[i]);
    }
    const Eigen::MatrixXcd u = op.whiten_cols(cols);
    const auto llt = factor_normal_matrix(u);
    return llt.solve(u.adjoint() * op.whiten(y));
}

SparseEstimate swomp(const std::vector<Eigen::VectorXcd>& y,
                     const MeasurementOperator& op, const RecoveryConfig& cfg) {
    validate_inputs(y, op, cfg);
    SparseEstimate est = run_simultaneous(y, op, cfg,
                                          all_subcarriers(static_cast<int>(y.size())),
                                          OpCounts{});
    est.channel = reconstruct_channel(op, est);
    return est;
}

SparseEstimate ss_swomp_th(const std::vector<Eigen::VectorXcd>& y,
                           const MeasurementOperator& op,
                           const RecoveryConfig& cfg) {
    validate_inputs(y, op, cfg);
    const int num_k = static_cast<int>(y.size());
    if (cfg.k_p < 1 || cfg.k_p > num_k) {
        throw InvalidConfigError("ss_swomp_th: k_p must be in [1, K]");
    }
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
        throw InvalidConfigError("ss_swomp_th: beta must be in (0, 1)");
    }

    // The k_p strongest subcarriers by l2 norm; ties resolve to the lower index.
    std::vector<Eigen::Index> order = all_subcarriers(num_k);
    std::vector<double> energy(static_cast<std::size_t>(num_k));
    for (int k = 0; k < num_k; ++k) {
        energy[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(k)].squaredNorm();
    }
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return energy[static_cast<std::size_t>(a)] > energy[static_cast<std::size_t>(b)];
    });
    std::vector<Eigen::Index> proj_set(order.begin(), order.begin() + cfg.k_p);
    std::sort(proj_set.begin(), proj_set.end());

    OpCounts ops_init;
    ops_init.other += static_cast<std::uint64_t>(num_k) *
                      static_cast<std::uint64_t>(op.rows());

    SparseEstimate est = run_simultaneous(y, op, cfg, proj_set, ops_init);
    prune_by_average_power(est, cfg.beta, num_k);
    est.channel = reconstruct_channel(op, est);
    return est;
}

SparseEstimate omp_per_subcarrier(const std::vector<Eigen::VectorXcd>& y,
                                  const MeasurementOperator& op,
                                  const RecoveryConfig& cfg) {
    validate_inputs(y, op, cfg);
    const int num_k = static_cast<int>(y.size());
    const Eigen::Index rows = op.rows();
    const Eigen::Index atoms = op.atoms();
    const double ml_r = static_cast<double>(rows);
    const std::uint64_t mlr64 = static_cast<std::uint64_t>(rows);

    SparseEstimate est;
    est.supports.resize(static_cast<std::size_t>(num_k));
    est.gains.resize(static_cast<std::size_t>(num_k));
    est.per_subcarrier_mse_trace.resize(static_cast<std::size_t>(num_k));

    for (int k = 0; k < num_k; ++k) {
        const auto& yk = y[static_cast<std::size_t>(k)];
        Eigen::VectorXcd r = yk;
        auto& support = est.supports[static_cast<std::size_t>(k)];
        auto& trace = est.per_subcarrier_mse_trace[static_cast<std::size_t>(k)];
        std::vector<bool> selected(static_cast<std::size_t>(atoms), false);
        Eigen::MatrixXcd cols(rows, 0);
        Eigen::VectorXcd gains;
        double mse = std::numeric_limits<double>::infinity();
        int iters = 0;

        while (true) {
            const Eigen::VectorXd scores = (op.upsilon.adjoint() * r).cwiseAbs();
            const std::uint64_t j = static_cast<std::uint64_t>(support.size()) + 1;
            est.ops.projection +=
                (static_cast<std::uint64_t>(atoms) - (j - 1)) * mlr64;

            Eigen::Index best = -1;
            double best_score = -1.0;
            for (Eigen::Index p = 0; p < atoms; ++p) {
                if (!selected[static_cast<std::size_t>(p)] && scores(p) > best_score) {
                    best_score = scores(p);
                    best = p;
                }
            }
            if (best < 0) {
                break;
            }
            selected[static_cast<std::size_t>(best)] = true;
            support.push_back(best);
            cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
            cols.col(cols.cols() - 1) = op.upsilon.col(best);

            // Unweighted LS refit.
            Eigen::LLT<Eigen::MatrixXcd> llt(cols.adjoint() * cols);
            if (llt.info() != Eigen::Success) {
                throw SingularSupportError(
                    "omp_per_subcarrier: rank-deficient support columns");
            }
            gains = llt.solve(cols.adjoint() * yk);
            r = yk - cols * gains;
            est.ops.wls += 2 * j * j * mlr64 + j * j * j;
            est.ops.residual += j * mlr64;

            const double prev_mse = mse;
            mse = r.squaredNorm() / ml_r;
            est.ops.mse += mlr64;
            trace.push_back(mse);
            ++iters;

            if (cfg.sigma2_mode == NoiseKnowledge::genie) {
                if (mse <= cfg.epsilon) {
                    break;
                }
            } else if (std::isfinite(prev_mse) &&
                       mse > prev_mse / (1.0 + kEstimatedHaltDelta)) {
                break;
            }
            if (iters >= cfg.max_iters ||
                static_cast<Eigen::Index>(support.size()) >= std::min(rows, atoms)) {
                break;
            }
        }
        est.gains[static_cast<std::size_t>(k)] = gains;
        est.iterations += iters;
    }
    est.channel = reconstruct_channel(op, est);
    return est;
}

Sigma2Estimate estimate_sigma2(const MeasurementOperator& op,
                               const std::vector<Eigen::Index>& support,
                               const std::vector<Eigen::VectorXcd>& y) {
    if (support.empty()) {
        throw InvalidConfigError("estimate_sigma2: empty support");
    }
    if (y.empty()) {
        throw InvalidConfigError("estimate_sigma2: no received vectors");
    }
    Eigen::MatrixXcd cols(op.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = op.upsilon.col(support[i]);
    }
    const Eigen::MatrixXcd u = op.whiten_cols(cols);
    const auto llt = factor_normal_matrix(u);

    Sigma2Estimate out;
    out.per_subcarrier.resize(static_cast<Eigen::Index>(y.size()));
    for (std::size_t k = 0; k < y.size(); ++k) {
        const Eigen::VectorXcd yw = op.whiten(y[k]);
        const Eigen::VectorXcd xi = llt.solve(u.adjoint() * yw);
        out.per_subcarrier(static_cast<Eigen::Index>(k)) =
            (yw - u * xi).squaredNorm() / static_cast<double>(op.rows());
    }
    out.pooled = out.per_subcarrier.mean();
    return out;
}

std::vector<Eigen::MatrixXcd> reconstruct_channel(const MeasurementOperator& op,
                                                  const SparseEstimate& estimate) {
    std::vector<Eigen::MatrixXcd> channel(estimate.gains.size());
    for (std::size_t k = 0; k < estimate.gains.size(); ++k) {
        const auto& support = estimate.support_for(static_cast<int>(k));
        const auto& g = estimate.gains[k];
        if (static_cast<std::size_t>(g.size()) != support.size()) {
            throw InvalidDimensionError("reconstruct_channel: gain/support mismatch");
        }
        Eigen::VectorXcd vec_h =
            Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.num_tx) * op.num_rx);
        for (std::size_t i = 0; i < support.size(); ++i) {
            vec_h += g(static_cast<Eigen::Index>(i)) * op.psi().col(support[i]);
        }
        channel[k] = Eigen::Map<const Eigen::MatrixXcd>(vec_h.data(), op.num_rx,
                                                        op.num_tx);
    }
    return channel;
}

} // namespace mmce
