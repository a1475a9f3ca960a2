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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "mmce/channel.hpp"
#include "mmce/errors.hpp"
#include "mmce/metrics.hpp"
#include "mmce/recovery.hpp"
#include "mmce/training.hpp"
#include "test_helpers.hpp"

using namespace mmce;
using mmce_test::rel_err;

namespace {

struct Setup {
    DictionaryPair dict;
    ChannelRealization ch;
    TrainingEnsemble tr;
    MeasurementOperator op;
    std::vector<Eigen::MatrixXcd> h_true;
    std::vector<Eigen::VectorXcd> y;
    int fft_size = 0;
};

Setup make_setup(std::uint64_t seed, int n_t, int n_r, int l_r, int frames,
                 int g, int fft_size, int paths, int taps, double sigma2,
                 bool orthonormal = false) {
    Setup s;
    s.fft_size = fft_size;
    Rng rng(seed);
    s.dict = build_dictionary(n_t, n_r, g, g);
    ChannelConfig cfg;
    cfg.num_tx = n_t;
    cfg.num_rx = n_r;
    cfg.num_paths = paths;
    cfg.num_taps = taps;
    cfg.on_grid = true;
    s.ch = draw_channel(cfg, &s.dict, rng);
    s.tr = orthonormal
               ? mmce_test::make_orthonormal_training(rng, frames, n_t, n_r, l_r,
                                                      fft_size)
               : draw_training(rng, frames, n_t, n_r, l_r, 2, fft_size);
    s.op = build_operator(s.tr, s.dict);
    const auto rcv = synthesize_received(s.ch, s.tr, s.op, sigma2, rng, fft_size);
    s.y = rcv.y;
    s.h_true.resize(fft_size);
    for (int k = 0; k < fft_size; ++k) {
        s.h_true[k] = freq_response(s.ch, k, fft_size);
    }
    return s;
}

// Plain simultaneous OMP without any noise-statistics weighting; reference
// for the C_w = I degeneracy check.
std::vector<Eigen::Index> plain_somp_support(const std::vector<Eigen::VectorXcd>& y,
                                             const Eigen::MatrixXcd& upsilon,
                                             int iters) {
    std::vector<Eigen::Index> support;
    std::vector<Eigen::VectorXcd> r(y.begin(), y.end());
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd scores = Eigen::VectorXd::Zero(upsilon.cols());
        for (const auto& rk : r) {
            scores += (upsilon.adjoint() * rk).cwiseAbs();
        }
        for (Eigen::Index p : support) {
            scores(p) = -1.0;
        }
        Eigen::Index best = 0;
        scores.maxCoeff(&best);
        support.push_back(best);
        Eigen::MatrixXcd cols(upsilon.rows(), static_cast<Eigen::Index>(support.size()));
        for (std::size_t i = 0; i < support.size(); ++i) {
            cols.col(static_cast<Eigen::Index>(i)) = upsilon.col(support[i]);
        }
        const auto qr = cols.colPivHouseholderQr();
        for (std::size_t k = 0; k < y.size(); ++k) {
            r[k] = y[k] - cols * qr.solve(y[k]);
        }
    }
    return support;
}

} // namespace

TEST_CASE("wls_gains equals plain least squares when C_w = I") {
    auto s = make_setup(21, 8, 8, 2, 10, 12, 4, 2, 2, 0.1, /*orthonormal=*/true);
    const std::vector<Eigen::Index> support = true_support(s.ch, s.dict);
    const auto xi = wls_gains(s.op, support, s.y[1]);
    Eigen::MatrixXcd cols(s.op.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = s.op.upsilon.col(support[i]);
    }
    const Eigen::VectorXcd ls = cols.colPivHouseholderQr().solve(s.y[1]);
    CHECK(rel_err(xi, ls) < 1e-10);
}

TEST_CASE("wls_gains recovers the exact gains on noiseless on-grid data") {
    auto s = make_setup(22, 16, 16, 4, 16, 20, 8, 4, 4, 0.0);
    const auto support = true_support(s.ch, s.dict);
    for (int k = 0; k < s.fft_size; ++k) {
        const auto h_v = true_sparse_vector(s.ch, s.dict, k, s.fft_size);
        Eigen::VectorXcd expected(static_cast<Eigen::Index>(support.size()));
        for (std::size_t i = 0; i < support.size(); ++i) {
            expected(static_cast<Eigen::Index>(i)) = h_v(support[i]);
        }
        CHECK(rel_err(wls_gains(s.op, support, s.y[k]), expected) < 1e-10);
    }
}

TEST_CASE("wls_gains matches the dense C_w^{-1} normal equations") {
    auto s = make_setup(23, 8, 8, 3, 8, 12, 2, 3, 2, 0.2);
    const auto support = true_support(s.ch, s.dict);
    const auto xi = wls_gains(s.op, support, s.y[0]);

    Eigen::MatrixXcd cols(s.op.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = s.op.upsilon.col(support[i]);
    }
    const Eigen::MatrixXcd cw_inv = s.op.noise_coupling.inverse();
    const Eigen::VectorXcd ref =
        (cols.adjoint() * cw_inv * cols).inverse() * (cols.adjoint() * cw_inv * s.y[0]);
    CHECK(rel_err(xi, ref) < 1e-9);
}

TEST_CASE("wls_gains is unbiased on the true support") {
    const int n_t = 8, n_r = 8, l_r = 2, frames = 16, fft_size = 1;
    const double sigma2 = 0.25;
    Rng rng(24);
    const auto dict = build_dictionary(n_t, n_r, 12, 12);
    ChannelConfig cfg;
    cfg.num_tx = n_t;
    cfg.num_rx = n_r;
    cfg.num_paths = 3;
    cfg.num_taps = 1;
    cfg.on_grid = true;
    const auto ch = draw_channel(cfg, &dict, rng);
    const auto tr = draw_training(rng, frames, n_t, n_r, l_r, 2, fft_size);
    const auto op = build_operator(tr, dict);
    const auto support = true_support(ch, dict);
    const auto h_v = true_sparse_vector(ch, dict, 0, fft_size);
    Eigen::VectorXcd truth(static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        truth(static_cast<Eigen::Index>(i)) = h_v(support[i]);
    }

    const int draws = 10000;
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(truth.size());
    Eigen::VectorXd second_moment = Eigen::VectorXd::Zero(truth.size());
    Rng nrng(25);
    for (int i = 0; i < draws; ++i) {
        const auto rcv = synthesize_received(ch, tr, op, sigma2, nrng, fft_size);
        const auto xi = wls_gains(op, support, rcv.y[0]);
        mean += xi;
        second_moment += (xi - truth).cwiseAbs2();
    }
    mean /= draws;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const double se = std::sqrt(second_moment(i) / draws / draws);
        CHECK(std::abs(mean(i) - truth(i)) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("wls_gains flags rank-deficient supports") {
    auto s = make_setup(26, 8, 8, 2, 8, 12, 2, 2, 2, 0.1);
    std::vector<Eigen::Index> dup = {5, 5};
    CHECK_THROWS_AS(wls_gains(s.op, dup, s.y[0]), SingularSupportError);
}

TEST_CASE("swomp exactly recovers a noiseless on-grid channel") {
    auto s = make_setup(27, 32, 32, 4, 80, 64, 16, 4, 4, 0.0);
    RecoveryConfig rc;
    rc.epsilon = 1e-12;
    rc.max_iters = 32;
    const auto est = swomp(s.y, s.op, rc);
    const auto truth = true_support(s.ch, s.dict);
    const std::set<Eigen::Index> got(est.support().begin(), est.support().end());
    for (Eigen::Index p : truth) {
        CHECK(got.count(p) == 1);
    }
    CHECK(to_db(nmse(est.channel, s.h_true)) < -100.0);
}

TEST_CASE("swomp picks the true atom first on a noiseless single-path channel") {
    auto s = make_setup(28, 16, 16, 4, 20, 20, 8, 1, 4, 0.0);
    RecoveryConfig rc;
    rc.epsilon = 1e30; // halt after the first iteration
    rc.max_iters = 1;
    const auto est = swomp(s.y, s.op, rc);
    REQUIRE(est.support().size() == 1);

    // brute-force maximum correlation over every atom, built column by column
    const Eigen::MatrixXcd dw_adj = s.op.chol.adjoint();
    std::vector<Eigen::VectorXcd> z(static_cast<std::size_t>(s.fft_size));
    for (int k = 0; k < s.fft_size; ++k) {
        z[static_cast<std::size_t>(k)] =
            dw_adj.triangularView<Eigen::Lower>().solve(s.y[k]);
    }
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(s.op.atoms());
    for (Eigen::Index p = 0; p < s.op.atoms(); ++p) {
        const Eigen::VectorXcd upsilon_p = s.op.phi * s.op.psi().col(p);
        for (int k = 0; k < s.fft_size; ++k) {
            // dot conjugates the left side
            scores(p) += std::abs(upsilon_p.dot(z[static_cast<std::size_t>(k)]));
        }
    }
    Eigen::Index brute = 0;
    scores.maxCoeff(&brute);
    CHECK(est.support()[0] == brute);
    CHECK(brute == true_support(s.ch, s.dict)[0]);
}

TEST_CASE("swomp first pick matches the first-principles argmax under C_w != I") {
    auto s = make_setup(29, 16, 16, 4, 24, 20, 4, 1, 2, 0.05);
    // quantized random combiners: the Gram blocks are far from identity
    CHECK((s.op.noise_coupling -
           Eigen::MatrixXcd::Identity(s.op.rows(), s.op.rows()))
              .norm() > 1.0);
    RecoveryConfig rc;
    rc.epsilon = 1e30;
    rc.max_iters = 1;
    const auto est = swomp(s.y, s.op, rc);

    const Eigen::MatrixXcd dw_adj = s.op.chol.adjoint();
    std::vector<Eigen::VectorXcd> z(static_cast<std::size_t>(s.fft_size));
    for (int k = 0; k < s.fft_size; ++k) {
        z[static_cast<std::size_t>(k)] =
            dw_adj.triangularView<Eigen::Lower>().solve(s.y[k]);
    }
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(s.op.atoms());
    for (Eigen::Index p = 0; p < s.op.atoms(); ++p) {
        const Eigen::VectorXcd upsilon_p = s.op.phi * s.op.psi().col(p);
        for (int k = 0; k < s.fft_size; ++k) {
            scores(p) += std::abs(upsilon_p.dot(z[static_cast<std::size_t>(k)]));
        }
    }
    Eigen::Index brute = 0;
    scores.maxCoeff(&brute);
    CHECK(est.support()[0] == brute);
}

TEST_CASE("swomp residual trace is non-increasing") {
    auto s = make_setup(30, 16, 16, 4, 24, 20, 8, 4, 4, 0.1);
    RecoveryConfig rc;
    rc.epsilon = 1e-12;
    rc.max_iters = 12;
    const auto est = swomp(s.y, s.op, rc);
    REQUIRE(est.residual_mse_trace.size() >= 2);
    for (std::size_t i = 1; i < est.residual_mse_trace.size(); ++i) {
        CHECK(est.residual_mse_trace[i] <=
              est.residual_mse_trace[i - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("with orthonormal combiners swomp degenerates to unweighted S-OMP") {
    auto s = make_setup(31, 16, 16, 4, 16, 20, 4, 3, 2, 0.05, /*orthonormal=*/true);
    RecoveryConfig rc;
    rc.epsilon = 0.0;
    rc.max_iters = 5;
    const auto est = swomp(s.y, s.op, rc);
    const auto ref = plain_somp_support(s.y, s.op.upsilon, 5);
    REQUIRE(est.support().size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(est.support()[i] == ref[i]);
    }
    // gains agree with plain LS on the same support
    Eigen::MatrixXcd cols(s.op.rows(), static_cast<Eigen::Index>(ref.size()));
    for (std::size_t i = 0; i < ref.size(); ++i) {
        cols.col(static_cast<Eigen::Index>(i)) = s.op.upsilon.col(ref[i]);
    }
    for (int k = 0; k < s.fft_size; ++k) {
        const Eigen::VectorXcd ls = cols.colPivHouseholderQr().solve(s.y[k]);
        CHECK(rel_err(est.gains[static_cast<std::size_t>(k)], ls) < 1e-9);
    }
}

TEST_CASE("ss_swomp_th with k_p = K and tiny beta equals swomp") {
    auto s = make_setup(32, 16, 16, 4, 24, 20, 8, 4, 4, 0.1);
    RecoveryConfig rc;
    rc.epsilon = 0.1;
    rc.max_iters = 16;
    rc.k_p = s.fft_size;
    rc.beta = 1e-300;
    const auto a = swomp(s.y, s.op, rc);
    const auto b = ss_swomp_th(s.y, s.op, rc);
    REQUIRE(a.support().size() == b.support().size());
    for (std::size_t i = 0; i < a.support().size(); ++i) {
        CHECK(a.support()[i] == b.support()[i]);
    }
    for (int k = 0; k < s.fft_size; ++k) {
        CHECK((a.gains[k] - b.gains[k]).norm() == 0.0);
    }
}

TEST_CASE("thresholding prunes weak atoms and keeps the support common") {
    // two-atom noiseless channel with a 0.01 power ratio; beta = 0.025 prunes it
    const int n_t = 16, n_r = 16, l_r = 4, frames = 24, fft_size = 4;
    Rng rng(33);
    const auto dict = build_dictionary(n_t, n_r, 20, 20);
    const auto ch = mmce_test::make_grid_channel(
        dict, n_t, n_r,
        {{4, 7, {1.0, 0.0}, 0.0001}, {11, 13, {0.1, 0.0}, 0.0003}},
        4, 1.0 / 1760.0, 0.8);
    const auto tr = draw_training(rng, frames, n_t, n_r, l_r, 2, fft_size);
    const auto op = build_operator(tr, dict);
    const auto rcv = synthesize_received(ch, tr, op, 0.0, rng, fft_size);

    RecoveryConfig rc;
    rc.epsilon = 1e-12;
    rc.max_iters = 8;
    rc.k_p = 2;
    rc.beta = 0.025;
    const auto est = ss_swomp_th(rcv.y, op, rc);
    REQUIRE(est.common_support());
    CHECK(est.support().size() == 1);
    CHECK(est.support()[0] == 7 * 20 + 4); // the strong atom's linear index
    for (int k = 0; k < fft_size; ++k) {
        CHECK(est.gains[static_cast<std::size_t>(k)].size() == 1);
    }

    // with a generous beta both atoms survive
    rc.beta = 0.005;
    const auto est2 = ss_swomp_th(rcv.y, op, rc);
    CHECK(est2.support().size() == 2);
}

TEST_CASE("ss_swomp_th recovers noiseless channels through subcarrier subsets") {
    auto s = make_setup(34, 32, 32, 4, 80, 64, 16, 4, 4, 0.0);
    RecoveryConfig rc;
    rc.epsilon = 1e-12;
    rc.max_iters = 32;
    rc.k_p = 4;
    rc.beta = 1e-300;
    const auto est = ss_swomp_th(s.y, s.op, rc);
    CHECK(to_db(nmse(est.channel, s.h_true)) < -100.0);
}

TEST_CASE("omp_per_subcarrier equals swomp in the K=1 orthonormal degeneracy") {
    auto s = make_setup(35, 16, 16, 4, 16, 20, 1, 3, 1, 0.05, /*orthonormal=*/true);
    RecoveryConfig rc;
    rc.epsilon = 0.05;
    rc.max_iters = 8;
    const auto a = swomp(s.y, s.op, rc);
    const auto b = omp_per_subcarrier(s.y, s.op, rc);
    REQUIRE(a.support().size() == b.support_for(0).size());
    for (std::size_t i = 0; i < a.support().size(); ++i) {
        CHECK(a.support()[i] == b.support_for(0)[i]);
    }
    CHECK(rel_err(a.gains[0], b.gains[0]) < 1e-9);
}

TEST_CASE("omp_per_subcarrier exactly recovers noiseless on-grid data per subcarrier") {
    auto s = make_setup(36, 16, 16, 4, 40, 20, 8, 3, 4, 0.0);
    RecoveryConfig rc;
    rc.epsilon = 1e-12;
    rc.max_iters = 24;
    const auto est = omp_per_subcarrier(s.y, s.op, rc);
    CHECK(!est.common_support());
    CHECK(to_db(nmse(est.channel, s.h_true)) < -100.0);
    for (int k = 0; k < s.fft_size; ++k) {
        const auto& trace = est.per_subcarrier_mse_trace[static_cast<std::size_t>(k)];
        for (std::size_t i = 1; i < trace.size(); ++i) {
            CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("estimate_sigma2 on the true support") {
    auto s = make_setup(37, 16, 16, 4, 24, 20, 8, 3, 4, 0.0);
    const auto support = true_support(s.ch, s.dict);
    const auto noiseless = estimate_sigma2(s.op, support, s.y);
    CHECK(noiseless.pooled < 1e-20);
    CHECK(noiseless.pooled ==
          doctest::Approx(noiseless.per_subcarrier.mean()).epsilon(1e-12));

    // calibration over repeated noise draws at sigma2 = 0.1
    const double sigma2 = 0.1;
    const int trials = 1000;
    const int fft_size = 16;
    Rng rng(38);
    const auto dict = build_dictionary(16, 16, 20, 20);
    ChannelConfig cfg;
    cfg.num_tx = 16;
    cfg.num_rx = 16;
    cfg.num_paths = 3;
    cfg.num_taps = 4;
    cfg.on_grid = true;
    const auto ch = draw_channel(cfg, &dict, rng);
    const auto tr = draw_training(rng, 24, 16, 16, 4, 2, fft_size);
    const auto op = build_operator(tr, dict);
    const auto sup = true_support(ch, dict);
    double mean = 0.0;
    Rng nrng(39);
    for (int i = 0; i < trials; ++i) {
        const auto rcv = synthesize_received(ch, tr, op, sigma2, nrng, fft_size);
        mean += estimate_sigma2(op, sup, rcv.y).pooled;
    }
    mean /= trials;
    CHECK(std::abs(mean - sigma2) / sigma2 < 0.05);
}

TEST_CASE("reconstruct_channel handles empty supports and round trips") {
    auto s = make_setup(40, 8, 8, 2, 10, 12, 4, 2, 2, 0.1);
    SparseEstimate empty;
    empty.supports.resize(1);
    empty.gains.assign(static_cast<std::size_t>(s.fft_size), Eigen::VectorXcd());
    const auto zeros = reconstruct_channel(s.op, empty);
    for (const auto& h : zeros) {
        CHECK(h.norm() == 0.0);
    }
    CHECK(nmse(zeros, s.h_true) == doctest::Approx(1.0).epsilon(1e-12));

    // vec/unvec round trip against the dictionary columns
    SparseEstimate one;
    one.supports = {{3, 17}};
    Eigen::VectorXcd g(2);
    g << std::complex<double>(0.3, -1.1), std::complex<double>(-0.4, 0.2);
    one.gains.assign(static_cast<std::size_t>(s.fft_size), g);
    const auto recon = reconstruct_channel(s.op, one);
    const Eigen::VectorXcd expected_vec =
        g(0) * s.op.psi().col(3) + g(1) * s.op.psi().col(17);
    for (const auto& h : recon) {
        const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(h.data(), h.size());
        CHECK(rel_err(v, expected_vec) < 1e-13);
    }
}

TEST_CASE("estimated-noise mode halts and reports a sane variance estimate") {
    auto s = make_setup(41, 16, 16, 4, 40, 20, 8, 3, 4, 0.1);
    RecoveryConfig rc;
    rc.epsilon = 0.0; // unused in estimated mode
    rc.max_iters = 24;
    rc.sigma2_mode = NoiseKnowledge::estimated;
    const auto est = swomp(s.y, s.op, rc);
    REQUIRE(est.sigma2_hat.has_value());
    CHECK(*est.sigma2_hat > 0.03);
    CHECK(*est.sigma2_hat < 0.3);
    CHECK(est.iterations < rc.max_iters);
    // support still contains the dominant structure
    const auto truth = true_support(s.ch, s.dict);
    const std::set<Eigen::Index> got(est.support().begin(), est.support().end());
    int hits = 0;
    for (Eigen::Index p : truth) {
        hits += static_cast<int>(got.count(p));
    }
    CHECK(hits >= static_cast<int>(truth.size()) - 1);
}

TEST_CASE("projection op counts follow the per-iteration cost model") {
    auto s = make_setup(42, 16, 16, 4, 24, 20, 8, 3, 4, 0.05);
    RecoveryConfig rc;
    rc.epsilon = 1e-9;
    rc.max_iters = 6;
    const auto est = swomp(s.y, s.op, rc);
    const std::uint64_t g = static_cast<std::uint64_t>(s.op.atoms());
    const std::uint64_t mlr = static_cast<std::uint64_t>(s.op.rows());
    std::uint64_t expected = 0;
    for (int j = 1; j <= est.iterations; ++j) {
        expected += static_cast<std::uint64_t>(s.fft_size) *
                    (g - static_cast<std::uint64_t>(j - 1)) * mlr;
    }
    CHECK(est.ops.projection == expected);

    rc.k_p = 2;
    rc.beta = 0.025;
    const auto ss = ss_swomp_th(s.y, s.op, rc);
    std::uint64_t expected_ss = 0;
    for (int j = 1; j <= ss.iterations; ++j) {
        expected_ss += 2ULL * (g - static_cast<std::uint64_t>(j - 1)) * mlr;
    }
    CHECK(ss.ops.projection == expected_ss);
}
