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

#include "mmce/metrics.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "mmce/errors.hpp"

namespace mmce {

double nmse(const std::vector<Eigen::MatrixXcd>& h_hat,
            const std::vector<Eigen::MatrixXcd>& h) {
    if (h_hat.size() != h.size() || h.empty()) {
        throw InvalidDimensionError("nmse: subcarrier count mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h_hat[k].rows() != h[k].rows() || h_hat[k].cols() != h[k].cols()) {
            throw InvalidDimensionError("nmse: matrix shape mismatch");
        }
        num += (h_hat[k] - h[k]).squaredNorm();
        den += h[k].squaredNorm();
    }
    if (den <= 0.0) {
        throw UndefinedMetricError("nmse: zero-energy channel");
    }
    return num / den;
}

double spectral_efficiency(const std::vector<Eigen::MatrixXcd>& h_hat,
                           const std::vector<Eigen::MatrixXcd>& h,
                           double snr_db, int num_streams) {
    if (h_hat.size() != h.size() || h.empty()) {
        throw InvalidDimensionError("spectral_efficiency: subcarrier count mismatch");
    }
    const auto num_k = static_cast<double>(h.size());
    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    if (num_streams < 1 || num_streams > std::min(h[0].rows(), h[0].cols())) {
        throw InvalidConfigError("spectral_efficiency: bad stream count");
    }
    const double gain_scale = 1.0 / (num_k * num_streams * sigma2);

    double rate = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
            h_hat[k], Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::MatrixXcd w = svd.matrixU().leftCols(num_streams);
        const Eigen::MatrixXcd f = svd.matrixV().leftCols(num_streams);
        const Eigen::MatrixXcd h_eff = w.adjoint() * h[k] * f;
        Eigen::JacobiSVD<Eigen::MatrixXcd> eff_svd(h_eff);
        const Eigen::VectorXd lambda = eff_svd.singularValues();
        for (int n = 0; n < num_streams; ++n) {
            rate += std::log2(1.0 + gain_scale * lambda(n) * lambda(n));
        }
    }
    return rate / num_k;
}

} // namespace mmce
