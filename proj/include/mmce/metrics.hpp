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

#ifndef MMCE_METRICS_HPP
#define MMCE_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

namespace mmce {

/// sum_k ||H_hat[k] - H[k]||_F^2 / sum_k ||H[k]||_F^2.
double nmse(const std::vector<Eigen::MatrixXcd>& h_hat,
            const std::vector<Eigen::MatrixXcd>& h);

/// Average spectral efficiency in bits/s/Hz with fully digital precoding and
/// combining from the N_s dominant singular vectors of the channel estimate:
///   R = (1/K) sum_k sum_n log2(1 + lambda_n(W*[k] H[k] F[k])^2 / (K N_s sigma2)),
/// with transmit power 1 and sigma2 = 10^(-snr_db/10).
double spectral_efficiency(const std::vector<Eigen::MatrixXcd>& h_hat,
                           const std::vector<Eigen::MatrixXcd>& h,
                           double snr_db, int num_streams);

inline double to_db(double x) { return 10.0 * std::log10(x); }

} // namespace mmce

#endif
