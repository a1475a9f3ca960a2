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

#ifndef MMCE_ERRORS_HPP
#define MMCE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mmce {

/// A dimension argument (antenna count, grid size, ...) is out of range.
class InvalidDimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A configuration value or combination is invalid.
class InvalidConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The requested operation is undefined for the object's mode
/// (e.g. exact sparse representation of an off-grid channel).
class UnsupportedModeError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// A combiner Gram block could not be factorized even after jitter.
class IllConditionedCombinerError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The support columns are rank deficient in the C_w^{-1} inner product.
class SingularSupportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A Fisher information matrix on the given support is not positive definite.
class DegenerateSupportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A metric is undefined for the given inputs (e.g. zero-energy channel).
class UndefinedMetricError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

} // namespace mmce

#endif
