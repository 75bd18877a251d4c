// Copyright 2026 The qpmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qpmeas {

/// Raised for parameters outside the documented domain (nu outside (0,1),
/// non-positive widths, zero-measure regions, ...).
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An observable has a nonzero coefficient on a mode the state does not carry.
struct ModeMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A matrix or parameter set breaks a structural invariant (solvable class,
/// SL(3) transform, PSD covariance, ...).
struct InvariantViolation : std::domain_error {
    using std::domain_error::domain_error;
};

/// Two observables that must be jointly measured do not commute.
struct NonCommuting : std::invalid_argument {
    NonCommuting(std::size_t first, std::size_t second, double coefficient)
        : std::invalid_argument("observables " + std::to_string(first) + " and " +
                                std::to_string(second) +
                                " do not commute (commutator coefficient " +
                                std::to_string(coefficient) + ")"),
          first(first),
          second(second),
          coefficient(coefficient) {}

    std::size_t first;
    std::size_t second;
    double coefficient;
};

/// The coupling equations have a vanishing time factor.
struct DegenerateCoupling : std::domain_error {
    using std::domain_error::domain_error;
};

/// Conditioning on a block whose covariance is not positive definite.
struct SingularBlock : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace qpmeas
