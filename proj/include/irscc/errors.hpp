// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace irscc {

/// Root of a sign-change search did not bracket.
class bracketing_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative method ran out of iterations before meeting its tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a structural contract (e.g. a matrix that must be Hermitian).
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A closed-form design was requested outside its feasibility region.
class feasibility_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace irscc
