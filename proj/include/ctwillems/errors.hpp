/*
 Copyright 2026 The ctwillems Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace ctwillems {

/// Operand shapes are inconsistent (non-square input, mismatched dimensions).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value violates a basic validity requirement (non-finite entry, non-positive step).
class ValueError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Index or segment range outside the sample grid.
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A function was evaluated outside the interval it is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The requested configuration cannot satisfy a hard feasibility bound.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical rank loss detected during a solve.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was invoked on data that does not satisfy its prerequisites.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File read/write or serialization failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ctwillems
