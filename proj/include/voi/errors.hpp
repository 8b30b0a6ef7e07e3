// Copyright 2026 The voi-twin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOI_ERRORS_HPP
#define VOI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace voi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or model parameter violates its invariant.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of a function (e.g. a quantile level of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Correlation matrix is not positive definite.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on a value at a support boundary of a marginal.
class DegenerateConditioning : public Error {
 public:
  using Error::Error;
};

/// Importance weights vanished: the observation is incompatible with every prior sample.
class DegeneratePosterior : public Error {
 public:
  DegeneratePosterior(const std::string& what, double observation)
      : Error(what), observation_(observation) {}

  double observation() const noexcept { return observation_; }

 private:
  double observation_;
};

/// Too many outer draws of a preposterior analysis could not be conditioned.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace voi

#endif  // VOI_ERRORS_HPP
