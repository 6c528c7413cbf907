// Copyright 2026 The QRS Steering Authors
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

namespace qrs {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A Bloch vector or density matrix lies outside the physical state space.
struct InvalidState : Error {
    using Error::Error;
};

/// An operator argument broke a documented precondition (e.g. non-Hermitian).
struct ContractViolation : Error {
    using Error::Error;
};

/// Hilbert-space dimension outside {2, 4, 8}.
struct UnsupportedDimension : Error {
    using Error::Error;
};

/// A scalar or structural argument is out of its documented range.
struct InvalidArgument : Error {
    using Error::Error;
};

/// Malformed direction file or preparation report. The message names the line.
struct ParseError : Error {
    using Error::Error;
};

/// The preparation report makes the r-factor denominator vanish.
struct DegeneratePreparation : Error {
    using Error::Error;
};

/// A simulation produced no round on which Alice answered.
struct NoValidRounds : Error {
    using Error::Error;
};

/// An exhaustive search was refused because its size exceeds the supported cap.
struct SearchRefused : Error {
    using Error::Error;
};

}  // namespace qrs
