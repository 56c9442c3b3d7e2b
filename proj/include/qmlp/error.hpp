// Copyright 2026 The qmlp Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qmlp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Vector/matrix/register sizes that do not fit together.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A qubit, class or sample index outside its valid range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// An argument outside its documented domain (rates, constants, sizes).
class ValueError : public Error {
  public:
    using Error::Error;
};

/// Non-finite or diverging numerics.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Malformed input files; the message carries the offending line.
class ParseError : public Error {
  public:
    using Error::Error;
};

}  // namespace qmlp
