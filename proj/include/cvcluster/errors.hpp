// Copyright 2026 The cvcluster Authors
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

namespace cvc {

// Bad caller input: empty registers, out-of-range modes, non-symplectic maps,
// malformed graphs and programs.
class InvalidArgument : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

// A quadrature marginal too narrow to condition on.
class IllConditioned : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// A physical or bookkeeping invariant failed mid-run.
class InvariantViolation : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Requested operation lies outside what the chosen engine can simulate,
// e.g. a non-Gaussian measurement on a Gaussian state.
class Unsupported : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Config or program text that does not parse or does not match the schema.
class ParseError : public std::runtime_error {
   public:
    ParseError(const std::string &what, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(line == 0 ? what
                                       : what + " (line " + std::to_string(line) + ", column " +
                                             std::to_string(column) + ")"),
          line_(line),
          column_(column) {
    }
    std::size_t line() const {
        return line_;
    }
    std::size_t column() const {
        return column_;
    }

   private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace cvc
