// Copyright 2026 The histkit Authors
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

#ifndef HISTKIT_ERRORS_HPP
#define HISTKIT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace histkit {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
    using Error::Error;
};
class CapacityError : public Error {
    using Error::Error;
};
class LabelError : public Error {
    using Error::Error;
};
class DomainError : public Error {
    using Error::Error;
};
class NormalizationError : public Error {
    using Error::Error;
};
class TypeError : public Error {
    using Error::Error;
};
class DisjointnessError : public Error {
    using Error::Error;
};
class InputError : public Error {
    using Error::Error;
};
class InfraredError : public Error {
    using Error::Error;
};

/// Raised when an operation's numeric precondition fails; keeps the offending residual.
class PreconditionError : public Error {
  public:
    PreconditionError(const std::string &what, double residual) : Error(what), residual_(residual) {
    }
    double residual() const {
        return residual_;
    }

  private:
    double residual_;
};

/// Numerical non-convergence. `achieved` is the best residual reached.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string &what, double achieved) : Error(what), achieved_(achieved) {
    }
    double achieved() const {
        return achieved_;
    }

  private:
    double achieved_;
};

class CorrelationError : public Error {
  public:
    CorrelationError(const std::string &what, std::vector<std::string> offenders)
        : Error(what), offenders_(std::move(offenders)) {
    }
    const std::vector<std::string> &offenders() const {
        return offenders_;
    }

  private:
    std::vector<std::string> offenders_;
};

/// Scenario parse failure. line/column are 1-based; 0 when unknown.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, int line = 0, int column = 0, std::string path = "")
        : Error(format(what, line, column, path)), line_(line), column_(column), path_(std::move(path)) {
    }
    int line() const {
        return line_;
    }
    int column() const {
        return column_;
    }
    const std::string &path() const {
        return path_;
    }

  private:
    static std::string format(const std::string &what, int line, int column, const std::string &path) {
        std::string out;
        if (line > 0) {
            out += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
        }
        if (!path.empty()) {
            out += path + ": ";
        }
        return out + what;
    }
    int line_;
    int column_;
    std::string path_;
};

}  // namespace histkit

#endif
