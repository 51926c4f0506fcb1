// Copyright 2026 The printdict Authors
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

namespace printdict {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (bad dimensions, negative spreads, ...).
// The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API contract violation (dimension mismatch, NaN fitness, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Calibration refused: not enough impostor pairs for a trustworthy threshold.
class CalibrationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Numerical failure at run time. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The generator produced a vector that cannot be normalized.
class DegenerateOutputError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace printdict
