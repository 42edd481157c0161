// Copyright 2026 The qvrf Authors. All Rights Reserved.
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

#ifndef QVRF_ERROR_HPP_
#define QVRF_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qvrf {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or a configuration the coder cannot represent
// (regulator out of bounds, symbol window too wide, singular fit, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed container, bad magic/version, inconsistent segment lengths or
// corrupt arithmetic-coded data.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The decoder needed more bytes than the stream holds.
class StreamExhausted : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qvrf

#endif  // QVRF_ERROR_HPP_
