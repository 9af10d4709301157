// Copyright 2026 The groundsim Authors
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

namespace groundsim {

// Root of every error the toolkit throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GROUNDSIM_DEFINE_ERROR(Name, Base) \
  class Name : public Base {               \
   public:                                 \
    using Base::Base;                      \
  }

// Gateway failures.
GROUNDSIM_DEFINE_ERROR(GatewayError, Error);
GROUNDSIM_DEFINE_ERROR(AuthError, GatewayError);
GROUNDSIM_DEFINE_ERROR(TimeoutExhausted, GatewayError);
GROUNDSIM_DEFINE_ERROR(FixtureMiss, GatewayError);

// Raised by providers for failures worth another attempt (HTTP 429, 5xx,
// connection resets). Never escapes Gateway::complete.
class TransientError : public GatewayError {
 public:
  TransientError(const std::string& what, int status = 0)
      : GatewayError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Structured-reply parse failures, one per consumer.
GROUNDSIM_DEFINE_ERROR(ParseError, Error);
GROUNDSIM_DEFINE_ERROR(FormatError, ParseError);
GROUNDSIM_DEFINE_ERROR(TagParseError, ParseError);
GROUNDSIM_DEFINE_ERROR(ManualParseError, ParseError);
GROUNDSIM_DEFINE_ERROR(MentionParseError, ParseError);
GROUNDSIM_DEFINE_ERROR(InferenceParseError, ParseError);
GROUNDSIM_DEFINE_ERROR(SpecParseError, ParseError);
GROUNDSIM_DEFINE_ERROR(VerdictParseError, ParseError);

GROUNDSIM_DEFINE_ERROR(EmptyManual, Error);
GROUNDSIM_DEFINE_ERROR(ConflictError, Error);
GROUNDSIM_DEFINE_ERROR(LeakageError, Error);
GROUNDSIM_DEFINE_ERROR(InsufficientCorpus, Error);
GROUNDSIM_DEFINE_ERROR(VocabularyMismatch, Error);
GROUNDSIM_DEFINE_ERROR(EmptyPool, Error);
GROUNDSIM_DEFINE_ERROR(EnvironmentError, Error);
GROUNDSIM_DEFINE_ERROR(InvalidRequest, Error);

#undef GROUNDSIM_DEFINE_ERROR

}  // namespace groundsim
