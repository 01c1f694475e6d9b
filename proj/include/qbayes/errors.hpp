// Copyright 2026 The qbayes Authors
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
#include <string_view>

namespace qbayes {

/// Every domain failure raised by the library carries one of these codes.
/// The CLI prints `error_name(code)` verbatim, so the names are part of
/// the external interface.
enum class ErrorCode {
    InvalidArgument,
    NotHermitian,
    DimensionMismatch,
    NotADensityMatrix,
    NotAPovm,
    NotAnInstrument,
    NegativeProbability,
    NotFullRank,
    InconsistentNullSet,
    MalformedProductLabels,
    UnknownLabel,
    DimensionChainMismatch,
    OutcomeExplosion,
    NotCommuting,
    CompletionFailure,
    IncompatibleOutcomeSpaces,
    ZeroProbabilityOutcome,
    ZeroEvidence,
    DegenerateWeight,
    MalformedPartition,
    MissingThetaStates,
    UnknownTheta,
    MissingPriorWeights,
    IncompatibleAction,
    BudgetExceeded,
    NoSpectralGap,
    AlreadyConverged,
    PositivityCertificateFailed,
    DegenerateDriving,
    CommutingInput,
    NotAProjection,
    ParseError,
    EmptyRunDir,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace qbayes
