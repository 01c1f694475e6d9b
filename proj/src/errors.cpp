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

#include "qbayes/errors.hpp"

namespace qbayes {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotADensityMatrix: return "NotADensityMatrix";
        case ErrorCode::NotAPovm: return "NotAPovm";
        case ErrorCode::NotAnInstrument: return "NotAnInstrument";
        case ErrorCode::NegativeProbability: return "NegativeProbability";
        case ErrorCode::NotFullRank: return "NotFullRank";
        case ErrorCode::InconsistentNullSet: return "InconsistentNullSet";
        case ErrorCode::MalformedProductLabels: return "MalformedProductLabels";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::DimensionChainMismatch: return "DimensionChainMismatch";
        case ErrorCode::OutcomeExplosion: return "OutcomeExplosion";
        case ErrorCode::NotCommuting: return "NotCommuting";
        case ErrorCode::CompletionFailure: return "CompletionFailure";
        case ErrorCode::IncompatibleOutcomeSpaces: return "IncompatibleOutcomeSpaces";
        case ErrorCode::ZeroProbabilityOutcome: return "ZeroProbabilityOutcome";
        case ErrorCode::ZeroEvidence: return "ZeroEvidence";
        case ErrorCode::DegenerateWeight: return "DegenerateWeight";
        case ErrorCode::MalformedPartition: return "MalformedPartition";
        case ErrorCode::MissingThetaStates: return "MissingThetaStates";
        case ErrorCode::UnknownTheta: return "UnknownTheta";
        case ErrorCode::MissingPriorWeights: return "MissingPriorWeights";
        case ErrorCode::IncompatibleAction: return "IncompatibleAction";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::NoSpectralGap: return "NoSpectralGap";
        case ErrorCode::AlreadyConverged: return "AlreadyConverged";
        case ErrorCode::PositivityCertificateFailed: return "PositivityCertificateFailed";
        case ErrorCode::DegenerateDriving: return "DegenerateDriving";
        case ErrorCode::CommutingInput: return "CommutingInput";
        case ErrorCode::NotAProjection: return "NotAProjection";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyRunDir: return "EmptyRunDir";
    }
    return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace qbayes
