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

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbayes/inference.hpp"
#include "qbayes/instrument.hpp"
#include "qbayes/measure.hpp"

namespace qbayes::cli {

using nlohmann::json;

/// Missing or malformed command-line parameters; exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string path;
    int version = 1;
    Index dim = 0;
    json objects;
    json run;
};

/// Reads and parses the document. Syntax errors become ParseError with
/// line and column; structural problems (wrong types, missing blocks)
/// become ParseError too.
Config load_config(const std::string& path);

/// Shared complex encoding: row-major nested arrays of [re, im] pairs; a
/// bare number is accepted as a real entry.
CMatrix parse_matrix(const json& j, const std::string& where);
json matrix_to_json(const CMatrix& m);
json complex_to_json(Complex z);

/// Every named object, validated and built.
struct Registry {
    Index dim = 0;
    std::map<std::string, DensityMatrix> states;
    std::map<std::string, Povm> povms;
    std::map<std::string, KrausInstrument> instruments;
    std::map<std::string, ParamModel> models;

    const DensityMatrix& state(const std::string& name) const;
    const Povm& povm(const std::string& name) const;
    const KrausInstrument& instrument(const std::string& name) const;
    const ParamModel& model(const std::string& name) const;
};

/// Throws the first validator error (exit 1) or ParseError (exit 2).
Registry build_registry(const Config& cfg, const Tolerances& tol);

struct ValidationLine {
    std::string kind;
    std::string name;
    bool pass = false;
    std::optional<double> residual;
    std::string message;
};

/// Runs every validator and collects one line per object instead of
/// stopping at the first failure.
std::vector<ValidationLine> validate_objects(const Config& cfg, const Tolerances& tol);

}  // namespace qbayes::cli
