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

#include "config.hpp"

#include <fstream>
#include <sstream>

#include "qbayes/errors.hpp"

namespace qbayes::cli {

namespace {

[[noreturn]] void structure(const std::string& where, const std::string& what) {
    fail(ErrorCode::ParseError, where + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) structure(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) structure(where, std::string("missing \"") + key + "\"");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) structure(where, "expected a number");
    return j.get<double>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) structure(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::string> label_list(const json& j, const std::string& where) {
    if (!j.is_array()) structure(where, "expected an array of labels");
    std::vector<std::string> out;
    for (const auto& x : j) {
        if (!x.is_string()) structure(where, "labels must be strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

Index dimension(const json& j, const std::string& where) {
    if (!j.is_number_integer()) structure(where, "expected an integer dimension");
    const auto d = j.get<long long>();
    if (d < 1 || d > kMaxDim) structure(where, "dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    return static_cast<Index>(d);
}

const json& block(const Config& cfg, const char* kind) {
    static const json empty = json::object();
    const auto it = cfg.objects.find(kind);
    if (it == cfg.objects.end()) return empty;
    if (!it->is_object()) structure(std::string("objects.") + kind, "expected an object of named blocks");
    return *it;
}

void check_system_dim(Index got, Index want, const std::string& what) {
    if (got != want)
        fail(ErrorCode::DimensionMismatch,
             what + " has dimension " + std::to_string(got) + " but system.dim is " + std::to_string(want));
}

DensityMatrix build_state(const json& j, const std::string& where, Index dim, const Tolerances& tol) {
    const CMatrix m = parse_matrix(j, where);
    if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, where + ": state must be square");
    check_system_dim(m.rows(), dim, where);
    return DensityMatrix::make(m, tol);
}

struct RawPovm {
    OutcomeSpace space;
    std::vector<CMatrix> effects;
};

RawPovm raw_povm(const json& j, const std::string& where) {
    const auto labels = label_list(member(j, "labels", where), where + ".labels");
    const json& effects = member(j, "effects", where);
    if (!effects.is_object()) structure(where + ".effects", "expected an object keyed by label");
    std::vector<CMatrix> mats;
    for (const auto& l : labels) {
        const auto it = effects.find(l);
        if (it == effects.end()) structure(where + ".effects", "no effect for label \"" + l + "\"");
        mats.push_back(parse_matrix(*it, where + ".effects." + l));
    }
    if (effects.size() != labels.size()) structure(where + ".effects", "effects must match the label list");
    std::optional<std::vector<double>> embedding;
    if (const auto it = j.find("embedding"); it != j.end()) {
        if (!it->is_object()) structure(where + ".embedding", "expected an object keyed by label");
        std::vector<double> values;
        for (const auto& l : labels) {
            const auto e = it->find(l);
            if (e == it->end()) structure(where + ".embedding", "no value for label \"" + l + "\"");
            values.push_back(number(*e, where + ".embedding." + l));
        }
        embedding = std::move(values);
    }
    return {OutcomeSpace(labels, embedding), std::move(mats)};
}

Povm build_povm(const json& j, const std::string& where, Index dim, const Tolerances& tol) {
    RawPovm raw = raw_povm(j, where);
    for (const auto& e : raw.effects) {
        if (e.rows() != e.cols()) fail(ErrorCode::DimensionMismatch, where + ": effects must be square");
        check_system_dim(e.rows(), dim, where);
    }
    return Povm::make(std::move(raw.space), std::move(raw.effects), tol);
}

struct RawInstrument {
    Index dim_in;
    Index dim_out;
    OutcomeSpace space;
    std::vector<KrausList> kraus;
};

RawInstrument raw_instrument(const json& j, const std::string& where) {
    const Index din = dimension(member(j, "dim_in", where), where + ".dim_in");
    const Index dout = dimension(member(j, "dim_out", where), where + ".dim_out");
    const auto labels = label_list(member(j, "labels", where), where + ".labels");
    const json& kraus = member(j, "kraus", where);
    if (!kraus.is_object()) structure(where + ".kraus", "expected an object keyed by label");
    std::vector<KrausList> lists;
    for (const auto& l : labels) {
        const auto it = kraus.find(l);
        if (it == kraus.end()) structure(where + ".kraus", "no Kraus list for label \"" + l + "\"");
        if (!it->is_array()) structure(where + ".kraus." + l, "expected a list of matrices");
        KrausList list;
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string at = where + ".kraus." + l + "[" + std::to_string(k) + "]";
            CMatrix m = parse_matrix((*it)[k], at);
            if (m.rows() != dout || m.cols() != din)
                fail(ErrorCode::DimensionMismatch, at + ": Kraus operator must be dim_out x dim_in");
            list.push_back(std::move(m));
        }
        lists.push_back(std::move(list));
    }
    if (kraus.size() != labels.size()) structure(where + ".kraus", "Kraus lists must match the label list");
    return {din, dout, OutcomeSpace(labels), std::move(lists)};
}

KrausInstrument build_instrument(const json& j, const std::string& where, Index dim, const Tolerances& tol) {
    RawInstrument raw = raw_instrument(j, where);
    check_system_dim(raw.dim_in, dim, where);
    return KrausInstrument::make_reduced(std::move(raw.space), std::move(raw.kraus), tol);
}

DensityMatrix state_ref(const json& j, const std::string& where, const Registry& reg, const Tolerances& tol) {
    if (j.is_string()) return reg.state(j.get<std::string>());
    return build_state(j, where, reg.dim, tol);
}

ParamModel build_model(const json& j, const std::string& where, const Registry& reg, const Tolerances& tol) {
    auto grid = number_list(member(j, "grid", where), where + ".grid");
    const json& obs_j = member(j, "param_observable", where);
    Povm obs = obs_j.is_string() ? reg.povm(obs_j.get<std::string>())
                                 : build_povm(obs_j, where + ".param_observable", reg.dim, tol);
    DensityMatrix prior = state_ref(member(j, "prior_state", where), where + ".prior_state", reg, tol);

    std::optional<std::vector<DensityMatrix>> states;
    if (const auto it = j.find("states_by_theta"); it != j.end()) {
        std::vector<DensityMatrix> list;
        if (it->is_array()) {
            for (std::size_t t = 0; t < it->size(); ++t)
                list.push_back(state_ref((*it)[t], where + ".states_by_theta[" + std::to_string(t) + "]", reg, tol));
        } else if (it->is_object()) {
            for (const auto& l : obs.space().labels()) {
                const auto s = it->find(l);
                if (s == it->end()) fail(ErrorCode::MissingThetaStates, where + ": no state for theta label \"" + l + "\"");
                list.push_back(state_ref(*s, where + ".states_by_theta." + l, reg, tol));
            }
            if (it->size() != obs.space().size())
                structure(where + ".states_by_theta", "keys must be the parameter observable's labels");
        } else {
            structure(where + ".states_by_theta", "expected an object keyed by label or an array");
        }
        states = std::move(list);
    }
    std::optional<std::vector<double>> weights;
    if (const auto it = j.find("prior_weights"); it != j.end())
        weights = number_list(*it, where + ".prior_weights");
    return ParamModel::make(std::move(grid), std::move(obs), std::move(prior), std::move(states), std::move(weights),
                            tol);
}

template <class T>
const T& lookup(const std::map<std::string, T>& m, const std::string& name, const char* kind) {
    const auto it = m.find(name);
    if (it == m.end()) fail(ErrorCode::UnknownLabel, std::string("no ") + kind + " named \"" + name + "\"");
    return it->second;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

const DensityMatrix& Registry::state(const std::string& name) const { return lookup(states, name, "state"); }
const Povm& Registry::povm(const std::string& name) const { return lookup(povms, name, "povm"); }
const KrausInstrument& Registry::instrument(const std::string& name) const {
    return lookup(instruments, name, "instrument");
}
const ParamModel& Registry::model(const std::string& name) const { return lookup(models, name, "model"); }

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    Config cfg;
    cfg.path = path;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the byte just past the failure point.
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        fail(ErrorCode::ParseError,
             path + ": line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!doc.is_object()) structure(path, "top level must be an object");
    const json& version = member(doc, "version", "config");
    if (!version.is_number_integer() || version.get<int>() != 1) structure("config.version", "only version 1 is supported");
    cfg.version = 1;
    cfg.dim = dimension(member(member(doc, "system", "config"), "dim", "config.system"), "config.system.dim");
    cfg.objects = doc.value("objects", json::object());
    if (!cfg.objects.is_object()) structure("config.objects", "expected an object");
    cfg.run = doc.value("run", json::object());
    if (!cfg.run.is_object()) structure("config.run", "expected an object");
    return cfg;
}

CMatrix parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) structure(where, "matrix must be a nonempty array of rows");
    const auto rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) structure(where, "matrix rows must be nonempty arrays");
    const auto cols = static_cast<Index>(j[0].size());
    if (rows > kMaxDim || cols > kMaxDim) structure(where, "matrix exceeds the maximum dimension");
    CMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) structure(where, "rows must have equal length");
        for (Index c = 0; c < cols; ++c) {
            const json& e = row[static_cast<std::size_t>(c)];
            const std::string at = where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
            if (e.is_number()) {
                m(r, c) = Complex(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
            } else {
                structure(at, "entry must be a number or an [re, im] pair");
            }
        }
    }
    return m;
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const CMatrix& m) {
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

Registry build_registry(const Config& cfg, const Tolerances& tol) {
    Registry reg;
    reg.dim = cfg.dim;
    for (const auto& [name, j] : block(cfg, "states").items())
        reg.states.emplace(name, build_state(j, "states." + name, cfg.dim, tol));
    for (const auto& [name, j] : block(cfg, "povms").items())
        reg.povms.emplace(name, build_povm(j, "povms." + name, cfg.dim, tol));
    for (const auto& [name, j] : block(cfg, "instruments").items())
        reg.instruments.emplace(name, build_instrument(j, "instruments." + name, cfg.dim, tol));
    for (const auto& [name, j] : block(cfg, "models").items())
        reg.models.emplace(name, build_model(j, "models." + name, reg, tol));
    return reg;
}

std::vector<ValidationLine> validate_objects(const Config& cfg, const Tolerances& tol) {
    std::vector<ValidationLine> out;
    Registry reg;
    reg.dim = cfg.dim;
    const auto attempt = [&](const char* kind, const std::string& name, auto&& residual, auto&& build) {
        ValidationLine line{kind, name, false, std::nullopt, ""};
        try {
            line.residual = residual();
        } catch (const Error&) {
            // Residuals are advisory; the builder reports the real failure.
        }
        try {
            build();
            line.pass = true;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ParseError) throw;
            line.message = std::string(e.name()) + ": " + e.what();
        }
        out.push_back(std::move(line));
    };
    for (const auto& [name, j] : block(cfg, "states").items()) {
        const std::string where = "states." + name;
        attempt(
            "state", name, [&] { return density_residual(parse_matrix(j, where)); },
            [&] { reg.states.emplace(name, build_state(j, where, cfg.dim, tol)); });
    }
    for (const auto& [name, j] : block(cfg, "povms").items()) {
        const std::string where = "povms." + name;
        attempt(
            "povm", name, [&] { return completeness_residual(raw_povm(j, where).effects); },
            [&] { reg.povms.emplace(name, build_povm(j, where, cfg.dim, tol)); });
    }
    for (const auto& [name, j] : block(cfg, "instruments").items()) {
        const std::string where = "instruments." + name;
        attempt(
            "instrument", name,
            [&] {
                const RawInstrument raw = raw_instrument(j, where);
                return instrument_completeness_residual(raw.kraus, raw.dim_in);
            },
            [&] { reg.instruments.emplace(name, build_instrument(j, where, cfg.dim, tol)); });
    }
    for (const auto& [name, j] : block(cfg, "models").items()) {
        const std::string where = "models." + name;
        attempt(
            "model", name, [&]() -> double { fail(ErrorCode::InvalidArgument, "no residual"); },
            [&] { reg.models.emplace(name, build_model(j, where, reg, tol)); });
    }
    return out;
}

}  // namespace qbayes::cli
