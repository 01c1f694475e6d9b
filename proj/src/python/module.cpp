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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbayes/asymptotics.hpp"
#include "qbayes/decision.hpp"
#include "qbayes/errors.hpp"
#include "qbayes/inference.hpp"
#include "qbayes/instrument.hpp"
#include "qbayes/measure.hpp"
#include "qbayes/posterior.hpp"

namespace py = pybind11;
using namespace qbayes;

namespace {

PyObject* g_error = nullptr;

KrausInstrument make_instrument(const std::vector<std::string>& labels, std::vector<KrausList> kraus) {
    return KrausInstrument::make(OutcomeSpace(labels), std::move(kraus));
}

EstimatorSpec estimator_from(const std::string& kind, double p, std::vector<double> c) {
    if (kind == "mean") return WeightedMean{std::move(c)};
    if (kind == "quantile") return Quantile{p};
    if (kind == "mode") return Mode{};
    fail(ErrorCode::InvalidArgument, "estimator must be mean, quantile or mode");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-dimensional quantum Bayesian inference";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    g_error = error.ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(g_error)(std::string(e.name()), e.what());
            inst.attr("code") = std::string(e.name());
            PyErr_SetObject(g_error, inst.ptr());
        }
    });

    py::class_<DensityMatrix>(m, "DensityMatrix")
        .def(py::init([](const CMatrix& mat) { return DensityMatrix::make(mat); }), py::arg("matrix"))
        .def_static("maximally_mixed", &DensityMatrix::maximally_mixed)
        .def_static("pure", &DensityMatrix::pure)
        .def_static("basis", &DensityMatrix::basis)
        .def_property_readonly("matrix", &DensityMatrix::matrix)
        .def_property_readonly("dim", &DensityMatrix::dim)
        .def("purity", &DensityMatrix::purity)
        .def("moment", &DensityMatrix::moment);

    py::class_<Povm>(m, "Povm")
        .def(py::init([](const std::vector<std::string>& labels, std::vector<CMatrix> effects) {
                 return Povm::make(OutcomeSpace(labels), std::move(effects));
             }),
             py::arg("labels"), py::arg("effects"))
        .def_static("computational", &Povm::computational)
        .def_property_readonly("labels", [](const Povm& p) { return p.space().labels(); })
        .def_property_readonly("effects", &Povm::effects);

    py::class_<KrausInstrument>(m, "Instrument")
        .def(py::init(&make_instrument), py::arg("labels"), py::arg("kraus"))
        .def_static("unitary", &KrausInstrument::unitary, py::arg("u"), py::arg("label") = "x0")
        .def_static("channel", &KrausInstrument::channel, py::arg("kraus"), py::arg("label") = "x0")
        .def_static("luders", &KrausInstrument::luders)
        .def_property_readonly("labels", [](const KrausInstrument& i) { return i.space().labels(); })
        .def_property_readonly("dim_in", &KrausInstrument::dim_in)
        .def_property_readonly("dim_out", &KrausInstrument::dim_out)
        .def("kraus", &KrausInstrument::kraus)
        .def("__len__", &KrausInstrument::size);

    m.def("induced_observable", &induced_observable);
    m.def("compose", [](const std::vector<KrausInstrument>& insts) { return compose(insts); });
    m.def("apply_channel", &apply_channel);
    m.def("dilation_isometry", &dilation_isometry);
    m.def("trace_norm", &trace_norm);

    m.def(
        "outcome_distribution",
        [](const KrausInstrument& inst, const DensityMatrix& rho) {
            const auto d = outcome_distribution(inst, rho);
            py::dict out;
            for (std::size_t i = 0; i < d.probs.size(); ++i) out[py::str(d.space.label(i))] = d.probs[i];
            return out;
        },
        "Outcome probabilities keyed by label.");
    m.def("posterior_state",
          py::overload_cast<const KrausInstrument&, const DensityMatrix&, const std::string&>(&posterior_state));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("seed", &Trajectory::seed)
        .def_readonly("outcomes", &Trajectory::outcomes)
        .def_readonly("probs", &Trajectory::probs)
        .def_readonly("states", &Trajectory::states)
        .def_readonly("logprob", &Trajectory::logprob);
    m.def(
        "sample_trajectory",
        [](const std::vector<KrausInstrument>& insts, const DensityMatrix& prior, std::uint64_t seed) {
            return sample_trajectory(insts, prior, seed);
        },
        py::arg("instruments"), py::arg("prior"), py::arg("seed"));
    m.def("classical_bayes_oracle",
          [](const std::vector<double>& prior, const std::vector<std::vector<double>>& lik, std::size_t x) {
              return classical_bayes_oracle(prior, lik, x);
          });

    py::class_<ParamModel>(m, "ParamModel")
        .def(py::init([](std::vector<double> grid, Povm obs, DensityMatrix prior,
                         std::optional<std::vector<DensityMatrix>> states, std::optional<std::vector<double>> weights) {
                 return ParamModel::make(std::move(grid), std::move(obs), std::move(prior), std::move(states),
                                         std::move(weights));
             }),
             py::arg("grid"), py::arg("param_observable"), py::arg("prior_state"), py::arg("states_by_theta") = py::none(),
             py::arg("prior_weights") = py::none())
        .def_property_readonly("grid", &ParamModel::grid);

    py::class_<PosteriorDist>(m, "PosteriorDist")
        .def_static("from_mass", &PosteriorDist::from_mass)
        .def_readonly("grid", &PosteriorDist::grid)
        .def_readonly("mass", &PosteriorDist::mass)
        .def_readonly("cdf", &PosteriorDist::cdf);
    m.def("posterior_parameter_distribution", &posterior_parameter_distribution);
    m.def(
        "point_estimate",
        [](const PosteriorDist& d, const std::string& kind, double p, std::vector<double> c) {
            return point_estimate(d, estimator_from(kind, p, std::move(c)));
        },
        py::arg("dist"), py::arg("kind") = "mean", py::arg("p") = 0.5, py::arg("c") = std::vector<double>{});
    m.def("credible_interval", [](const PosteriorDist& d, double alpha) {
        const auto ci = credible_interval(d, alpha);
        return py::make_tuple(ci.lo, ci.hi, ci.coverage);
    });
    m.def("hqpd_set", [](const PosteriorDist& d, double alpha) {
        const auto s = hqpd_set(d, alpha);
        return py::make_tuple(s.values, s.coverage);
    });
    m.def("hypothesis_test", &hypothesis_test, py::arg("dist"), py::arg("cells"), py::arg("costs"),
          py::arg("conventional") = false);

    m.def(
        "bayes_solution",
        [](const ParamModel& model, const std::vector<KrausInstrument>& insts, const std::vector<double>& actions) {
            std::vector<Action> set(actions.begin(), actions.end());
            const auto rule = bayes_solution_enumerate(model, insts, WeightedQuadraticLoss{}, set);
            std::vector<double> out;
            for (const auto& a : rule.actions) out.push_back(std::get<double>(a));
            return out;
        },
        "Pointwise Bayes rule under quadratic loss over a finite set of point actions.");

    py::class_<SpectrumReport>(m, "SpectrumReport")
        .def_readonly("eigenvalues", &SpectrumReport::eigenvalues)
        .def_readonly("gap", &SpectrumReport::gap)
        .def_readonly("fixed_point", &SpectrumReport::fixed_point)
        .def_readonly("peripheral_count", &SpectrumReport::peripheral_count);
    m.def("channel_spectrum", py::overload_cast<const KrausInstrument&>(&channel_spectrum));
    m.def(
        "convergence_fit",
        [](const KrausInstrument& inst, const DensityMatrix& rho, std::size_t lo, std::size_t hi) {
            const auto f = convergence_fit(inst, rho, lo, hi);
            return py::dict(py::arg("rate") = f.fit.rate, py::arg("intercept") = f.fit.intercept,
                            py::arg("predicted_rate") = f.predicted_rate, py::arg("distances") = f.distances);
        });
    m.def("nonconvergence_witness", [](const CMatrix& u, const DensityMatrix& rho, std::size_t n, double threshold) {
        const auto w = nonconvergence_witness(u, rho, n, threshold);
        return py::make_tuple(w.witnessed, w.min_step_distance);
    });
}
