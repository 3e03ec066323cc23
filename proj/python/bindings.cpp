/*
   Copyright 2026 The degsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "degsde/coupled.hpp"
#include "degsde/error.hpp"
#include "degsde/experiments.hpp"
#include "degsde/htransform.hpp"
#include "degsde/mc_stats.hpp"
#include "degsde/reflected.hpp"
#include "degsde/rng_paths.hpp"
#include "degsde/speed_timechange.hpp"

#include <algorithm>
#include <cmath>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace degsde;

namespace {

py::array_t<double> array(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

SeedId seed_of(std::uint64_t master, std::uint64_t path) { return {master, path}; }

py::dict path_dict(const DiffusionPath& p) {
    py::dict d;
    d["times"] = array(p.times);
    d["values"] = array(p.values);
    py::list hits;
    for (const auto& h : p.hits) hits.append(py::make_tuple(h.level, h.time));
    d["hits"] = hits;
    return d;
}

ConditioningMode conditioning_mode(const std::string& s) {
    if (s == "q1") return ConditioningMode::q1;
    if (s == "q0") return ConditioningMode::q0;
    if (s == "qinf") return ConditioningMode::qinf;
    throw ParameterError("mode must be q1, q0 or qinf");
}

CoupledMode coupled_mode(const std::string& s) {
    if (s == "plain") return CoupledMode::plain;
    if (s == "q1") return CoupledMode::q1;
    if (s == "q0") return CoupledMode::q0;
    throw ParameterError("mode must be plain, q1 or q0");
}

CoefficientPair coefficients(const std::string& kind, double alpha, double a0, double a1, double b0, double b1) {
    CoefficientSpec s;
    s.kind = parse_coefficient_kind(kind);
    s.alpha = alpha;
    s.a0 = a0;
    s.a1 = a1;
    s.b0 = b0;
    s.b1 = b1;
    return make_coefficients(s);
}

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["stderr"] = e.stderr_;
    d["n"] = e.n;
    d["lower"] = e.lower();
    d["upper"] = e.upper();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Simulation of degenerate one-dimensional SDEs";

    static py::exception<Error> base(m, "Error");
    static py::exception<ParameterError> parameter(m, "ParameterError", base.ptr());
    static py::exception<DomainError> domain(m, "DomainError", base.ptr());
    static py::exception<PreconditionError> precondition(m, "PreconditionError", base.ptr());
    static py::exception<StepFailure> step(m, "StepFailure", base.ptr());
    static py::exception<HorizonUnreachable> horizon(m, "HorizonUnreachable", base.ptr());
    static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParameterError& e) {
            PyErr_SetString(parameter.ptr(), e.what());
        } catch (const DomainError& e) {
            PyErr_SetString(domain.ptr(), e.what());
        } catch (const PreconditionError& e) {
            PyErr_SetString(precondition.ptr(), e.what());
        } catch (const StepFailure& e) {
            PyErr_SetString(step.ptr(), e.what());
        } catch (const HorizonUnreachable& e) {
            PyErr_SetString(horizon.ptr(), e.what());
        } catch (const ConfigError& e) {
            PyErr_SetString(config.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(base.ptr(), e.what());
        }
    });

    m.def("gen_path", [](std::uint64_t seed, std::uint64_t path, std::size_t n, double dt, double w0) {
        return array(gen_path(seed_of(seed, path), n, dt, w0).increments);
    }, py::arg("seed"), py::arg("path"), py::arg("n"), py::arg("dt"), py::arg("w0") = 0.0,
       "Brownian increments of path `path` under master seed `seed`.");
    m.def("bridge_crossing_prob", &bridge_crossing_prob, py::arg("w_left"), py::arg("w_right"), py::arg("dt"),
          py::arg("level"), py::arg("sigma") = 1.0);

    m.def("estimate", [](const std::vector<double>& v, double level) { return estimate_dict(estimate(v, level)); },
          py::arg("samples"), py::arg("ci_level") = 0.99);

    m.def("segment_speed_integral", &segment_speed_integral, py::arg("b0"), py::arg("b1"), py::arg("h"), py::arg("alpha"));
    m.def("time_change_solution", [](std::uint64_t seed, std::uint64_t path, double x, double alpha, double horizon,
                                     double base_dt, double out_dt) {
        TimeChangeOptions o;
        o.out_dt = out_dt;
        const auto n = static_cast<std::size_t>(std::ceil(horizon / base_dt)) + 1;
        return path_dict(time_change_solution(gen_path(seed_of(seed, path), n, base_dt, x), alpha, horizon, o));
    }, py::arg("seed"), py::arg("path"), py::arg("x"), py::arg("alpha"), py::arg("horizon"),
       py::arg("base_dt") = 1e-4, py::arg("out_dt") = 1e-3);
    m.def("solve_until_exit", [](std::uint64_t seed, std::uint64_t path, double x, double alpha, double lower,
                                 double upper, double base_dt, double out_dt) {
        return path_dict(solve_until_exit(seed_of(seed, path), x, alpha, lower, upper, base_dt, out_dt));
    }, py::arg("seed"), py::arg("path"), py::arg("x"), py::arg("alpha"), py::arg("lower"), py::arg("upper"),
       py::arg("base_dt") = 1e-4, py::arg("out_dt") = 1e-3);

    m.def("drift", [](const std::string& mode, double x, double alpha) { return drift(conditioning_mode(mode), x, alpha); },
          py::arg("mode"), py::arg("x"), py::arg("alpha"));
    m.def("simulate_conditioned", [](const std::string& mode, double x0, double alpha, std::uint64_t seed,
                                     std::uint64_t path, double dt, double rel_step, std::vector<double> levels) {
        ConditionedOptions o;
        o.dt = dt;
        o.rel_step = rel_step;
        o.levels = std::move(levels);
        return path_dict(simulate_conditioned(conditioning_mode(mode), x0, alpha, o, seed_of(seed, path)));
    }, py::arg("mode"), py::arg("x0"), py::arg("alpha"), py::arg("seed"), py::arg("path"), py::arg("dt") = 1e-4,
       py::arg("rel_step") = 0.01, py::arg("levels") = std::vector<double>{});
    m.def("green_bessel3", &green_bessel3, py::arg("x"), py::arg("y"));
    m.def("green_interval", &green_interval, py::arg("y"), py::arg("z"), py::arg("eta"), py::arg("alpha"));
    m.def("green_additive_integral", &green_additive_integral, py::arg("x"), py::arg("alpha"), py::arg("tol") = 1e-12);
    m.def("mean_exit_time", &mean_exit_time, py::arg("y"), py::arg("eta"), py::arg("alpha"), py::arg("tol") = 1e-13);
    m.def("bessel3_hit_prob", &bessel3_hit_prob, py::arg("x"), py::arg("a"));

    m.def("euler_coupled", [](double x0, double y0, double alpha, const std::string& mode, std::uint64_t seed,
                              std::uint64_t path, double dt, double rel_step) {
        CoupledOptions o;
        o.dt = dt;
        o.rel_step = rel_step;
        const auto s = euler_coupled(x0, y0, alpha, coupled_mode(mode), o, seed_of(seed, path));
        py::dict d;
        d["times"] = array(s.times);
        d["x"] = array(s.x);
        d["y"] = array(s.y);
        d["dw"] = array(s.dw);
        d["reason"] = std::string(to_string(s.reason));
        d["r_identity_residual"] = s.x.front() > 0.0 && s.y.front() > 0.0 ? py::cast(r_identity_residual(s)) : py::none();
        return d;
    }, py::arg("x0"), py::arg("y0"), py::arg("alpha"), py::arg("mode"), py::arg("seed"), py::arg("path"),
       py::arg("dt") = 1e-4, py::arg("rel_step") = 0.0);
    m.def("chasing", [](double x0, double y0, double alpha, double delta, std::size_t runs, std::uint64_t seed,
                        bool rejection) {
        ChasingOptions o;
        o.runs = runs;
        o.rejection = rejection;
        o.coupled.rel_step = 0.01;
        const auto r = chasing_experiment(x0, y0, alpha, delta, o, seed);
        py::dict d;
        d["p_close"] = estimate_dict(r.p_close);
        d["mean_y_top"] = estimate_dict(r.mean_y_top);
        d["mean_neg_y_bottom"] = estimate_dict(r.mean_neg_y_bottom);
        d["n_top"] = r.n_top;
        d["n_bottom"] = r.n_bottom;
        d["excluded"] = r.excluded;
        if (r.p_top) d["p_top"] = estimate_dict(*r.p_top);
        return d;
    }, py::arg("x0"), py::arg("y0"), py::arg("alpha"), py::arg("delta"), py::arg("runs"), py::arg("seed"),
       py::arg("rejection") = false);

    m.def("skorokhod_map", [](const std::vector<double>& psi) {
        const auto r = skorokhod_map(psi);
        return py::make_tuple(array(r.reflected), array(r.local_time));
    }, py::arg("psi"));
    m.def("scale_function", [](double x, const std::string& kind, double alpha, double a0, double a1, double b0,
                               double b1, double tol) {
        return scale_function(coefficients(kind, alpha, a0, a1, b0, b1), x, tol);
    }, py::arg("x"), py::arg("kind") = "constant", py::arg("alpha") = 0.25, py::arg("a0") = 1.0, py::arg("a1") = 0.0,
       py::arg("b0") = 0.0, py::arg("b1") = 0.0, py::arg("tol") = 1e-10);
    m.def("scale_inverse", [](double s, const std::string& kind, double alpha, double a0, double a1, double b0,
                              double b1, double tol) {
        return scale_inverse(coefficients(kind, alpha, a0, a1, b0, b1), s, tol);
    }, py::arg("s"), py::arg("kind") = "constant", py::arg("alpha") = 0.25, py::arg("a0") = 1.0, py::arg("a1") = 0.0,
       py::arg("b0") = 0.0, py::arg("b1") = 0.0, py::arg("tol") = 1e-10);
    m.def("simulate_reflected", [](double x0, double dt, double horizon, std::uint64_t seed, std::uint64_t path,
                                   const std::string& kind, double alpha, double a0, double a1, double b0, double b1) {
        const auto p = simulate_reflected(coefficients(kind, alpha, a0, a1, b0, b1), x0, dt, horizon, seed_of(seed, path));
        py::dict d;
        d["times"] = array(p.times);
        d["x"] = array(p.x);
        d["local_time"] = array(p.local_time);
        return d;
    }, py::arg("x0"), py::arg("dt"), py::arg("horizon"), py::arg("seed"), py::arg("path"), py::arg("kind") = "constant",
       py::arg("alpha") = 0.25, py::arg("a0") = 1.0, py::arg("a1") = 0.0, py::arg("b0") = 0.0, py::arg("b1") = 0.0);

    m.def("list_experiments", [] {
        py::list out;
        for (const auto& e : list_experiments()) {
            py::dict params;
            for (const auto& p : e.params) params[py::str(p.name)] = p.default_value;
            py::dict d;
            d["name"] = e.name;
            d["anchor"] = e.anchor;
            d["summary"] = e.summary;
            d["params"] = params;
            out.append(d);
        }
        return out;
    });
    m.def("run_experiment", [](const std::string& name, const std::map<std::string, std::string>& params,
                               std::uint64_t seed) {
        ExperimentConfig c;
        c.experiment = name;
        c.params = params;
        c.seed = seed;
        ExperimentResult r;
        {
            py::gil_scoped_release release;
            r = run_experiment(c);
        }
        return py::make_tuple(to_csv(r), r.pass());
    }, py::arg("name"), py::arg("params") = std::map<std::string, std::string>{}, py::arg("seed") = 20260101,
       "Runs a registered experiment; returns (csv, passed).");
}
