#include "aggpi/cli.hpp"
#include "aggpi/config.hpp"
#include "aggpi/dgp.hpp"
#include "aggpi/error.hpp"
#include "aggpi/harness.hpp"
#include "aggpi/intervals.hpp"
#include "aggpi/linmodel.hpp"
#include "aggpi/nagaev.hpp"
#include "aggpi/rng.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace aggpi;

namespace {

py::dict fit_to_dict(const FitResult& fit)
{
    py::dict d;
    d["beta"] = fit.beta;
    d["intercept"] = fit.intercept;
    d["residuals"] = fit.residuals;
    d["estimator"] = std::string(to_string(fit.estimator));
    d["lambda"] = fit.lambda ? py::cast(*fit.lambda) : py::none();
    return d;
}

CoverageReport run_experiment_json(const std::string& text, unsigned jobs)
{
    const auto cfg = config::experiment_from_json(config::parse(text, "<python>"));
    py::gil_scoped_release release;
    return run_coverage_experiment(cfg, jobs);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Prediction intervals for time-aggregated forecasts.";

    // kept alive for the interpreter's lifetime; instances carry the error code name
    static py::handle error_type = py::exception<Error>(m, "Error", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    py::class_<PredictionInterval>(m, "PredictionInterval")
        .def_readonly("lower", &PredictionInterval::lower)
        .def_readonly("upper", &PredictionInterval::upper)
        .def_readonly("level", &PredictionInterval::level)
        .def_readonly("m", &PredictionInterval::horizon_m)
        .def_readonly("point_forecast", &PredictionInterval::point_forecast)
        .def_property_readonly("method", [](const PredictionInterval& pi) { return std::string(to_string(pi.method)); })
        .def_property_readonly("width", &PredictionInterval::width)
        .def("contains", &PredictionInterval::contains)
        .def("__repr__", [](const PredictionInterval& pi) {
            std::ostringstream s;
            s << "PredictionInterval(" << to_string(pi.method) << ", m=" << pi.horizon_m << ", [" << pi.lower << ", "
              << pi.upper << "])";
            return s.str();
        });

    m.def("pi_clt", [](const std::vector<double>& e, std::size_t m, double alpha, std::optional<std::size_t> l) {
        return pi_clt(e, m, alpha, l);
    }, py::arg("e"), py::arg("m"), py::arg("alpha") = 0.1, py::arg("block_len") = py::none());

    m.def("pi_qtl", [](const std::vector<double>& e, std::size_t m, double alpha) { return pi_qtl(e, m, alpha); },
          py::arg("e"), py::arg("m"), py::arg("alpha") = 0.1);

    m.def("pi_adj", [](const std::vector<double>& e, std::size_t m, double alpha, std::size_t B,
                       std::optional<double> block_len, std::uint64_t seed) {
        BootstrapConfig boot;
        boot.B = B;
        boot.expected_block_len = block_len;
        boot.rng_seed = seed;
        py::gil_scoped_release release;
        return pi_adj(e, m, alpha, boot);
    }, py::arg("e"), py::arg("m"), py::arg("alpha") = 0.1, py::arg("B") = 1000, py::arg("block_len") = py::none(),
       py::arg("seed") = 0);

    m.def("longrun_sd", [](const std::vector<double>& e, std::size_t l) {
        const auto r = longrun_sd_subsample(e, l);
        return py::make_tuple(r.sigma_tilde, r.kappa);
    }, py::arg("e"), py::arg("block_len"), "Subsampling estimate of the long-run sd; returns (sigma, n_blocks).");

    m.def("alpha_stable", [](double alpha, std::size_t size, std::uint64_t seed) {
        Rng rng(seed);
        Eigen::VectorXd x(static_cast<Eigen::Index>(size));
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = sample_alpha_stable(alpha, rng);
        return x;
    }, py::arg("alpha"), py::arg("size"), py::arg("seed") = 0);

    m.def("fit_ols", [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return fit_to_dict(fit_ols(DesignMatrix(X), y));
    }, py::arg("X"), py::arg("y"));
    m.def("fit_lad", [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return fit_to_dict(fit_lad(DesignMatrix(X), y));
    }, py::arg("X"), py::arg("y"));
    m.def("fit_lasso", [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
        return fit_to_dict(fit_lasso(DesignMatrix(X).standardize(), y, lambda));
    }, py::arg("X"), py::arg("y"), py::arg("lam"), "LASSO on the standardized design; beta is on the raw scale.");
    m.def("fit_lasso_cv", [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds) {
        FitResult fit;
        {
            py::gil_scoped_release release;
            fit = fit_lasso_cv(DesignMatrix(X).standardize(), y, folds);
        }
        return fit_to_dict(fit);
    }, py::arg("X"), py::arg("y"), py::arg("folds") = 10);

    m.def("nagaev_bound", [](const std::vector<double>& a, const std::vector<double>& b, double q, double x,
                             const std::string& which, double eps_q_moment, double eps_second_moment,
                             std::optional<double> c_q, double C1, double C2, double beta) {
        NagaevConstants k{eps_q_moment, eps_second_moment, c_q, C1, C2, beta};
        const auto r = nagaev_bound_linear(a, b, q, x, parse_nagaev_case(which), k);
        return py::make_tuple(r.poly_term, r.exp_term);
    }, py::arg("a"), py::arg("b"), py::arg("q"), py::arg("x"), py::arg("case"), py::arg("eps_q_moment") = 1.0,
       py::arg("eps_second_moment") = 1.0, py::arg("c_q") = py::none(), py::arg("C1") = 1.0, py::arg("C2") = 1.0,
       py::arg("beta") = 0.5, "Returns (poly_term, exp_term).");

    m.def("preset_names", &preset_names);

    m.def("_run_experiment", [](const std::string& text, unsigned jobs) {
        const auto report = run_experiment_json(text, jobs);
        py::list rows;
        for (const auto& c : report.cells) {
            py::dict d;
            d["estimator"] = std::string(to_string(c.key.estimator));
            d["method"] = std::string(to_string(c.key.method));
            d["m"] = c.key.m;
            d["n_reps"] = c.n_reps;
            d["n_na"] = c.n_na;
            d["hit_count"] = c.hit_count;
            d["coverage_pct"] = c.coverage_pct;
            d["mean_width"] = c.mean_width;
            rows.append(d);
        }
        return rows;
    }, py::arg("config_json"), py::arg("jobs") = 1);

    m.def("_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "aggpi");
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
