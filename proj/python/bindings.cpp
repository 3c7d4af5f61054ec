#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nlinv/checks.hpp"
#include "nlinv/cli.hpp"
#include "nlinv/errors.hpp"
#include "nlinv/experiments.hpp"
#include "nlinv/lowerbound.hpp"
#include "nlinv/tikhonov.hpp"

namespace py = pybind11;
using namespace nlinv;

namespace {

std::span<const double> span_of(const std::vector<double>& v) { return {v.data(), v.size()}; }

// pybind11 holders cannot point to const; the library shares immutable objects through const pointers.
using GridHolder = std::shared_ptr<Grid>;
using H1Holder = std::shared_ptr<H1Space>;
using H2Holder = std::shared_ptr<H2Space>;

template <class T>
std::shared_ptr<T> mut(const std::shared_ptr<const T>& p) {
  return std::const_pointer_cast<T>(p);
}

}  // namespace

PYBIND11_MODULE(_nlinv, m) {
  m.doc() = "Tikhonov regularization for nonlinear inverse learning in RKHS";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<RateStudyError>(m, "RateStudyError", PyExc_RuntimeError);

  py::class_<Interval>(m, "Interval")
      .def(py::init([](double a, double b) { return Interval{a, b}; }), py::arg("a") = 0.0, py::arg("b") = 1.0)
      .def_readonly("a", &Interval::a)
      .def_readonly("b", &Interval::b);

  py::class_<Kernel>(m, "Kernel")
      .def_static("gaussian", &Kernel::gaussian, py::arg("lengthscale"), py::arg("domain") = Interval{})
      .def_static("sobolev1d", &Kernel::sobolev1d, py::arg("order"), py::arg("domain") = Interval{})
      .def_static("matern", &Kernel::matern, py::arg("nu"), py::arg("lengthscale"), py::arg("domain") = Interval{})
      .def("__call__", &Kernel::operator(), py::arg("x"), py::arg("y"))
      .def_property_readonly("family", [](const Kernel& k) { return to_string(k.family()); })
      .def_property_readonly("domain", &Kernel::domain);

  py::class_<Grid, GridHolder>(m, "Grid")
      .def_static("trapezoid", [](Interval d, int n, bool normalize) { return mut(make_trapezoid_grid(d, n, normalize)); },
                  py::arg("domain"), py::arg("n"), py::arg("normalize") = false)
      .def_readonly("nodes", &Grid::nodes)
      .def_readonly("weights", &Grid::weights)
      .def_readonly("normalized", &Grid::normalized)
      .def("__len__", &Grid::size);

  py::class_<H1Space, H1Holder>(m, "H1Space")
      .def_static("weighted_l2", [](GridHolder g) { return mut(H1Space::weighted_l2(g)); }, py::arg("grid"))
      .def_static("rkhs", [](GridHolder g, const Kernel& k) { return mut(H1Space::rkhs(g, k)); }, py::arg("grid"),
                  py::arg("kernel"))
      .def_property_readonly("grid", [](const H1Space& h) { return mut(h.grid_ptr()); })
      .def("inner", &H1Space::inner);

  py::class_<H2Space, H2Holder>(m, "H2Space")
      .def(py::init([](const Kernel& k, GridHolder g) { return std::make_shared<H2Space>(k, g); }), py::arg("kernel"),
           py::arg("grid"))
      .def_property_readonly("kappa", &H2Space::kappa)
      .def_property_readonly("gram", &H2Space::gram)
      .def("norm", &H2Space::norm)
      .def("evaluate", [](const H2Space& h, const Vector& v, const std::vector<double>& x) {
        return h.evaluate(v, span_of(x));
      });

  py::class_<H1Vec>(m, "H1Vec")
      .def(py::init([](H1Holder s, Vector v) { return H1Vec(s, std::move(v)); }), py::arg("space"), py::arg("values"))
      .def_static("constant", [](H1Holder s, double c) { return H1Vec::constant(s, c); }, py::arg("space"), py::arg("c"))
      .def_static("zeros", [](H1Holder s) { return H1Vec::zeros(s); }, py::arg("space"))
      .def_property_readonly("values", [](const H1Vec& f) { return f.values(); })
      .def_property_readonly("space", [](const H1Vec& f) { return mut(f.space_ptr()); })
      .def("norm", [](const H1Vec& f) { return norm(f); })
      .def("inner", [](const H1Vec& f, const H1Vec& g) { return inner(f, g); })
      .def("__add__", [](const H1Vec& a, const H1Vec& b) { return a + b; })
      .def("__sub__", [](const H1Vec& a, const H1Vec& b) { return a - b; })
      .def("__rmul__", [](const H1Vec& a, double s) { return s * a; })
      .def("__len__", &H1Vec::size);

  py::class_<Theta>(m, "Theta")
      .def_static("named", &Theta::named, py::arg("name"))
      .def_static("callable", &Theta::callable, py::arg("fn"), py::arg("name") = "custom")
      .def_static("table", &Theta::table, py::arg("eval_nodes"), py::arg("values"))
      .def_property_readonly("name", &Theta::name);

  py::class_<ForwardOp>(m, "ForwardOp")
      .def_static("identity", [](H1Holder h1, H2Holder h2) { return ForwardOp::identity(h1, h2); }, py::arg("h1"), py::arg("h2"))
      .def_static("linear_integral", [](H1Holder h1, Theta t) { return ForwardOp::linear_integral(h1, std::move(t)); },
                  py::arg("h1"), py::arg("theta"))
      .def_static("quadratic_integral",
                  [](H1Holder h1, Theta t) { return ForwardOp::quadratic_integral(h1, std::move(t)); }, py::arg("h1"),
                  py::arg("theta"))
      .def_property_readonly("kind", [](const ForwardOp& op) { return to_string(op.kind()); })
      .def_property_readonly("is_linear", &ForwardOp::is_linear)
      .def("apply", [](const ForwardOp& op, const H1Vec& f, const std::vector<double>& x) {
        return op.apply(f, span_of(x));
      }, py::arg("f"), py::arg("x"))
      .def("deriv", [](const ForwardOp& op, const H1Vec& f, const H1Vec& g, const std::vector<double>& x) {
        return op.deriv(f, g, span_of(x));
      }, py::arg("f"), py::arg("g"), py::arg("x"))
      .def("jacobian", [](const ForwardOp& op, const H1Vec& f, const std::vector<double>& x) {
        return op.jacobian(f, span_of(x));
      }, py::arg("f"), py::arg("x"));

  m.def("taylor_remainder", &taylor_remainder, py::arg("op"), py::arg("f"), py::arg("f0"));
  m.def("population_T", &population_T, py::arg("op"), py::arg("f"));

  py::class_<IndexFunction>(m, "IndexFunction")
      .def_static("holder", &IndexFunction::holder, py::arg("r"), py::arg("domain_cap") = 1.0)
      .def_static("log_type", &IndexFunction::log_type, py::arg("p"), py::arg("nu"), py::arg("domain_cap"))
      .def("__call__", &IndexFunction::operator())
      .def("inverse", &IndexFunction::inverse)
      .def("__repr__", &IndexFunction::describe);

  py::class_<NoiseMeta>(m, "NoiseMeta")
      .def_property_readonly("model", [](const NoiseMeta& n) { return to_string(n.model); })
      .def_readonly("sigma", &NoiseMeta::sigma)
      .def_readonly("M", &NoiseMeta::M)
      .def_readonly("Sigma", &NoiseMeta::Sigma_bernstein);

  py::class_<SampleSet>(m, "SampleSet")
      .def(py::init([](std::vector<double> x, std::vector<double> y) {
        SampleSet s;
        s.x = std::move(x);
        s.y = std::move(y);
        s.validate();
        return s;
      }), py::arg("x"), py::arg("y"))
      .def_readonly("x", &SampleSet::x)
      .def_readonly("y", &SampleSet::y)
      .def_readonly("seed", &SampleSet::seed)
      .def_readonly("noise", &SampleSet::noise)
      .def_property_readonly("m", &SampleSet::m);

  m.def("simulate", [](const ForwardOp& op, const H1Vec& f, int count, double sigma, std::uint64_t seed,
                       const std::string& model) {
    return simulate(op, f, count, sigma, seed, noise_model_from_string(model));
  }, py::arg("op"), py::arg("f_rho"), py::arg("m"), py::arg("noise_sigma"), py::arg("seed"),
        py::arg("noise_model") = "gaussian");

  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init<>())
      .def_readwrite("max_iters", &SolveOptions::max_iters)
      .def_readwrite("step_tol", &SolveOptions::step_tol)
      .def_readwrite("damping", &SolveOptions::damping)
      .def_readwrite("damping_scale", &SolveOptions::damping_scale)
      .def_readwrite("multistart", &SolveOptions::multistart)
      .def_readwrite("multistart_radius", &SolveOptions::multistart_radius)
      .def_readwrite("multistart_seed", &SolveOptions::multistart_seed);

  py::class_<TikhonovFit>(m, "TikhonovFit")
      .def_readonly("solution", &TikhonovFit::solution)
      .def_readonly("lambda_", &TikhonovFit::lambda)
      .def_readonly("objective_trace", &TikhonovFit::objective_trace)
      .def_readonly("gn_iters", &TikhonovFit::gn_iters)
      .def_readonly("converged", &TikhonovFit::converged)
      .def_readonly("residual_norm", &TikhonovFit::residual_norm)
      .def_readonly("h1_penalty", &TikhonovFit::h1_penalty)
      .def_readonly("message", &TikhonovFit::message);

  m.def("tikhonov_objective", &tikhonov_objective, py::arg("op"), py::arg("data"), py::arg("f"), py::arg("fbar"),
        py::arg("lambda_"), py::arg("diagnostics") = false);
  m.def("tikhonov_solve", &tikhonov_solve, py::arg("op"), py::arg("data"), py::arg("fbar"), py::arg("lambda_"),
        py::arg("options") = SolveOptions{});

  py::class_<EffDim>(m, "EffDim")
      .def_readonly("lambda_", &EffDim::lambda)
      .def_readonly("value", &EffDim::value)
      .def_readonly("trivial_bound", &EffDim::trivial_bound)
      .def_readonly("decay_bound", &EffDim::decay_bound);
  m.def("effective_dimension", [](const Vector& eigs, double lambda, std::optional<std::pair<double, double>> decay) {
    std::optional<DecayParams> d;
    if (decay) d = DecayParams{decay->first, decay->second};
    return effective_dimension(eigs, lambda, d);
  }, py::arg("eigenvalues"), py::arg("lambda_"), py::arg("decay") = py::none());
  m.def("empirical_covariance", &empirical_covariance, py::arg("kernel"), py::arg("grid"));

  py::class_<SourceSpec>(m, "SourceSpec")
      .def(py::init<>())
      .def_readwrite("phi", &SourceSpec::phi)
      .def_readwrite("R", &SourceSpec::R)
      .def_readwrite("g_seed", &SourceSpec::g_seed)
      .def_readwrite("g_norm", &SourceSpec::g_norm)
      .def_readwrite("fixedpoint_tol", &SourceSpec::fixedpoint_tol)
      .def_readwrite("fixedpoint_iters", &SourceSpec::fixedpoint_iters);

  py::class_<SourceTruth>(m, "SourceTruth")
      .def_readonly("f_rho", &SourceTruth::f_rho)
      .def_readonly("g", &SourceTruth::g)
      .def_readonly("g_norm", &SourceTruth::g_norm)
      .def_readonly("halvings", &SourceTruth::halvings)
      .def_readonly("iterations", &SourceTruth::iterations)
      .def_readonly("residual", &SourceTruth::residual);
  m.def("build_source_truth", &build_source_truth, py::arg("op"), py::arg("fbar"), py::arg("spec"));

  py::class_<RateStudyConfig>(m, "RateStudyConfig")
      .def(py::init<>())
      .def_readwrite("ms", &RateStudyConfig::ms)
      .def_readwrite("replicates", &RateStudyConfig::replicates)
      .def_readwrite("noise_sigma", &RateStudyConfig::noise_sigma)
      .def_readwrite("phi", &RateStudyConfig::phi)
      .def_readwrite("b", &RateStudyConfig::b)
      .def_readwrite("R", &RateStudyConfig::R)
      .def_readwrite("seed", &RateStudyConfig::seed)
      .def_readwrite("eta", &RateStudyConfig::eta)
      .def_readwrite("solve", &RateStudyConfig::solve)
      .def_property("lambda_rule", [](const RateStudyConfig& c) { return to_string(c.lambda_rule); },
                    [](RateStudyConfig& c, const std::string& s) { c.lambda_rule = lambda_rule_from_string(s); })
      .def_readwrite("fixed_lambdas", &RateStudyConfig::fixed_lambdas);

  py::class_<RateStudyRow>(m, "RateStudyRow")
      .def_readonly("m", &RateStudyRow::m)
      .def_readonly("replicate", &RateStudyRow::replicate)
      .def_readonly("seed", &RateStudyRow::seed)
      .def_readonly("lambda_", &RateStudyRow::lambda)
      .def_readonly("err_h1", &RateStudyRow::err_h1)
      .def_readonly("err_pred", &RateStudyRow::err_pred)
      .def_readonly("converged", &RateStudyRow::converged)
      .def_readonly("gn_iters", &RateStudyRow::gn_iters)
      .def_readonly("condition_held", &RateStudyRow::condition_held);

  py::class_<RateStudyResult>(m, "RateStudyResult")
      .def_readonly("rows", &RateStudyResult::rows)
      .def_readonly("ms", &RateStudyResult::ms)
      .def_readonly("median_h1", &RateStudyResult::median_h1)
      .def_readonly("median_pred", &RateStudyResult::median_pred)
      .def_readonly("fitted_slope_h1", &RateStudyResult::fitted_slope_h1)
      .def_readonly("fitted_slope_pred", &RateStudyResult::fitted_slope_pred)
      .def_readonly("theoretical_h1", &RateStudyResult::theoretical_h1)
      .def_readonly("theoretical_pred", &RateStudyResult::theoretical_pred)
      .def_readonly("b", &RateStudyResult::b)
      .def_readonly("failures", &RateStudyResult::failures);
  m.def("run_rate_study", [](const RateStudyConfig& cfg, const ForwardOp& op, const H2Space& h2, const H1Vec& fbar,
                             const H1Vec& f_rho, int workers) {
    py::gil_scoped_release release;
    return run_rate_study(cfg, op, h2, fbar, f_rho, cli::make_pool_executor(workers));
  }, py::arg("config"), py::arg("op"), py::arg("h2"), py::arg("fbar"), py::arg("f_rho"), py::arg("workers") = 1);

  m.def("neighborhood_condition_check", &neighborhood_condition_check, py::arg("m"), py::arg("lambda_"),
        py::arg("kappa"), py::arg("L"), py::arg("M"), py::arg("Sigma"), py::arg("d"), py::arg("eta"));

  m.def("discrete_kl", py::overload_cast<const Vector&, const Vector&>(&discrete_kl), py::arg("p"), py::arg("q"));

  m.def("run_checks", [](const std::string& suite, std::uint64_t seed) {
    py::list out;
    for (const CheckResult& r : run_checks(suite, seed))
      out.append(py::dict(py::arg("suite") = r.suite, py::arg("name") = r.name, py::arg("passed") = r.passed,
                          py::arg("detail") = r.detail));
    return out;
  }, py::arg("suite"), py::arg("seed") = 0);
  m.def("check_suites", &check_suites);

  m.def("cli", [](const std::vector<std::string>& args) {
    std::vector<std::string> full{"nlinv"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
