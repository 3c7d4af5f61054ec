#include "nlinv/config.hpp"

#include <cmath>

#include "nlinv/errors.hpp"

namespace nlinv {

namespace {

template <class F>
auto wrap(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

Theta read_theta(ObjectReader& opr, const Grid& grid, const std::filesystem::path& base_dir) {
  const Json& t = opr.raw("theta");
  const std::string key = opr.key_path("theta");
  if (t.is_string()) {
    const std::string name = t.get<std::string>();
    return wrap(key, [&] { return Theta::named(name); });
  }
  ObjectReader tr(t, key);
  std::filesystem::path p = tr.string("csv");
  tr.finish();
  if (p.is_relative()) p = base_dir / p;
  return load_theta_csv(p, grid);
}

}  // namespace

H1Vec read_h1_vector(ObjectReader r, const H1SpacePtr& space) {
  if (r.has("constant") == r.has("values")) throw ConfigError(r.path() + ": give exactly one of constant, values");
  H1Vec out = H1Vec::zeros(space);
  if (r.has("constant")) {
    out = H1Vec::constant(space, r.number("constant"));
  } else {
    const auto v = r.numbers("values");
    if (static_cast<Eigen::Index>(v.size()) != space->size())
      throw ConfigError(r.key_path("values") + ": expected one value per grid node");
    out.values() = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  r.finish();
  return out;
}

Problem read_problem(ObjectReader& root, const std::filesystem::path& base_dir) {
  const Json empty = Json::object();
  GridPtr grid = grid_from_json(root.has("grid") ? root.raw("grid") : empty, root.key_path("grid"));
  const Kernel kernel = kernel_from_json(root.raw("kernel"), root.key_path("kernel"));
  if (kernel.domain().a != grid->domain.a || kernel.domain().b != grid->domain.b)
    throw ConfigError(root.key_path("kernel") + ".domain: must match the grid interval");

  const std::string norm = root.string_or("h1_norm", "weighted_l2");
  H1SpacePtr h1;
  if (norm == "weighted_l2")
    h1 = H1Space::weighted_l2(grid);
  else if (norm == "rkhs")
    h1 = wrap(root.key_path("h1_norm"), [&] { return H1Space::rkhs(grid, kernel); });
  else
    throw ConfigError(root.key_path("h1_norm") + ": expected weighted_l2 or rkhs");
  auto h2 = std::make_shared<const H2Space>(kernel, grid);

  ObjectReader opr = root.object("operator");
  const std::string kind_s = opr.string("kind");
  const OpKind kind = wrap(opr.key_path("kind"), [&] { return op_kind_from_string(kind_s); });
  std::shared_ptr<ForwardOp> op;
  if (kind == OpKind::identity) {
    op = std::make_shared<ForwardOp>(ForwardOp::identity(h1, h2));
  } else {
    Theta theta = read_theta(opr, *grid, base_dir);
    op = std::make_shared<ForwardOp>(kind == OpKind::linear_integral ? ForwardOp::linear_integral(h1, theta)
                                                                      : ForwardOp::quadratic_integral(h1, theta));
  }
  if (opr.has("lipschitz_L")) op->lipschitz_L = opr.positive("lipschitz_L");
  if (opr.has("gamma")) op->nonlinearity_gamma = opr.positive("gamma");
  if (opr.has("ball_radius_d")) op->ball_radius_d = opr.positive("ball_radius_d");
  opr.finish();

  H1Vec fbar = root.has("fbar") ? read_h1_vector(root.object("fbar"), h1) : H1Vec::zeros(h1);
  return Problem{kernel, grid, h1, h2, op, fbar};
}

IndexFunction read_index_function(ObjectReader r) {
  const std::string fam = r.string_or("family", "holder");
  IndexFunction phi = IndexFunction::holder(0.5);
  if (fam == "holder") {
    const double rr = r.positive("r");
    const double cap = r.number_or("domain_cap", 1.0);
    phi = wrap(r.path(), [&] { return IndexFunction::holder(rr, cap); });
  } else if (fam == "log_type") {
    const long long p = r.integer("p");
    const double nu = r.number("nu");
    const double cap = r.number("domain_cap");
    phi = wrap(r.path(), [&] { return IndexFunction::log_type(static_cast<int>(p), nu, cap); });
  } else {
    throw ConfigError(r.key_path("family") + ": expected holder or log_type");
  }
  r.finish();
  return phi;
}

Json index_function_to_json(const IndexFunction& phi) {
  if (phi.family() == IndexFunction::Family::holder)
    return Json{{"family", "holder"}, {"r", phi.r()}, {"domain_cap", phi.domain_cap()}};
  return Json{{"family", "log_type"}, {"p", phi.p()}, {"nu", phi.nu()}, {"domain_cap", phi.domain_cap()}};
}

SolveOptions read_solve_options(ObjectReader r) {
  SolveOptions o;
  o.max_iters = static_cast<int>(r.integer_or("max_iters", o.max_iters));
  if (o.max_iters < 1) throw ConfigError(r.key_path("max_iters") + ": must be at least 1");
  if (r.has("step_tol")) o.step_tol = r.positive("step_tol");
  o.damping = r.boolean_or("damping", o.damping);
  if (r.has("damping_scale")) o.damping_scale = r.positive("damping_scale");
  o.multistart = static_cast<int>(r.integer_or("multistart", o.multistart));
  if (o.multistart < 0) throw ConfigError(r.key_path("multistart") + ": must be non-negative");
  if (r.has("multistart_radius")) o.multistart_radius = r.positive("multistart_radius");
  o.multistart_seed = static_cast<std::uint64_t>(r.integer_or("multistart_seed", 0));
  r.finish();
  return o;
}

SourceSpec read_source_spec(ObjectReader r) {
  SourceSpec s;
  s.phi = read_index_function(r.object("phi"));
  s.R = r.positive("R");
  s.g_seed = static_cast<std::uint64_t>(r.integer_or("g_seed", 0));
  if (r.has("g_norm")) s.g_norm = r.positive("g_norm");
  if (s.g_norm > s.R) throw ConfigError(r.key_path("g_norm") + ": must not exceed R");
  if (r.has("fixedpoint_tol")) s.fixedpoint_tol = r.positive("fixedpoint_tol");
  s.fixedpoint_iters = static_cast<int>(r.integer_or("fixedpoint_iters", s.fixedpoint_iters));
  if (s.fixedpoint_iters < 1) throw ConfigError(r.key_path("fixedpoint_iters") + ": must be at least 1");
  if (r.has("profile")) {
    const std::string p = r.string("profile");
    s.profile = wrap(r.key_path("profile"), [&] { return g_profile_from_string(p); });
  }
  r.finish();
  return s;
}

RateStudyConfig read_rate_study(ObjectReader r) {
  RateStudyConfig c;
  for (double m : r.numbers("ms")) {
    if (m != std::floor(m) || m < 1) throw ConfigError(r.key_path("ms") + ": expected positive integers");
    c.ms.push_back(static_cast<int>(m));
  }
  c.replicates = static_cast<int>(r.integer_or("replicates", c.replicates));
  c.noise_sigma = r.number_or("noise_sigma", c.noise_sigma);
  if (c.noise_sigma < 0.0) throw ConfigError(r.key_path("noise_sigma") + ": must be non-negative");
  if (r.has("noise_model")) {
    const std::string nm = r.string("noise_model");
    c.noise_model = wrap(r.key_path("noise_model"), [&] { return noise_model_from_string(nm); });
  }
  if (r.has("lambda_rule")) {
    const std::string lr = r.string("lambda_rule");
    c.lambda_rule = wrap(r.key_path("lambda_rule"), [&] { return lambda_rule_from_string(lr); });
  }
  if (r.has("b")) c.b = r.positive("b");
  if (r.has("fixed_lambdas")) c.fixed_lambdas = r.numbers("fixed_lambdas");
  if (r.has("eta")) c.eta = r.positive("eta");
  r.finish();
  wrap(r.path(), [&] {
    c.validate();
    return 0;
  });
  return c;
}

}  // namespace nlinv
