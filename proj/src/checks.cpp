#include "nlinv/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlinv/errors.hpp"
#include "nlinv/experiments.hpp"
#include "nlinv/lowerbound.hpp"
#include "nlinv/rng.hpp"

namespace nlinv {

namespace {

class Recorder {
 public:
  explicit Recorder(std::string suite) : suite_(std::move(suite)) {}
  void add(const std::string& name, bool passed, const std::string& detail) {
    out_.push_back({suite_, name, passed, detail});
  }
  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  std::string suite_;
  std::vector<CheckResult> out_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix a(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) a(i, j) = standard_normal(rng);
  return a;
}

Matrix random_symmetric(Rng& rng, Eigen::Index n) {
  const Matrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.transpose());
}

std::vector<CheckResult> effdim_suite(std::uint64_t seed) {
  Recorder rec("effdim");
  const Kernel k = Kernel::sobolev1d(1);
  const GridPtr grid = make_trapezoid_grid({0.0, 1.0}, 128, true);
  const Vector eigs = sym_eig(empirical_covariance(k, *grid)).values.cwiseMax(0.0);
  const double kap = kappa(k, grid->node_span());
  const auto lambdas = log_grid(1e-4, 10.0, 30);

  bool kappa_ok = true, trivial_ok = true, mono_ok = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double lam : lambdas) {
    const EffDim e = effective_dimension(eigs, lam);
    kappa_ok = kappa_ok && e.value <= kap * kap / lam;
    trivial_ok = trivial_ok && e.value <= e.trivial_bound * (1.0 + 1e-12);
    mono_ok = mono_ok && e.value < prev;
    prev = e.value;
  }
  rec.add("kappa_bound", kappa_ok, "N(lambda) <= kappa^2 / lambda on 30 lambdas, kappa^2 = " + fmt(kap * kap));
  rec.add("trivial_bound", trivial_ok, "N(lambda) <= trace / lambda");
  rec.add("monotone_sobolev", mono_ok, "strictly decreasing in lambda on the sobolev1d spectrum");

  Rng rng(derive_seed(seed, 1));
  bool rand_ok = true;
  for (int t = 0; t < 100; ++t) {
    Vector s(40);
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::exp(3.0 * standard_normal(rng));
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    double p = std::numeric_limits<double>::infinity();
    for (double lam : lambdas) {
      const EffDim e = effective_dimension(s, lam);
      rand_ok = rand_ok && e.value <= p && e.value <= e.trivial_bound * (1.0 + 1e-12);
      p = e.value;
    }
  }
  rec.add("monotone_random", rand_ok, "100 random spectra: non-increasing and below trace / lambda");

  const int terms = 100000;
  Vector syn(terms);
  for (int i = 0; i < terms; ++i) syn(i) = 1.0 / (static_cast<double>(i + 1) * (i + 1));
  const double c = effdim_decay_constant({2.0, 1.0});
  bool decay_ok = true;
  double worst = 0.0;
  for (double lam : log_grid(1e-6, 1.0, 30)) {
    const EffDim e = effective_dimension(syn, lam, DecayParams{2.0, 1.0});
    worst = std::max(worst, e.value * std::sqrt(lam));
    decay_ok = decay_ok && e.decay_bound && e.value <= *e.decay_bound && e.value <= c / std::sqrt(lam);
  }
  rec.add("decay_bound", decay_ok, "t_n = n^-2: N(lambda) <= C lambda^-1/2, C = " + fmt(c) + ", max ratio " + fmt(worst));

  const double big = effective_dimension(eigs, 1e12).value * 1e12;
  const double small = effective_dimension(Vector::Ones(5), 1e-12).value;
  rec.add("limits", std::abs(big - eigs.sum()) < 1e-6 * eigs.sum() && std::abs(small - 5.0) < 1e-9,
          "lambda * N(lambda) -> trace as lambda -> inf; N -> rank as lambda -> 0");
  return rec.take();
}

std::vector<CheckResult> hs_suite(std::uint64_t seed) {
  Recorder rec("hs");
  Rng rng(derive_seed(seed, 2));
  struct Fn {
    const char* name;
    double lip;
    std::function<double(double)> f;
  };
  const std::vector<Fn> fns{{"abs", 1.0, [](double t) { return std::abs(t); }},
                            {"clip", 1.0, [](double t) { return std::clamp(t, -0.5, 0.5); }},
                            {"scaled_abs_clip", 2.0, [](double t) { return 2.0 * std::min(std::abs(t), 1.0); }}};
  for (const Fn& fn : fns) {
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Matrix f = random_symmetric(rng, 8);
      const double scale = std::pow(10.0, -3.0 + 4.0 * uniform01(rng));
      const Matrix ft = f + scale * random_symmetric(rng, 8);
      const HsCheck c = hs_operator_lipschitz_check(fn.lip, fn.f, f, ft);
      ok = ok && c.holds;
      worst = std::max(worst, c.ratio / fn.lip);
    }
    rec.add(std::string("operator_lipschitz_") + fn.name, ok, "100 symmetric 8x8 pairs, max ratio / L = " + fmt(worst));
  }
  bool ok = true;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Matrix b = random_matrix(rng, 6, 4);
    const double scale = std::pow(10.0, -3.0 + 4.0 * uniform01(rng));
    const Matrix bt = b + scale * random_matrix(rng, 6, 4);
    const HsCheck c = hs_sqrt_perturbation_check(b, bt);
    ok = ok && c.holds;
    worst = std::max(worst, c.ratio);
  }
  rec.add("sqrt_perturbation", ok && worst <= std::numbers::sqrt2 + 1e-9,
          "100 random 6x4 pairs, max ratio " + fmt(worst) + " <= sqrt(2)");
  return rec.take();
}

std::vector<CheckResult> concentration_suite(std::uint64_t seed) {
  Recorder rec("concentration");
  const Kernel k = Kernel::sobolev1d(1);
  for (int m : {50, 200}) {
    for (Summand s : {Summand::deterministic, Summand::scalar_gaussian, Summand::kernel_noise, Summand::whitened_noise,
                      Summand::covariance}) {
      ConcentrationConfig cfg;
      cfg.summand = s;
      cfg.m = m;
      cfg.seed = derive_seed(seed, 3, static_cast<std::uint64_t>(m) * 16 + static_cast<std::uint64_t>(s));
      const ConcentrationReport r = pinelis_tail_check(cfg, &k);
      std::string detail = "tail frequencies:";
      for (std::size_t i = 0; i < r.eta_grid.size(); ++i)
        detail += " eta=" + fmt(r.eta_grid[i]) + " freq=" + fmt(r.empirical_tail_freq[i]);
      rec.add(to_string(s) + "_m" + std::to_string(m), r.holds(), detail);
    }
    const CovarianceEventReport ev = covariance_event_check(k, m, 0.1, 10000, derive_seed(seed, 4, m));
    rec.add("covariance_event_m" + std::to_string(m), ev.holds(),
            "lambda = " + fmt(ev.lambda) + ", freq = " + fmt(ev.frequency) + " <= " + fmt(ev.allowed));
  }
  return rec.take();
}

std::vector<CheckResult> lowerbound_suite(std::uint64_t seed) {
  Recorder rec("lowerbound");
  for (int ell : {20, 40}) {
    const SignPacking p = pack_signs(ell, derive_seed(seed, 5, ell));
    rec.add("packing_ell" + std::to_string(ell), p.verify() && p.count() >= required_packing_size(ell),
            std::to_string(p.count()) + " vectors");
  }
  Vector p(2), q(2);
  p << 0.6, 0.4;
  q << 0.5, 0.5;
  const double kl = discrete_kl(p, q);
  const double want = 0.6 * std::log(1.2) + 0.4 * std::log(0.8);
  rec.add("kl_two_point", std::abs(kl - want) < 1e-12 && discrete_kl(p, p) == 0.0, "KL = " + fmt(kl));

  const Kernel k = Kernel::sobolev1d(1);
  const GridPtr grid = make_trapezoid_grid({0.0, 1.0}, 256, true);
  const H1SpacePtr h1 = H1Space::weighted_l2(grid);
  const H2Space h2(k, grid);
  const ForwardOp op = ForwardOp::linear_integral(h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::zeros(h1);

  Rng rng(derive_seed(seed, 6));
  Vector fv(grid->size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = standard_normal(rng);
  const HardInstance inst = build_hard_instance(op, h2, H1Vec(h1, fv));
  const bool probs = (inst.p_plus.array() >= 0.0).all() && (inst.p_minus.array() >= 0.0).all() &&
                     ((inst.p_plus + inst.p_minus).array() - 1.0).abs().maxCoeff() < 1e-12;
  const bool mean = (inst.conditional_mean() - inst.image).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, inst.J);
  const bool cert = inst.d * inst.J + inst.J / 4.0 <= inst.M_cert && 2.0 * inst.d * inst.J <= inst.Sigma_cert;
  rec.add("hard_instance", probs && mean && cert, "valid probabilities, conditional mean A(f), Bernstein constants");

  for (double eps : {0.1, 0.05}) {
    FamilyOptions fo;
    fo.seed = derive_seed(seed, 7, static_cast<std::uint64_t>(std::lround(1.0 / eps)));
    const std::string tag = "family_eps" + fmt(eps);
    try {
      const HardFamily fam = build_hard_family(op, h2, fbar, IndexFunction::holder(0.5), 12.0, eps, fo);
      rec.add(tag + "_g_norms", fam.g_norms_ok(), "||g_i|| <= R = 12");
      rec.add(tag + "_separation", fam.separation_holds(), "ell = " + std::to_string(fam.ell) + ", N = " +
                                                               std::to_string(fam.N()) + ", upsilon = " + fmt(fam.upsilon));
      rec.add(tag + "_packing", fam.packing.verify(), std::to_string(fam.packing.count()) + " sign vectors");
      rec.add(tag + "_kl_chain", fam.kl_chain_holds(), "C_tilde = " + fmt(fam.C_tilde));
    } catch (const std::exception& e) {
      rec.add(tag, false, e.what());
    }
  }
  return rec.take();
}

}  // namespace

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> names{"effdim", "hs", "concentration", "lowerbound"};
  return names;
}

bool is_check_suite(const std::string& name) {
  const auto& s = check_suites();
  return name == "all" || std::find(s.begin(), s.end(), name) != s.end();
}

std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed) {
  if (!is_check_suite(suite)) throw ArgumentError("unknown check suite '" + suite + "'");
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (const auto& s : check_suites()) {
      auto part = run_checks(s, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (suite == "effdim") return effdim_suite(seed);
  if (suite == "hs") return hs_suite(seed);
  if (suite == "concentration") return concentration_suite(seed);
  return lowerbound_suite(seed);
}

}  // namespace nlinv
