#include "nlinv/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlinv/errors.hpp"

namespace nlinv {

Vector HardInstance::conditional_mean() const {
  const double y = d * J;
  return (y * p_plus - y * p_minus).eval();
}

double HardInstance::sample_y(Eigen::Index node, Rng& rng) const {
  return uniform01(rng) < p_plus(node) ? d * J : -d * J;
}

HardInstance build_hard_instance(const ForwardOp& op, const H2Space& h2, const H1Vec& f, int d,
                                 std::optional<double> shared_J) {
  if (d != 1) throw ArgumentError("build_hard_instance: only d = 1 is supported");
  if (!same_grid(h2.grid(), op.grid())) throw ShapeError("build_hard_instance: grid mismatch");
  HardInstance inst{f, 0.0, d, op.node_design().apply(f.values()), {}, {}, 0.0, 0.0};
  const double own = 4.0 * h2.kappa() * h2.norm(inst.image);
  if (!(own > 0.0)) throw ArgumentError("build_hard_instance: A(f) = 0 gives J = 0 (zero image)");
  inst.J = shared_J ? *shared_J : own;
  if (inst.J < own * (1.0 - 1e-12)) throw ArgumentError("build_hard_instance: shared J below 4 kappa ||A(f)||");
  const double two_dj = 2.0 * d * inst.J;
  inst.p_plus = (inst.J + inst.image.array()) / two_dj;
  inst.p_minus = (inst.J - inst.image.array()) / two_dj;
  for (Eigen::Index j = 0; j < inst.image.size(); ++j) {
    if (inst.p_plus(j) < 0.0 || inst.p_minus(j) < 0.0) {
      std::ostringstream os;
      os << "build_hard_instance: negative atom weight at x = " << op.grid().nodes(j);
      throw NumericalError(os.str());
    }
  }
  inst.M_cert = d * inst.J + inst.J / 4.0;
  inst.Sigma_cert = 2.0 * d * inst.J;
  return inst;
}

Matrix SignPacking::distances() const {
  const Eigen::Index n = static_cast<Eigen::Index>(vectors.size());
  Matrix dist = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      double s = 0.0;
      for (int k = 0; k < ell; ++k) {
        const double t = vectors[i][k] - vectors[j][k];
        s += t * t;
      }
      dist(i, j) = dist(j, i) = s;
    }
  return dist;
}

std::size_t required_packing_size(int ell) {
  return static_cast<std::size_t>(std::ceil(std::exp(ell / 24.0) - 1e-12));
}

bool SignPacking::verify() const {
  if (count() < required_packing_size(ell)) return false;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != ell) return false;
    for (int s : v)
      if (s != 1 && s != -1) return false;
  }
  const Matrix dist = distances();
  for (Eigen::Index i = 0; i < dist.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (dist(i, j) < ell) return false;
  return true;
}

SignPacking pack_signs(int ell, std::uint64_t seed, long max_draws) {
  if (ell <= 16) throw ArgumentError("pack_signs: ell must exceed 16");
  const std::size_t target = required_packing_size(ell);
  SignPacking p;
  p.ell = ell;
  Rng rng(seed);
  std::vector<int> cand(ell);
  for (long draw = 0; draw < max_draws && p.count() < target; ++draw) {
    for (int k = 0; k < ell; ++k) cand[k] = (rng() >> 63) ? 1 : -1;
    bool ok = true;
    for (const auto& v : p.vectors) {
      int mism = 0;
      for (int k = 0; k < ell; ++k) mism += v[k] != cand[k];
      if (4 * mism < ell) {
        ok = false;
        break;
      }
    }
    if (ok) p.vectors.push_back(cand);
  }
  if (p.count() < target || !p.verify()) throw PackingError("pack_signs: packing incomplete, retry with another seed");
  return p;
}

double discrete_kl(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw ShapeError("discrete_kl: laws on different atoms");
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) return std::numeric_limits<double>::infinity();
    s += p(i) * std::log(p(i) / q(i));
  }
  return std::max(0.0, s);
}

double discrete_kl(const HardInstance& p, const HardInstance& q, const Grid& grid) {
  if (p.d != q.d || p.J != q.J) throw ArgumentError("discrete_kl: instances must share d and J");
  if (p.image.size() != grid.size() || q.image.size() != grid.size())
    throw ShapeError("discrete_kl: instances do not live on the grid");
  const Vector nu = grid.probability_weights();
  double s = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double k = discrete_kl(Eigen::Vector2d(p.p_plus(j), p.p_minus(j)), Eigen::Vector2d(q.p_plus(j), q.p_minus(j)));
    if (!std::isfinite(k)) return k;
    s += nu(j) * k;
  }
  return s;
}

DecayBounds certify_decay(const Vector& eigenvalues, int upto) {
  if (upto < 4 || upto > eigenvalues.size()) throw ArgumentError("certify_decay: invalid certification range");
  const EigenDecay fit = fit_decay(eigenvalues.head(upto));
  if (fit.n_reliable < upto) throw InsufficientDataError("certify_decay: spectrum vanishes inside the range");
  DecayBounds d;
  d.b = fit.fitted_b;
  d.certified_upto = upto;
  d.alpha = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= upto; ++n) {
    const double v = eigenvalues(n - 1) * std::pow(n, d.b);
    d.alpha = std::min(d.alpha, v);
    d.beta = std::max(d.beta, v);
  }
  return d;
}

int family_ell(const IndexFunction& phi, double R, double epsilon, const DecayBounds& decay) {
  const double t = phi.inverse(epsilon / R);
  if (!(t > 0.0)) throw ArgumentError("family_ell: phi^-1(eps / R) must be positive");
  return static_cast<int>(std::floor(0.5 * std::pow(decay.alpha / t, 1.0 / decay.b)));
}

bool HardFamily::g_norms_ok() const {
  for (double g : g_norms)
    if (g > R * (1.0 + 1e-12)) return false;
  return true;
}

bool HardFamily::separation_holds() const {
  for (Eigen::Index i = 0; i < pairwise_h1_gaps.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (pairwise_h1_gaps(i, j) < epsilon * upsilon * (1.0 - 1e-12)) return false;
  return upsilon > 0.0;
}

bool HardFamily::kl_chain_holds() const {
  for (Eigen::Index i = 0; i < kl_matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < kl_matrix.cols(); ++j) {
      if (i == j) continue;
      if (!(kl_matrix(i, j) <= kl_bound(i, j) * (1.0 + 1e-12) + 1e-300)) return false;
      if (!(kl_bound(i, j) <= chain_bound(i, j) * (1.0 + 1e-12))) return false;
    }
  return true;
}

HardFamily build_hard_family(const ForwardOp& op, const H2Space& h2, const H1Vec& fbar, const IndexFunction& phi,
                             double R, double epsilon, const FamilyOptions& opts) {
  if (phi.family() != IndexFunction::Family::holder) throw ArgumentError("build_hard_family: holder index functions only");
  if (!(R > 0.0) || !(epsilon > 0.0)) throw ArgumentError("build_hard_family: R and epsilon must be positive");
  const H1Space& sp = fbar.space();
  const Eigen::Index n = fbar.size();
  const Matrix tbar = population_T(op, fbar);
  const SymEig eig = sym_eig(tbar);

  HardFamily fam;
  fam.epsilon = epsilon;
  fam.R = R;
  fam.decay = opts.decay ? *opts.decay
                         : certify_decay(eig.values, opts.certify_upto > 0 ? opts.certify_upto : static_cast<int>(n / 2));
  fam.ell = family_ell(phi, R, epsilon, fam.decay);
  if (fam.ell <= 16) {
    std::ostringstream os;
    os << "build_hard_family: ell = " << fam.ell << " must exceed 16; decrease epsilon or increase R";
    throw ConstructionError(os.str());
  }
  if (2 * fam.ell > fam.decay.certified_upto) {
    std::ostringstream os;
    os << "build_hard_family: 2 ell = " << 2 * fam.ell << " exceeds the certified spectral range "
       << fam.decay.certified_upto << "; refine the grid or increase epsilon";
    throw ConstructionError(os.str());
  }
  fam.packing = pack_signs(fam.ell, opts.seed);
  const std::size_t N = fam.packing.count();
  const int ell = fam.ell;

  // g_i and phi(Tbar) g_i in orthonormal coordinates
  std::vector<Vector> ug(N), vbar(N);
  double gmax = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    ug[i] = Vector::Zero(n);
    vbar[i] = Vector::Zero(n);
    for (int k = ell + 1; k <= 2 * ell; ++k) {
      const double tk = eig.values(k - 1);
      const double c = epsilon * fam.packing.vectors[i][k - ell - 1] / std::sqrt(static_cast<double>(ell));
      ug[i] += (c / phi(tk)) * eig.vectors.col(k - 1);
      vbar[i] += c * eig.vectors.col(k - 1);
    }
    fam.g_norms.push_back(ug[i].norm());
    gmax = std::max(gmax, ug[i].norm());
  }
  if (gmax > R * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "build_hard_family: ||g_i|| = " << gmax << " exceeds R; largest feasible epsilon for ell = " << ell << " is "
       << epsilon * R / gmax;
    throw ConstructionError(os.str());
  }

  std::vector<H1Vec> fs;
  for (std::size_t i = 0; i < N; ++i) {
    const H1Vec g(fbar.space_ptr(), sp.from_coords(ug[i]));
    const SourceTruth st = source_fixed_point(op, fbar, phi, g, opts.fixedpoint_tol, opts.fixedpoint_iters);
    fs.push_back(st.f_rho);
    double delta = 0.0, zeta = 0.0;
    if (!op.is_linear()) {
      const Vector vi = apply_index_function(population_T(op, st.f_rho), phi) * ug[i];
      delta = (vi - vbar[i]).norm() / vbar[i].norm();
      const double dist = norm(st.f_rho - fbar);
      zeta = dist > 0.0 ? delta / dist : 0.0;
    }
    fam.delta.push_back(delta);
    fam.zeta.push_back(zeta);
  }

  fam.kappa = h2.kappa();
  for (const H1Vec& f : fs) fam.J = std::max(fam.J, 4.0 * fam.kappa * h2.norm(op.node_design().apply(f.values())));
  for (const H1Vec& f : fs) fam.instances.push_back(build_hard_instance(op, h2, f, 1, fam.J));

  fam.L = derivative_norm_h2(op, h2, fbar);
  fam.gamma = op.is_linear() ? 0.0 : op.nonlinearity_gamma.value_or(quadratic_gamma_bound(op));
  const double b = fam.decay.b;
  fam.c_prime = std::sqrt(4.0 * fam.decay.beta / (b - 1.0) * (1.0 - std::pow(2.0, 1.0 - b)));
  const double d = 1.0;
  const double scale = 16.0 / (15.0 * d * fam.J * fam.J);
  const double rate = epsilon * epsilon / std::pow(ell, b) + std::pow(epsilon, 4);
  const Vector nu = op.grid().probability_weights();

  const Eigen::Index nn = static_cast<Eigen::Index>(N);
  fam.pairwise_h1_gaps = Matrix::Zero(nn, nn);
  fam.kl_matrix = Matrix::Zero(nn, nn);
  fam.kl_bound = Matrix::Zero(nn, nn);
  fam.chain_bound = Matrix::Zero(nn, nn);
  fam.upsilon = N > 1 ? std::numeric_limits<double>::infinity() : 1.0;
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (i == j) continue;
      const HardInstance& a = fam.instances[i];
      const HardInstance& c = fam.instances[j];
      fam.pairwise_h1_gaps(i, j) = norm(fs[i] - fs[j]);
      fam.kl_matrix(i, j) = discrete_kl(a, c, op.grid());
      fam.kl_bound(i, j) = scale * (nu.array() * (a.image - c.image).array().square()).sum();
      const double di = fam.delta[i], dj = fam.delta[j];
      const double cc = fam.kappa * fam.L * std::max(fam.zeta[i], fam.zeta[j]) * (2.0 + di + dj);
      const double c2 = 4.0 * cc * cc + 4.0 * fam.c_prime * fam.c_prime +
                        fam.gamma * fam.gamma * (std::pow(1.0 + di, 4) + std::pow(1.0 + dj, 4));
      const double ct = 16.0 * c2 / (15.0 * d * fam.J * fam.J);
      fam.C_tilde = std::max(fam.C_tilde, ct);
      fam.chain_bound(i, j) = ct * rate;
      fam.upsilon = std::min(fam.upsilon, 1.0 - di - dj);
    }
  }
  return fam;
}

HsCheck hs_operator_lipschitz_check(double theta_lipschitz, const std::function<double(double)>& theta,
                                    const Matrix& F, const Matrix& Ft) {
  if (F.rows() != F.cols() || F.rows() != Ft.rows() || F.cols() != Ft.cols())
    throw ShapeError("hs_operator_lipschitz_check: need square matrices of equal shape");
  if (!F.isApprox(F.transpose(), 1e-12) || !Ft.isApprox(Ft.transpose(), 1e-12))
    throw ArgumentError("hs_operator_lipschitz_check: matrices must be symmetric");
  HsCheck out;
  out.lhs = hs_norm(spectral_apply(F, theta) - spectral_apply(Ft, theta));
  const double diff = hs_norm(F - Ft);
  out.rhs = theta_lipschitz * diff;
  out.ratio = diff > 0.0 ? out.lhs / diff : 0.0;
  out.holds = out.lhs <= out.rhs + 1e-12 * std::max(1.0, out.rhs);
  return out;
}

HsCheck hs_sqrt_perturbation_check(const Matrix& B, const Matrix& Bt) {
  if (B.rows() != Bt.rows() || B.cols() != Bt.cols()) throw ShapeError("hs_sqrt_perturbation_check: shape mismatch");
  HsCheck out;
  out.lhs = hs_norm(psd_sqrt(B.transpose() * B) - psd_sqrt(Bt.transpose() * Bt));
  const double diff = hs_norm(B - Bt);
  out.rhs = std::numbers::sqrt2 * diff;
  out.ratio = diff > 0.0 ? out.lhs / diff : 0.0;
  out.holds = out.lhs <= out.rhs + 1e-12 * std::max(1.0, out.rhs);
  return out;
}

}  // namespace nlinv
