// Infeasible-start primal-dual interior-point method on
//
//   minimize c'y  s.t.  Z_j = C_j + B_j(y) PSD,  A y = b
//   maximize b'mu - sum <C_j, X_j>  s.t.  B*(X) + A'mu = c,  X_j PSD
//
// using the HKM search direction with a Mehrotra predictor-corrector step.
// The normal equations are a dense m x m system formed entry pair by entry
// pair, which is cheap for the sparse blocks a moment relaxation produces.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "ncfair/error.hpp"
#include "ncfair/sdp.hpp"

namespace ncfair::sdp {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Entry {
  Index r, c, var;
  double coef;
};

// One block with both triangles listed, so B*(X)_i = sum coef * X(r, c).
struct Block {
  Index n = 0;
  MatrixXd C;
  std::vector<Entry> entries;
  double scale = 1.0;
};

struct EqualitySystem {
  MatrixXd A;
  VectorXd b;
};

/// Normalised independent rows of the equality system; nullopt when it is
/// inconsistent.
std::optional<EqualitySystem> reduce_equalities(const SDPProblem& prob) {
  const auto m = static_cast<Index>(prob.equalities.size());
  const auto n = static_cast<Index>(prob.num_vars);
  MatrixXd A = MatrixXd::Zero(m, n);
  VectorXd b(m);
  for (Index r = 0; r < m; ++r) {
    const auto& eq = prob.equalities[static_cast<std::size_t>(r)];
    for (const auto& [var, c] : eq.coeffs) A(r, static_cast<Index>(var)) = c;
    b(r) = eq.rhs;
    const double nrm = A.row(r).norm();
    if (nrm > 0.0) {
      A.row(r) /= nrm;
      b(r) /= nrm;
    }
  }
  if (m == 0) return EqualitySystem{A, b};

  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
  cod.setThreshold(1e-10);
  const VectorXd y0 = cod.solve(b);
  if ((A * y0 - b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) return std::nullopt;

  Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  std::vector<Index> keep;
  for (Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
  std::sort(keep.begin(), keep.end());
  EqualitySystem out{MatrixXd(rank, n), VectorXd(rank)};
  for (Index i = 0; i < rank; ++i) {
    out.A.row(i) = A.row(keep[static_cast<std::size_t>(i)]);
    out.b(i) = b(keep[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Largest alpha with P + alpha dP PSD (infinity when unbounded); nullopt if
/// P itself is not positive definite.
std::optional<double> max_step(const MatrixXd& P, const MatrixXd& dP) {
  if (P.rows() == 1) {
    if (!(P(0, 0) > 0)) return std::nullopt;
    return dP(0, 0) < 0 ? -P(0, 0) / dP(0, 0) : std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) return std::nullopt;
  MatrixXd W = llt.matrixL().solve(dP);
  W = llt.matrixL().solve(W.transpose()).transpose();
  W = 0.5 * (W + W.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(W, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double min_eigen_ratio(const MatrixXd& m) {
  const VectorXd lam = Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return lam(0) / (1.0 + std::abs(lam(lam.size() - 1)));
}

class InteriorPoint {
 public:
  InteriorPoint(const SDPProblem& prob, const SolverConfig& cfg, EqualitySystem eq);
  SDPSolution run();

 private:
  struct Metrics {
    double primal = 0, dual = 0, gap = 0, pobj = 0, dobj = 0;
    double worst() const { return std::max({primal, dual, gap}); }
  };
  struct Direction {
    VectorXd dy, dmu;
    std::vector<MatrixXd> dX, dZ;
  };

  MatrixXd apply(std::size_t j, const VectorXd& y) const;  // B_j(y)
  VectorXd adjoint(const std::vector<MatrixXd>& X) const;  // B*(X)
  void residuals();
  Metrics measure() const;
  bool factor();
  Direction direction(const std::vector<MatrixXd>& R) const;
  Direction solve_newton(const std::vector<MatrixXd>& R, const std::vector<MatrixXd>& Rp, const VectorXd& rd,
                         const VectorXd& rb) const;
  double step(const std::vector<MatrixXd>& P, const std::vector<MatrixXd>& dP) const;
  bool certify_infeasible() const;
  bool certify_unbounded() const;

  const SolverConfig& cfg_;
  Index m_ = 0;
  std::vector<Block> blocks_;
  VectorXd c_, D_;  // scaled objective, variable scaling y = D yhat
  double sigma_ = 1.0;  // objective scaling
  MatrixXd A_;  // scaled, row-normalised
  VectorXd b_;
  // Unscaled data for reporting.
  VectorXd c0_;
  MatrixXd A0_;
  VectorXd b0_;
  double N_ = 0;

  VectorXd y_, mu_;
  std::vector<MatrixXd> X_, Z_, Zi_, Rp_;
  VectorXd rd_, rb_;

  Eigen::LLT<MatrixXd> Mllt_;
  Eigen::LDLT<MatrixXd> Mfac_, Sfac_;
  bool use_llt_ = true;
  VectorXd msolve(const VectorXd& v) const;
  MatrixXd msolve(const MatrixXd& v) const;
  MatrixXd MinvAt_;
  VectorXd Mscale_;
};

InteriorPoint::InteriorPoint(const SDPProblem& prob, const SolverConfig& cfg, EqualitySystem eq)
    : cfg_(cfg), A0_(std::move(eq.A)), b0_(std::move(eq.b)) {
  m_ = static_cast<Index>(prob.num_vars);
  c0_ = Eigen::Map<const VectorXd>(prob.objective.data(), m_);
  for (const auto& sb : prob.blocks) {
    Block b;
    b.n = static_cast<Index>(sb.dim);
    b.C = MatrixXd::Zero(b.n, b.n);
    for (const auto& [rc, form] : sb.entries) {
      const auto r = static_cast<Index>(rc.first), c = static_cast<Index>(rc.second);
      b.C(r, c) = b.C(c, r) = form.constant;
      for (const auto& [var, coef] : form.coeffs) {
        b.entries.push_back({r, c, static_cast<Index>(var), coef});
        if (r != c) b.entries.push_back({c, r, static_cast<Index>(var), coef});
      }
    }
    blocks_.push_back(std::move(b));
  }

  // Each block is scaled as a unit (keeps it inside its cone), then variable
  // columns and the objective are normalised.
  D_ = VectorXd::Ones(m_);
  if (cfg.scaling) {
    for (auto& b : blocks_) {
      double big = 0;
      for (const auto& e : b.entries) big = std::max(big, std::abs(e.coef));
      if (big > 0) b.scale = std::clamp(1.0 / big, 1e-8, 1e8);
    }
    VectorXd col = VectorXd::Zero(m_);
    for (const auto& b : blocks_)
      for (const auto& e : b.entries) col(e.var) += std::pow(b.scale * e.coef, 2);
    col += A0_.colwise().squaredNorm().transpose();
    for (Index i = 0; i < m_; ++i)
      if (col(i) > 0) D_(i) = std::clamp(1.0 / std::sqrt(col(i)), 1e-8, 1e8);
    const double cmax = inf_norm(c0_.cwiseProduct(D_));
    if (cmax > 0) sigma_ = std::clamp(1.0 / cmax, 1e-8, 1e8);
  }
  for (auto& b : blocks_) {
    b.C *= b.scale;
    for (auto& e : b.entries) e.coef *= b.scale * D_(e.var);
    N_ += static_cast<double>(b.n);
  }
  c_ = sigma_ * c0_.cwiseProduct(D_);
  A_ = A0_ * D_.asDiagonal();
  b_ = b0_;
  for (Index r = 0; r < A_.rows(); ++r) {
    const double nrm = A_.row(r).norm();
    if (nrm > 0) {
      A_.row(r) /= nrm;
      b_(r) /= nrm;
    }
  }
}

MatrixXd InteriorPoint::apply(std::size_t j, const VectorXd& y) const {
  const auto& b = blocks_[j];
  MatrixXd out = MatrixXd::Zero(b.n, b.n);
  for (const auto& e : b.entries) out(e.r, e.c) += e.coef * y(e.var);
  return out;
}

VectorXd InteriorPoint::adjoint(const std::vector<MatrixXd>& X) const {
  VectorXd out = VectorXd::Zero(m_);
  for (std::size_t j = 0; j < blocks_.size(); ++j)
    for (const auto& e : blocks_[j].entries) out(e.var) += e.coef * X[j](e.r, e.c);
  return out;
}

void InteriorPoint::residuals() {
  for (std::size_t j = 0; j < blocks_.size(); ++j) Rp_[j] = blocks_[j].C + apply(j, y_) - Z_[j];
  rd_ = c_ - adjoint(X_);
  if (A_.rows() > 0) {
    rd_ -= A_.transpose() * mu_;
    rb_ = b_ - A_ * y_;
  }
}

InteriorPoint::Metrics InteriorPoint::measure() const {
  // Everything is reported in the units of the original problem.
  Metrics m;
  double cx = 0;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    const double s = blocks_[j].scale;
    const MatrixXd S = blocks_[j].C + apply(j, y_);
    m.primal = std::max(m.primal, (Rp_[j].norm() / s) / (1.0 + std::max(S.norm(), Z_[j].norm()) / s));
    cx += (blocks_[j].C.cwiseProduct(X_[j])).sum();
  }
  const VectorXd y = D_.cwiseProduct(y_);
  if (A0_.rows() > 0) m.primal = std::max(m.primal, inf_norm(A0_ * y - b0_) / (1.0 + inf_norm(b0_)));
  m.dual = inf_norm(D_.cwiseInverse().cwiseProduct(rd_)) / sigma_ / (1.0 + inf_norm(c0_));
  m.pobj = c0_.dot(y);
  m.dobj = ((A_.rows() > 0 ? b_.dot(mu_) : 0.0) - cx) / sigma_;
  m.gap = std::abs(m.pobj - m.dobj) / (1.0 + std::abs(m.pobj) + std::abs(m.dobj));
  return m;
}

bool InteriorPoint::factor() {
  // M_ij = <B_i, X B_j Z^{-1}>, summed over pairs of block entries.
  MatrixXd M = MatrixXd::Zero(m_, m_);
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    const auto& ent = blocks_[j].entries;
    const MatrixXd& X = X_[j];
    const MatrixXd& Zi = Zi_[j];
    for (const auto& e : ent)
      for (const auto& f : ent) M(e.var, f.var) += e.coef * f.coef * X(e.r, f.r) * Zi(f.c, e.c);
  }
  M = 0.5 * (M + M.transpose());
  // Symmetric Jacobi scaling before factoring; the tiny shift is then
  // relative to every row instead of to the largest one.
  Mscale_ = M.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  M = Mscale_.asDiagonal() * M * Mscale_.asDiagonal();
  M.diagonal().array() += 1e-14;
  // Blocked Cholesky is much faster; pivoted LDL' is the fallback for a
  // numerically indefinite M.
  Mllt_.compute(M);
  use_llt_ = Mllt_.info() == Eigen::Success;
  if (!use_llt_) {
    Mfac_.compute(M);
    if (Mfac_.info() != Eigen::Success) return false;
  }
  if (A_.rows() > 0) {
    MinvAt_ = msolve(MatrixXd(A_.transpose()));
    MatrixXd S = A_ * MinvAt_;
    S = 0.5 * (S + S.transpose());
    Sfac_.compute(S);
    if (Sfac_.info() != Eigen::Success) return false;
  }
  return true;
}

VectorXd InteriorPoint::msolve(const VectorXd& v) const {
  const VectorXd w = Mscale_.cwiseProduct(v);
  return Mscale_.cwiseProduct(use_llt_ ? VectorXd(Mllt_.solve(w)) : VectorXd(Mfac_.solve(w)));
}

MatrixXd InteriorPoint::msolve(const MatrixXd& v) const {
  const MatrixXd w = Mscale_.asDiagonal() * v;
  return Mscale_.asDiagonal() * (use_llt_ ? MatrixXd(Mllt_.solve(w)) : MatrixXd(Mfac_.solve(w)));
}

InteriorPoint::Direction InteriorPoint::solve_newton(const std::vector<MatrixXd>& R,
                                                      const std::vector<MatrixXd>& Rp, const VectorXd& rd,
                                                      const VectorXd& rb) const {
  // M dy - A'dmu = B*(R - X Rp Z^{-1}) - rd,   A dy = rb,
  // dZ = B(dy) + Rp,   dX = R - sym(X dZ Z^{-1}).
  std::vector<MatrixXd> G(blocks_.size());
  for (std::size_t j = 0; j < blocks_.size(); ++j) G[j] = R[j] - X_[j] * Rp[j] * Zi_[j];
  const VectorXd g = adjoint(G) - rd;
  Direction d;
  const VectorXd Minv_g = msolve(g);
  if (A_.rows() > 0) {
    d.dmu = Sfac_.solve(rb - A_ * Minv_g);
    d.dy = Minv_g + MinvAt_ * d.dmu;
  } else {
    d.dmu = VectorXd();
    d.dy = Minv_g;
  }
  d.dX.resize(blocks_.size());
  d.dZ.resize(blocks_.size());
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    d.dZ[j] = apply(j, d.dy) + Rp[j];
    const MatrixXd T = X_[j] * d.dZ[j] * Zi_[j];
    d.dX[j] = R[j] - 0.5 * (T + T.transpose());
  }
  return d;
}

InteriorPoint::Direction InteriorPoint::direction(const std::vector<MatrixXd>& R) const {
  Direction d = solve_newton(R, Rp_, rd_, rb_);
  // The normal equations lose accuracy near the optimum; a few
  // refinement sweeps on the dual feasibility and equality rows restore it.
  const std::vector<MatrixXd> zero = [&] {
    std::vector<MatrixXd> z(blocks_.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) z[j] = MatrixXd::Zero(blocks_[j].n, blocks_[j].n);
    return z;
  }();
  double prev = std::numeric_limits<double>::infinity();
  const double floor = 1e-15 * (1.0 + std::max(inf_norm(rd_), inf_norm(rb_)));
  for (int sweep = 0; sweep < 6; ++sweep) {
    VectorXd ed = rd_ - adjoint(d.dX);
    VectorXd eb = VectorXd::Zero(A_.rows());
    if (A_.rows() > 0) {
      ed -= A_.transpose() * d.dmu;
      eb = rb_ - A_ * d.dy;
    }
    const double err = std::max(inf_norm(ed), inf_norm(eb));
    if (err <= floor || err >= 0.5 * prev) break;
    prev = err;
    const Direction c = solve_newton(zero, zero, ed, eb);
    d.dy += c.dy;
    if (A_.rows() > 0) d.dmu += c.dmu;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      d.dX[j] += c.dX[j];
      d.dZ[j] += c.dZ[j];
    }
  }
  return d;
}

double InteriorPoint::step(const std::vector<MatrixXd>& P, const std::vector<MatrixXd>& dP) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < P.size(); ++j) {
    const auto a = max_step(P[j], dP[j]);
    alpha = std::min(alpha, a ? *a : 0.0);
  }
  return std::min(1.0, cfg_.step_fraction * alpha);
}

bool InteriorPoint::certify_infeasible() const {
  // Dual ray: X PSD, B*(X) + A'mu = 0, b'mu - <C, X> > 0.
  double value = A_.rows() > 0 ? b_.dot(mu_) : 0.0;
  for (std::size_t j = 0; j < blocks_.size(); ++j) value -= blocks_[j].C.cwiseProduct(X_[j]).sum();
  if (!(value > 0)) return false;
  VectorXd lhs = adjoint(X_);
  if (A_.rows() > 0) lhs += A_.transpose() * mu_;
  return inf_norm(lhs) <= cfg_.tolerance * value;
}

bool InteriorPoint::certify_unbounded() const {
  // Primal ray: c'y < 0, A y = 0, B(y) PSD, with y dominating the data.
  const double value = -c_.dot(y_);
  if (!(value > 0)) return false;
  if (value * cfg_.tolerance < 1.0 + inf_norm(b_)) return false;
  if (A_.rows() > 0 && inf_norm(A_ * y_) > cfg_.tolerance * value + inf_norm(b_)) return false;
  for (std::size_t j = 0; j < blocks_.size(); ++j)
    if (min_eigen_ratio(apply(j, y_)) < -cfg_.tolerance) return false;
  return true;
}

SDPSolution InteriorPoint::run() {
  SDPSolution sol;
  const std::size_t nb = blocks_.size();

  // Starting point scaled to the data, as in common IPM codes.
  VectorXd coln = VectorXd::Zero(m_);
  for (const auto& b : blocks_)
    for (const auto& e : b.entries) coln(e.var) += e.coef * e.coef;
  coln = coln.cwiseSqrt();
  double xi_ratio = 1.0, bmax = 0.0;
  for (Index i = 0; i < m_; ++i) {
    xi_ratio = std::max(xi_ratio, (1.0 + std::abs(c_(i))) / (1.0 + coln(i)));
    bmax = std::max(bmax, coln(i));
  }
  y_ = VectorXd::Zero(m_);
  mu_ = VectorXd::Zero(A_.rows());
  X_.resize(nb);
  Z_.resize(nb);
  Zi_.resize(nb);
  Rp_.resize(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const auto n = blocks_[j].n;
    const double xi = 10.0 * static_cast<double>(n) * xi_ratio;
    const double eta = 10.0 * (1.0 + std::max(bmax, blocks_[j].C.norm())) / std::sqrt(static_cast<double>(n));
    X_[j] = xi * MatrixXd::Identity(n, n);
    Z_[j] = eta * MatrixXd::Identity(n, n);
  }

  Metrics m, best_m;
  best_m.primal = std::numeric_limits<double>::infinity();
  VectorXd best_y = y_;
  double progress = std::numeric_limits<double>::infinity();
  int stalled = 0;
  int it = 0;
  for (;; ++it) {
    residuals();
    m = measure();
    if (!std::isfinite(m.worst()) || !std::isfinite(m.pobj) || !std::isfinite(m.dobj)) {
      sol.status = Status::inaccurate;
      break;
    }
    if (m.worst() <= cfg_.tolerance) {
      sol.status = Status::optimal;
      break;
    }
    if (it >= 3 && m.primal > cfg_.tolerance && certify_infeasible()) {
      sol.status = Status::infeasible;
      break;
    }
    if (it >= 3 && m.dual > cfg_.tolerance && certify_unbounded()) {
      sol.status = Status::unbounded;
      break;
    }
    if (m.worst() < best_m.worst()) {
      best_m = m;
      best_y = y_;
    }
    if (m.worst() < 0.5 * progress) {
      progress = m.worst();
      stalled = 0;
    } else if (++stalled >= 20) {
      sol.status = Status::inaccurate;
      break;
    }
    if (it >= cfg_.max_iterations) break;

    bool ok = true;
    for (std::size_t j = 0; j < nb && ok; ++j) {
      Eigen::LLT<MatrixXd> llt(Z_[j]);
      ok = llt.info() == Eigen::Success;
      if (ok) Zi_[j] = llt.solve(MatrixXd::Identity(blocks_[j].n, blocks_[j].n));
    }
    if (!ok || !factor()) {
      sol.status = Status::inaccurate;
      break;
    }

    double mu = 0;
    for (std::size_t j = 0; j < nb; ++j) mu += X_[j].cwiseProduct(Z_[j]).sum();
    mu /= N_;

    // Predictor: aim straight at XZ = 0.
    std::vector<MatrixXd> R(nb);
    for (std::size_t j = 0; j < nb; ++j) R[j] = -X_[j];
    const Direction pred = direction(R);
    const double ap = step(Z_, pred.dZ), ad = step(X_, pred.dX);
    double mu_aff = 0;
    for (std::size_t j = 0; j < nb; ++j)
      mu_aff += (X_[j] + ad * pred.dX[j]).cwiseProduct(Z_[j] + ap * pred.dZ[j]).sum();
    mu_aff /= N_;
    const double centering = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term.
    for (std::size_t j = 0; j < nb; ++j) {
      const MatrixXd T = pred.dX[j] * pred.dZ[j] * Zi_[j];
      R[j] = centering * mu * Zi_[j] - X_[j] - 0.5 * (T + T.transpose());
    }
    const Direction d = direction(R);
    const double alpha_p = step(Z_, d.dZ), alpha_d = step(X_, d.dX);
    if (alpha_p < 1e-12 && alpha_d < 1e-12) {
      sol.status = Status::inaccurate;
      break;
    }
    y_ += alpha_p * d.dy;
    if (A_.rows() > 0) mu_ += alpha_d * d.dmu;
    for (std::size_t j = 0; j < nb; ++j) {
      Z_[j] += alpha_p * d.dZ[j];
      X_[j] += alpha_d * d.dX[j];
      Z_[j] = 0.5 * (Z_[j] + Z_[j].transpose()).eval();
      X_[j] = 0.5 * (X_[j] + X_[j].transpose()).eval();
    }
  }
  sol.iterations = it;
  if (sol.status == Status::inaccurate || sol.status == Status::iteration_limit) {
    // Return the best iterate seen rather than wherever the stall ended.
    if (best_m.worst() < m.worst() || !std::isfinite(m.worst())) {
      m = best_m;
      y_ = best_y;
    }
    if (sol.status == Status::iteration_limit && m.worst() <= 100.0 * cfg_.tolerance)
      sol.status = Status::inaccurate;
  }
  const VectorXd y = D_.cwiseProduct(y_);
  sol.values.assign(y.data(), y.data() + y.size());
  sol.objective_value = m.pobj;
  sol.dual_objective = m.dobj;
  sol.primal_residual = m.primal;
  sol.dual_residual = m.dual;
  sol.gap = m.gap;
  return sol;
}

}  // namespace

SDPSolution solve(const SDPProblem& prob, const SolverConfig& cfg) {
  prob.validate();
  if (!(cfg.tolerance > 0)) throw ValidationError("solver tolerance must be positive");
  if (cfg.max_iterations < 1) throw ValidationError("max_iterations must be positive");
  if (!(cfg.step_fraction > 0 && cfg.step_fraction < 1)) throw ValidationError("step_fraction must lie in (0, 1)");
  const auto start = std::chrono::steady_clock::now();

  SDPSolution sol;
  auto eq = reduce_equalities(prob);
  if (!eq) {
    sol.status = Status::infeasible;
    sol.values.assign(prob.num_vars, 0.0);
    sol.objective_value = std::numeric_limits<double>::quiet_NaN();
    sol.dual_objective = std::numeric_limits<double>::quiet_NaN();
    sol.primal_residual = std::numeric_limits<double>::infinity();
  } else {
    InteriorPoint ipm(prob, cfg, std::move(*eq));
    sol = ipm.run();
  }
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace ncfair::sdp
