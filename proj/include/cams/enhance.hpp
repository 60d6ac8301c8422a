#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cams/coassoc.hpp"
#include "cams/errors.hpp"

namespace cams {

enum class SolverInit { Zeros, FromInput };

struct SolverConfig {
  double lambda = 0.4;   // error-term weight
  double gamma1 = 1.0;   // augmented-Lagrangian penalty, A = C + E
  double gamma2 = 1.0;   // augmented-Lagrangian penalty, C = F
  double epsilon = 1e-2; // relative-change stopping tolerance
  int max_iters = 200;
  bool omega_lock = true;  // keep C pinned to A on the high-confidence support
  SolverInit init = SolverInit::Zeros;
};

struct IterationRecord {
  int iter = 0;
  double sigma_c = 0, sigma_e = 0, sigma_f = 0, sigma_y1 = 0, sigma_y2 = 0;
  double residual_ace = 0;  // ||A - C - E||_F
  double residual_cf = 0;   // ||C - F||_F
  double objective = 0;     // objective of the matrix this iterate would return
};

struct SolverState {
  Eigen::MatrixXd c, e, f, y1, y2;
  int iter = 0;
  std::vector<IterationRecord> history;
};

struct EnhancedResult {
  CoassocMatrix c;  // kind Enhanced; exactly symmetric, in [0,1], pinned on Omega
  bool converged = false;
  int iters = 0;
  double final_objective = 0.0;
  IterationRecord final_record;
  std::vector<IterationRecord> history;
  int factorizations = 0;   // SPD factorizations performed (must be 1)
  double y1_max_abs = 0.0;  // multiplier drift at termination
  double y2_max_abs = 0.0;
};

// Objective value with the error term eliminated: E = A - C off Omega, zero on
// Omega. The Laplacian term is accumulated over the support edges, which is
// much cheaper than forming Phi * C.
inline double enhance_objective(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a,
                                const HighConfidence& hc, double lambda) {
  double quad = 0.0;
  for (auto [i, j] : hc.pairs) {
    if (i == j) continue;
    quad += hc.h(i, j) * (c.row(i) - c.row(j)).squaredNorm();
  }
  double err = (a - c).squaredNorm();
  for (auto [i, j] : hc.pairs) {
    const double d = a(i, j) - c(i, j);
    err -= (i == j) ? d * d : 2.0 * d * d;
  }
  if (err < 0.0) err = 0.0;  // cancellation guard
  return quad + 0.5 * lambda * err;
}

namespace detail {

inline double sigma_ratio(double diff_sq, double base_sq) {
  return diff_sq / std::max(base_sq, 1e-12);
}

}  // namespace detail

// C step: minimizer of the quadratic subproblem, solved against the cached
// SPD factorization of M = 2*Phi + (gamma1 + gamma2) I.
inline Eigen::MatrixXd update_c(const SolverState& state, const Eigen::MatrixXd& a,
                                const Eigen::LLT<Eigen::MatrixXd>& factor,
                                const SolverConfig& cfg) {
  Eigen::MatrixXd rhs = cfg.gamma1 * (a - state.e + state.y1 / cfg.gamma1) +
                        cfg.gamma2 * (state.f - state.y2 / cfg.gamma2);
  return factor.solve(rhs);
}

// E step: closed-form shrinkage off the support, exact zero on it.
inline Eigen::MatrixXd update_e(const SolverState& state, const Eigen::MatrixXd& a,
                                const HighConfidence& hc, const SolverConfig& cfg) {
  Eigen::MatrixXd e = (cfg.gamma1 * (a - state.c) + state.y1) / (cfg.lambda + cfg.gamma1);
  if (cfg.omega_lock) {
    for (auto [i, j] : hc.pairs) {
      e(i, j) = 0.0;
      e(j, i) = 0.0;
    }
  }
  return e;
}

// F step: symmetrize then truncate elementwise to [0,1]; both properties hold
// exactly afterwards.
inline Eigen::MatrixXd update_f(const SolverState& state, const SolverConfig& cfg) {
  const Eigen::MatrixXd p3 = state.c + state.y2 / cfg.gamma2;
  const int n = static_cast<int>(p3.rows());
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = 0.5 * (p3(i, j) + p3(j, i));
      v = std::min(1.0, std::max(0.0, v));
      f(i, j) = v;
      f(j, i) = v;
    }
  return f;
}

// Dual ascent on both equality constraints.
inline void update_multipliers(SolverState& state, const Eigen::MatrixXd& a,
                               const SolverConfig& cfg) {
  state.y1 += cfg.gamma1 * (a - state.c - state.e);
  state.y2 += cfg.gamma2 * (state.c - state.f);
}

// ADMM loop. Returns F at termination (it satisfies the symmetry and box
// constraints exactly at every iterate) with the high-confidence entries
// overwritten by A, so the result is always a valid similarity matrix.
inline EnhancedResult solve(const CoassocMatrix& a_in, const HighConfidence& hc,
                            const SolverConfig& cfg) {
  validate_similarity(a_in.values, "enhance");
  const Eigen::MatrixXd& a = a_in.values;
  const int n = static_cast<int>(a.rows());
  if (hc.n != n) throw ValidationError("enhance: support built over a different n");
  if (!(cfg.lambda > 0.0 && cfg.gamma1 > 0.0 && cfg.gamma2 > 0.0 && cfg.epsilon > 0.0))
    throw std::invalid_argument("enhance: lambda, gamma1, gamma2, epsilon must be positive");

  EnhancedResult result;

  // Factor-once: M is constant across iterations.
  Eigen::MatrixXd m = build_laplacian(hc).phi * 2.0;
  m.diagonal().array() += cfg.gamma1 + cfg.gamma2;
  Eigen::LLT<Eigen::MatrixXd> factor(m);
  ++result.factorizations;
  if (factor.info() != Eigen::Success)
    throw NumericalError("enhance: SPD factorization failed (invalid Laplacian?)");

  SolverState state;
  if (cfg.init == SolverInit::Zeros) {
    state.c = Eigen::MatrixXd::Zero(n, n);
    state.e = Eigen::MatrixXd::Zero(n, n);
    state.f = Eigen::MatrixXd::Zero(n, n);
  } else {
    state.c = a;
    state.e = Eigen::MatrixXd::Zero(n, n);
    state.f = a;
  }
  state.y1 = a - state.c - state.e;
  state.y2 = state.c - state.f;

  bool converged = false;
  while (state.iter < cfg.max_iters) {
    Eigen::MatrixXd c_next = update_c(state, a, factor, cfg);
    const double sc = detail::sigma_ratio((c_next - state.c).squaredNorm(), state.c.squaredNorm());
    state.c = std::move(c_next);

    Eigen::MatrixXd e_next = update_e(state, a, hc, cfg);
    const double se = detail::sigma_ratio((e_next - state.e).squaredNorm(), state.e.squaredNorm());
    state.e = std::move(e_next);

    Eigen::MatrixXd f_next = update_f(state, cfg);
    const double sf = detail::sigma_ratio((f_next - state.f).squaredNorm(), state.f.squaredNorm());
    state.f = std::move(f_next);

    const double y1_base = state.y1.squaredNorm();
    const double y2_base = state.y2.squaredNorm();
    update_multipliers(state, a, cfg);

    IterationRecord rec;
    rec.iter = state.iter;
    rec.sigma_c = sc;
    rec.sigma_e = se;
    rec.sigma_f = sf;
    rec.residual_ace = (a - state.c - state.e).norm();
    rec.residual_cf = (state.c - state.f).norm();
    rec.sigma_y1 = detail::sigma_ratio(cfg.gamma1 * cfg.gamma1 * rec.residual_ace * rec.residual_ace, y1_base);
    rec.sigma_y2 = detail::sigma_ratio(cfg.gamma2 * cfg.gamma2 * rec.residual_cf * rec.residual_cf, y2_base);
    // objective of the matrix this iterate would return (F with the support
    // pinned to A); without the lock, the error term spans every entry
    if (cfg.omega_lock) {
      Eigen::MatrixXd pinned = state.f;
      for (auto [i, j] : hc.pairs) {
        pinned(i, j) = a(i, j);
        pinned(j, i) = a(j, i);
      }
      rec.objective = enhance_objective(pinned, a, hc, cfg.lambda);
    } else {
      double quad = 0.0;
      for (auto [i, j] : hc.pairs)
        if (i != j) quad += hc.h(i, j) * (state.f.row(i) - state.f.row(j)).squaredNorm();
      rec.objective = quad + 0.5 * cfg.lambda * (a - state.f).squaredNorm();
    }
    state.history.push_back(rec);
    ++state.iter;

    if (!(std::isfinite(rec.objective) && std::isfinite(rec.sigma_c) && std::isfinite(sc + se + sf)))
      throw NumericalError("enhance: non-finite iterate at iteration " + std::to_string(state.iter));

    const double worst = std::max({rec.sigma_c, rec.sigma_e, rec.sigma_f, rec.sigma_y1, rec.sigma_y2});
    if (worst <= cfg.epsilon) {
      converged = true;
      break;
    }
  }

  Eigen::MatrixXd out = state.f;
  if (cfg.omega_lock) {
    for (auto [i, j] : hc.pairs) {
      out(i, j) = a(i, j);
      out(j, i) = a(j, i);
    }
  }

  result.c = CoassocMatrix{std::move(out), CaKind::Enhanced};
  result.converged = converged;
  result.iters = state.iter;
  result.y1_max_abs = state.y1.cwiseAbs().maxCoeff();
  result.y2_max_abs = state.y2.cwiseAbs().maxCoeff();
  if (cfg.omega_lock) {
    result.final_objective = enhance_objective(result.c.values, a, hc, cfg.lambda);
  } else {
    double quad = 0.0;
    for (auto [i, j] : hc.pairs)
      if (i != j) quad += hc.h(i, j) * (result.c.values.row(i) - result.c.values.row(j)).squaredNorm();
    result.final_objective = quad + 0.5 * cfg.lambda * (a - result.c.values).squaredNorm();
  }
  result.final_record = state.history.empty() ? IterationRecord{} : state.history.back();
  result.history = std::move(state.history);
  return result;
}

// Dropping the Laplacian term removes every force that moves C away from A;
// the model degenerates to the plain denoising program whose optimum is the
// box-projected symmetrization of the input.
inline CoassocMatrix enhance_without_laplacian(const CoassocMatrix& a_in) {
  validate_similarity(a_in.values, "enhance");
  const int n = a_in.size();
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = 0.5 * (a_in.values(i, j) + a_in.values(j, i));
      v = std::min(1.0, std::max(0.0, v));
      out(i, j) = v;
      out(j, i) = v;
    }
  return CoassocMatrix{std::move(out), CaKind::Enhanced};
}

// Convergence diagnostics: one row per iteration.
inline void save_diagnostics_csv(const std::vector<IterationRecord>& history,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "iter,sigma_c,sigma_e,sigma_f,sigma_y1,sigma_y2,residual_ace,residual_cf,objective\n";
  for (const IterationRecord& r : history)
    out << r.iter << ',' << detail::format_double(r.sigma_c) << ','
        << detail::format_double(r.sigma_e) << ',' << detail::format_double(r.sigma_f) << ','
        << detail::format_double(r.sigma_y1) << ',' << detail::format_double(r.sigma_y2) << ','
        << detail::format_double(r.residual_ace) << ',' << detail::format_double(r.residual_cf)
        << ',' << detail::format_double(r.objective) << '\n';
}

}  // namespace cams
