#include "interior_point.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace creditband::detail {

namespace {

struct Evaluation {
  double objective = 0.0;
  Eigen::VectorXd slope;     // f_j'
  Eigen::VectorXd negcurve;  // -f_j'' >= 0
};

Evaluation evaluate(const SeparableProgram& p, const Eigen::VectorXd& v) {
  const Eigen::VectorXd r = p.A * v;
  Evaluation e;
  e.slope.resize(r.size());
  e.negcurve.resize(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const UtilityEval t = p.term(j, r[j]);
    e.objective += t.value;
    e.slope[j] = t.slope;
    e.negcurve[j] = std::max(0.0, -t.curvature);
  }
  return e;
}

double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) step = std::min(step, -x[i] / dx[i]);
  }
  return step;
}

}  // namespace

double objective_value(const SeparableProgram& program, const Eigen::VectorXd& v) {
  return evaluate(program, v).objective;
}

Eigen::VectorXd objective_gradient(const SeparableProgram& program, const Eigen::VectorXd& v) {
  return program.A.transpose() * evaluate(program, v).slope;
}

IpmResult solve_interior_point(const SeparableProgram& p, const Eigen::VectorXd& v0,
                               const IpmOptions& options) {
  const Eigen::Index m = p.G.rows();
  const double h_scale = 1.0 + p.h.lpNorm<Eigen::Infinity>();

  Eigen::VectorXd v = v0;
  Eigen::VectorXd s = (p.h - p.G * v).cwiseMax(1e-2 * h_scale);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(m);

  IpmResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  const SparseMatrix Gt = p.G.transpose();
  const SparseMatrix At = p.A.transpose();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  int stalled = 0;

  for (int iter = 0;; ++iter) {
    const Evaluation ev = evaluate(p, v);
    const Eigen::VectorXd grad = At * ev.slope;
    const double grad_scale = std::max(1.0, grad.lpNorm<Eigen::Infinity>());

    // Minimization form: phi(v) = -objective.
    const Eigen::VectorXd r_d = -grad + Gt * z;
    const Eigen::VectorXd r_p = p.G * v + s - p.h;
    const double mu = m > 0 ? s.dot(z) / static_cast<double>(m) : 0.0;

    const double rel_p = r_p.lpNorm<Eigen::Infinity>() / h_scale;
    const double rel_d = r_d.lpNorm<Eigen::Infinity>() / grad_scale;
    const double rel_gap = mu / (grad_scale * h_scale);
    const double merit = std::max({rel_p, rel_d, rel_gap});
    if (options.monitor) options.monitor(iter, rel_p, rel_d, rel_gap);
    if (merit < best_merit) {
      best_merit = merit;
      stalled = 0;
      best.v = v;
      best.s = s;
      best.z = z;
      best.objective = ev.objective;
      best.primal_residual = rel_p;
      best.dual_residual = rel_d;
      best.gap = rel_gap;
    }
    best.iterations = iter;
    if (rel_p <= options.feasibility_tolerance && rel_d <= options.feasibility_tolerance &&
        rel_gap <= options.gap_tolerance) {
      best.converged = true;
      return best;
    }
    // Once complementarity has collapsed the reduced system is too ill
    // conditioned to make further progress; keep the best iterate.
    if (merit >= best_merit && best_merit <= options.acceptable_tolerance &&
        ++stalled >= options.stall_iterations) {
      best.converged = best_merit <= options.acceptable_tolerance;
      return best;
    }
    if (iter >= options.max_iterations) return best;

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    SparseMatrix M = At * ev.negcurve.asDiagonal() * p.A;
    M += Gt * w.asDiagonal() * p.G;
    // Tiny diagonal shift keeps the factorization defined when a direction is
    // flat in the objective and barely touched by the barrier.
    const double shift = 1e-13 * std::max(1.0, ev.negcurve.lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < M.rows(); ++i) M.coeffRef(i, i) += shift;
    ldlt.compute(M);
    if (ldlt.info() != Eigen::Success) {
      best.converged = best_merit <= options.acceptable_tolerance;
      return best;
    }

    struct Direction {
      Eigen::VectorXd dv, ds, dz;
    };
    auto solve_once = [&](const Eigen::VectorXd& rd, const Eigen::VectorXd& rp,
                          const Eigen::VectorXd& rc) {
      const Eigen::VectorXd rc_over_s = rc.cwiseQuotient(s);
      const Eigen::VectorXd rhs = -rd - Gt * (w.cwiseProduct(rp) - rc_over_s);
      Direction d;
      d.dv = ldlt.solve(rhs);
      const Eigen::VectorXd Gdv = p.G * d.dv;
      d.dz = w.cwiseProduct(Gdv + rp) - rc_over_s;
      d.ds = -rp - Gdv;
      return d;
    };
    // Newton system residuals are refined on the full (unreduced) system:
    // the reduction amplifies round-off in dz by z/s near active bounds.
    auto solve = [&](const Eigen::VectorXd& r_c) {
      Direction d = solve_once(r_d, r_p, r_c);
      for (int refine = 0; refine < 2; ++refine) {
        const Eigen::VectorXd e1 =
            r_d + At * ev.negcurve.cwiseProduct(p.A * d.dv) + Gt * d.dz;
        const Eigen::VectorXd e2 = r_p + p.G * d.dv + d.ds;
        const Eigen::VectorXd e3 = r_c + z.cwiseProduct(d.ds) + s.cwiseProduct(d.dz);
        const Direction c = solve_once(e1, e2, e3);
        d.dv += c.dv;
        d.ds += c.ds;
        d.dz += c.dz;
      }
      return d;
    };

    const Eigen::VectorXd sz = s.cwiseProduct(z);
    const Direction aff = solve(sz);
    const double a_aff = std::min(max_step(s, aff.ds), max_step(z, aff.dz));
    const double mu_aff =
        (s + a_aff * aff.ds).dot(z + a_aff * aff.dz) / static_cast<double>(std::max<Eigen::Index>(m, 1));
    const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    const Eigen::VectorXd r_c =
        sz + aff.ds.cwiseProduct(aff.dz) - Eigen::VectorXd::Constant(m, sigma * mu);
    // Backtrack on the centred residual norm: strongly curved utilities make
    // the full Newton step overshoot into regions where the slope explodes.
    const double target = sigma * mu;
    auto residual = [&](const Eigen::VectorXd& vv, const Eigen::VectorXd& ss,
                        const Eigen::VectorXd& zz) {
      const Eigen::VectorXd rd = -(At * evaluate(p, vv).slope) + Gt * zz;
      const Eigen::VectorXd rp = p.G * vv + ss - p.h;
      const Eigen::VectorXd rc =
          ss.cwiseProduct(zz) - Eigen::VectorXd::Constant(m, target);
      return (rd / grad_scale).squaredNorm() + (rp / h_scale).squaredNorm() +
             (rc / (grad_scale * h_scale)).squaredNorm();
    };
    const double r0 = residual(v, s, z);
    auto search = [&](const Direction& d, double& step) {
      const double a_max = std::min(max_step(s, d.ds), max_step(z, d.dz));
      step = std::min(1.0, 0.99 * a_max);
      for (int k = 0; k < options.max_backtracks; ++k) {
        if (residual(v + step * d.dv, s + step * d.ds, z + step * d.dz) <=
            (1.0 - 1e-4 * step) * r0) {
          return true;
        }
        step *= 0.5;
      }
      return false;
    };

    Direction d = solve(r_c);
    double step = 0.0;
    // The second-order correction need not descend on the residual; the
    // plain Newton step towards the centred target always does.
    if (!search(d, step)) {
      d = solve(sz - Eigen::VectorXd::Constant(m, target));
      search(d, step);
    }

    v += step * d.dv;
    s += step * d.ds;
    z += step * d.dz;
  }
}

}  // namespace creditband::detail
