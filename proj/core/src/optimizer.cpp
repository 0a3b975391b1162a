#include "creditband/optimizer.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <string>

#include "convex_program.hpp"
#include "interior_point.hpp"

namespace creditband {

namespace {

using detail::CirculationProgram;
using detail::CirculationSpec;
using detail::RowKind;

void validate(const HorizonProblem& p, bool single) {
  if (p.horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be at least one");
  if (p.models.empty() || p.models.size() != p.budgets.size()) {
    throw Error(ErrorCode::InvalidArgument, "need one model and one budget per gateway");
  }
  if (single && p.models.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "per-gateway problem takes a single model");
  }
  if (!single && p.models.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "global problem needs at least two gateways");
  }
  if (!(p.rate_per_credit > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rate per credit must be positive");
  }
  if (!(p.cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
  for (std::size_t i = 0; i < p.models.size(); ++i) {
    if (p.models[i].horizon() < p.start + p.horizon) {
      throw Error(ErrorCode::PeriodOutOfRange,
                  "utility model of gateway " + std::to_string(i) + " ends before the horizon");
    }
    if (!(p.budgets[i] >= -kRateFloor) || !std::isfinite(p.budgets[i])) {
      throw Error(ErrorCode::InvalidArgument, "negative budget at gateway " + std::to_string(i));
    }
  }
}

detail::CirculationSpec make_spec(const HorizonProblem& p, bool single) {
  CirculationSpec spec;
  spec.n = p.models.size();
  spec.horizon = p.horizon;
  spec.redistribution =
      single ? Eigen::MatrixXd::Zero(1, 1) : detail::equal_redistribution(spec.n);
  spec.budgets.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) spec.budgets[i] = std::max(0.0, p.budgets[i]);
  spec.caps.assign(spec.n, p.cap);
  if (single) spec.exogenous = {p.inflow_forecast};
  const std::vector<UtilityModel>* models = &p.models;
  const std::size_t start = p.start;
  const double rho = p.rate_per_credit;
  spec.utility = [models, start, rho](std::size_t k, std::size_t t, double credits) {
    UtilityEval e = evaluate_smoothed((*models)[k], start + t, rho * credits);
    e.slope *= rho;
    e.curvature *= rho * rho;
    return e;
  };
  return spec;
}

RatePlan to_plan(const detail::IpmResult& r, const CirculationProgram& cp, double rho) {
  RatePlan plan;
  plan.spends = detail::spends_from_cumulative(r.v, cp.n, cp.horizon);
  // Interior iterates sit a hair inside the bounds; snap tiny negatives.
  for (auto& row : plan.spends) {
    for (double& x : row) {
      if (x < 0.0 && x > -1e-9) x = 0.0;
    }
  }
  plan.rate_per_credit = rho;
  plan.objective = r.objective;
  plan.iterations = r.iterations;
  return plan;
}

detail::IpmResult run(const CirculationProgram& cp, const Eigen::VectorXd& v0,
                      const std::string& what, double rho) {
  detail::IpmResult r = detail::solve_interior_point(cp.program, v0);
  if (!r.converged) {
    throw NoConvergenceError(what + " did not converge after " + std::to_string(r.iterations) +
                                 " iterations",
                             to_plan(r, cp, rho));
  }
  return r;
}

KktCertificate certificate(const CirculationProgram& cp, const detail::IpmResult& r) {
  const std::size_t n = cp.n;
  const std::size_t T = cp.horizon;
  KktCertificate c;
  c.lambda.assign(n, std::vector<double>(T, 0.0));
  c.kappa.assign(n, std::vector<double>(T, 0.0));
  c.nu.assign(n, std::vector<double>(T, 0.0));
  for (std::size_t row = 0; row < cp.rows.size(); ++row) {
    const auto& info = cp.rows[row];
    const double z = r.z[static_cast<Eigen::Index>(row)];
    switch (info.kind) {
      case RowKind::Budget: c.lambda[info.holder][info.period] = z; break;
      case RowKind::Cap: c.kappa[info.holder][info.period] = z; break;
      case RowKind::Nonnegative: c.nu[info.holder][info.period] = z; break;
    }
  }

  // Stationarity in spend space: the gradient with respect to x_t is the sum
  // of cumulative-variable gradients over periods >= t.
  const auto& p = cp.program;
  const Eigen::VectorXd rates = p.A * r.v;
  double largest = 0.0;
  for (Eigen::Index j = 0; j < rates.size(); ++j) {
    largest = std::max(largest, std::abs(p.term(j, rates[j]).slope));
  }
  largest = std::max(largest, 1e-12);
  const Eigen::VectorXd r_v = -detail::objective_gradient(p, r.v) + p.G.transpose() * r.z;
  double stationarity = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      acc += r_v[static_cast<Eigen::Index>(t * n + k)];
      stationarity = std::max(stationarity, std::abs(acc));
    }
  }
  c.stationarity_residual = stationarity / largest;

  const Eigen::VectorXd slack = p.h - p.G * r.v;
  double comp = 0.0;
  double violation = 0.0;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    comp = std::max(comp, std::abs(std::max(slack[i], 0.0) * r.z[i]));
    violation = std::max(violation, -slack[i]);
  }
  c.complementarity_residual = comp / largest;
  c.primal_residual = violation;
  return c;
}

}  // namespace

GlobalSolution solve_global(const HorizonProblem& problem) {
  validate(problem, false);
  const CirculationSpec spec = make_spec(problem, false);
  const CirculationProgram cp = detail::build_circulation(spec);
  const detail::IpmResult r =
      run(cp, detail::uniform_start(spec), "global welfare solve", problem.rate_per_credit);
  GlobalSolution out;
  out.plan = to_plan(r, cp, problem.rate_per_credit);
  out.certificate = certificate(cp, r);
  return out;
}

RatePlan solve_gateway(const HorizonProblem& problem) {
  validate(problem, true);
  if (problem.inflow_forecast.size() < problem.horizon) {
    throw Error(ErrorCode::InvalidArgument, "inflow forecast shorter than the horizon");
  }
  for (std::size_t t = 0; t + 1 < problem.horizon; ++t) {
    const double e = problem.inflow_forecast[t];
    if (e < 0.0) throw Error(ErrorCode::InvalidArgument, "negative inflow forecast");
    if (e > problem.cap) {
      throw Error(ErrorCode::Infeasible, "forecast inflow in horizon period " + std::to_string(t) +
                                             " exceeds the cap on its own");
    }
  }
  if (problem.budgets[0] > problem.cap * (1.0 + 1e-12)) {
    throw Error(ErrorCode::Infeasible, "starting budget exceeds the cap");
  }
  const CirculationSpec spec = make_spec(problem, true);
  const CirculationProgram cp = detail::build_circulation(spec);
  const detail::IpmResult r =
      run(cp, detail::uniform_start(spec), "gateway solve", problem.rate_per_credit);
  return to_plan(r, cp, problem.rate_per_credit);
}

double gateway_utility(const HorizonProblem& problem, const RatePlan& plan, std::size_t gateway) {
  double total = 0.0;
  for (std::size_t t = 0; t < plan.horizon(); ++t) {
    total += eval_composite(problem.models.at(gateway), problem.start + t,
                            std::max(0.0, plan.rate(gateway, t)));
  }
  return total;
}

double plan_utility(const HorizonProblem& problem, const RatePlan& plan) {
  double total = 0.0;
  for (std::size_t i = 0; i < plan.gateways(); ++i) total += gateway_utility(problem, plan, i);
  return total;
}

PrioritySplit solve_priorities(const AppParams& params, double x_total) {
  if (!(x_total > 0.0)) throw Error(ErrorCode::ZeroBandwidth, "priority split needs x_total > 0");
  for (const auto& p : params) p.validate();

  auto allocated = [&](double slope) {
    double sum = 0.0;
    for (const auto& p : params) sum += app_marginal_inverse(p, slope);
    return sum;
  };
  // Allocation falls as the common slope rises; bisect in log space.
  double lo = -60.0;
  double hi = 60.0;
  while (allocated(std::exp(lo)) < x_total) lo -= 20.0;
  while (allocated(std::exp(hi)) > x_total) hi += 20.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (allocated(std::exp(mid)) > x_total) lo = mid;
    else hi = mid;
  }
  const double slope = std::exp(0.5 * (lo + hi));
  PrioritySplit split;
  double sum = 0.0;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    split.mu[k] = app_marginal_inverse(params[k], slope);
    sum += split.mu[k];
  }
  for (double& m : split.mu) m /= sum;
  return split;
}

NashReport verify_nash(const RatePlan& plan, const HorizonProblem& problem) {
  validate(problem, false);
  const std::size_t n = problem.models.size();
  const std::size_t T = problem.horizon;
  if (plan.gateways() != n || plan.horizon() != T) {
    throw Error(ErrorCode::InvalidArgument, "plan does not match the problem");
  }
  const CirculationSpec spec = make_spec(problem, false);
  const CirculationProgram cp = detail::build_circulation(spec);
  const Eigen::VectorXd v_plan = detail::cumulative_from_spends(plan.spends);
  const auto& G = cp.program.G;

  NashReport report;
  for (std::size_t i = 0; i < n; ++i) {
    // Restrict to gateway i's cumulative spends, folding everyone else's
    // fixed spends into the right-hand side.
    Eigen::VectorXd others = v_plan;
    for (std::size_t t = 0; t < T; ++t) others[static_cast<Eigen::Index>(t * n + i)] = 0.0;
    const Eigen::VectorXd rhs = cp.program.h - G * others;

    std::vector<int> row_map(static_cast<std::size_t>(G.rows()), -1);
    std::vector<Eigen::Triplet<double>> g;
    int kept = 0;
    for (Eigen::Index c = 0; c < G.outerSize(); ++c) {
      const auto var = static_cast<std::size_t>(c);
      if (var % n != i) continue;
      const int col = static_cast<int>(var / n);
      for (detail::SparseMatrix::InnerIterator it(G, c); it; ++it) {
        auto& mapped = row_map[static_cast<std::size_t>(it.row())];
        if (mapped < 0) mapped = kept++;
        g.emplace_back(mapped, col, it.value());
      }
    }
    detail::SeparableProgram sub;
    sub.G.resize(kept, static_cast<Eigen::Index>(T));
    sub.G.setFromTriplets(g.begin(), g.end());
    sub.h.resize(kept);
    for (std::size_t row = 0; row < row_map.size(); ++row) {
      if (row_map[row] >= 0) sub.h[row_map[row]] = rhs[static_cast<Eigen::Index>(row)];
    }
    std::vector<Eigen::Triplet<double>> a;
    for (std::size_t t = 0; t < T; ++t) {
      a.emplace_back(static_cast<int>(t), static_cast<int>(t), 1.0);
      if (t > 0) a.emplace_back(static_cast<int>(t), static_cast<int>(t - 1), -1.0);
    }
    sub.A.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
    sub.A.setFromTriplets(a.begin(), a.end());
    auto utility = spec.utility;
    sub.term = [utility, i](Eigen::Index t, double credits) {
      return utility(i, static_cast<std::size_t>(t), credits);
    };

    Eigen::VectorXd start(static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) {
      start[static_cast<Eigen::Index>(t)] = v_plan[static_cast<Eigen::Index>(t * n + i)];
    }
    const detail::IpmResult br = detail::solve_interior_point(sub, start);

    double best = 0.0;
    double prev = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double y = br.v[static_cast<Eigen::Index>(t)];
      const double rate = std::max(0.0, y - prev) * problem.rate_per_credit;
      prev = y;
      best += eval_composite(problem.models[i], problem.start + t, rate);
    }
    const double own = gateway_utility(problem, plan, i);
    const double gain = std::max(0.0, best - own);
    report.solved.push_back(br.converged || br.primal_residual < 1e-8);
    report.plan_utility.push_back(own);
    report.deviation_gain.push_back(gain);
    const double rel = gain / std::max(std::abs(own), 1e-12);
    report.relative_gain.push_back(rel);
    report.max_relative_gain = std::max(report.max_relative_gain, rel);
  }
  return report;
}

}  // namespace creditband
