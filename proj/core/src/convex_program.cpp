#include "convex_program.hpp"

#include <Eigen/SparseCore>
#include <cmath>
#include <numeric>

#include "creditband/errors.hpp"

namespace creditband::detail {

Eigen::MatrixXd equal_redistribution(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(size, size, 1.0 / static_cast<double>(n - 1));
  r.diagonal().setZero();
  return r;
}

CirculationProgram build_circulation(const CirculationSpec& spec) {
  const std::size_t n = spec.n;
  const std::size_t T = spec.horizon;
  if (n == 0 || T == 0) throw Error(ErrorCode::InvalidArgument, "empty spending program");
  if (spec.budgets.size() != n || spec.caps.size() != n ||
      spec.redistribution.rows() != static_cast<Eigen::Index>(n) ||
      spec.redistribution.cols() != static_cast<Eigen::Index>(n)) {
    throw Error(ErrorCode::InvalidArgument, "spending program dimensions disagree");
  }
  if (!spec.exogenous.empty() && spec.exogenous.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "exogenous inflow has the wrong gateway count");
  }

  // Cumulative exogenous inflow through period t.
  std::vector<std::vector<double>> inflow(n, std::vector<double>(T, 0.0));
  for (std::size_t k = 0; k < n && !spec.exogenous.empty(); ++k) {
    if (spec.exogenous[k].size() < T) {
      throw Error(ErrorCode::InvalidArgument, "exogenous inflow shorter than the horizon");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      acc += spec.exogenous[k][t];
      inflow[k][t] = acc;
    }
  }

  auto idx = [n](std::size_t k, std::size_t t) { return static_cast<int>(t * n + k); };
  const auto& R = spec.redistribution;

  CirculationProgram out;
  out.n = n;
  out.horizon = T;
  std::vector<Eigen::Triplet<double>> g;
  std::vector<double> h;

  auto add_row = [&](RowInfo info, double rhs) {
    out.rows.push_back(info);
    h.push_back(rhs);
    return static_cast<int>(out.rows.size() - 1);
  };

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      const double rhs = spec.budgets[k] + (t > 0 ? inflow[k][t - 1] : 0.0);
      const int row = add_row({RowKind::Budget, k, t}, rhs);
      g.emplace_back(row, idx(k, t), 1.0);
      if (t > 0) {
        for (std::size_t l = 0; l < n; ++l) {
          const double r = R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
          if (r != 0.0) g.emplace_back(row, idx(l, t - 1), -r);
        }
      }
    }
  }
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(spec.caps[k])) continue;
      const double rhs = spec.caps[k] - spec.budgets[k] - inflow[k][t];
      const int row = add_row({RowKind::Cap, k, t}, rhs);
      g.emplace_back(row, idx(k, t), -1.0);
      for (std::size_t l = 0; l < n; ++l) {
        const double r = R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
        if (r != 0.0) g.emplace_back(row, idx(l, t), r);
      }
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      const int row = add_row({RowKind::Nonnegative, k, t}, 0.0);
      g.emplace_back(row, idx(k, t), -1.0);
      if (t > 0) g.emplace_back(row, idx(k, t - 1), 1.0);
    }
  }

  const auto vars = static_cast<Eigen::Index>(n * T);
  SeparableProgram& p = out.program;
  p.G.resize(static_cast<Eigen::Index>(out.rows.size()), vars);
  p.G.setFromTriplets(g.begin(), g.end());
  p.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));

  std::vector<Eigen::Triplet<double>> a;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      a.emplace_back(idx(k, t), idx(k, t), 1.0);
      if (t > 0) a.emplace_back(idx(k, t), idx(k, t - 1), -1.0);
    }
  }
  p.A.resize(vars, vars);
  p.A.setFromTriplets(a.begin(), a.end());

  auto utility = spec.utility;
  p.term = [utility, n](Eigen::Index j, double credits) {
    const auto u = static_cast<std::size_t>(j);
    return utility(u % n, u / n, credits);
  };
  return out;
}

std::vector<std::vector<double>> spends_from_cumulative(const Eigen::VectorXd& v, std::size_t n,
                                                        std::size_t horizon) {
  std::vector<std::vector<double>> x(n, std::vector<double>(horizon, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    double prev = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const double y = v[static_cast<Eigen::Index>(t * n + k)];
      x[k][t] = y - prev;
      prev = y;
    }
  }
  return x;
}

Eigen::VectorXd cumulative_from_spends(const std::vector<std::vector<double>>& spends) {
  const std::size_t n = spends.size();
  const std::size_t T = n ? spends.front().size() : 0;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n * T));
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      acc += spends[k][t];
      v[static_cast<Eigen::Index>(t * n + k)] = acc;
    }
  }
  return v;
}

Eigen::VectorXd uniform_start(const CirculationSpec& spec) {
  const double mean =
      std::accumulate(spec.budgets.begin(), spec.budgets.end(), 0.0) / static_cast<double>(spec.n);
  const double per_period = 0.5 * std::max(mean, 1e-3) / static_cast<double>(spec.horizon);
  std::vector<std::vector<double>> x(spec.n, std::vector<double>(spec.horizon, per_period));
  return cumulative_from_spends(x);
}

}  // namespace creditband::detail
