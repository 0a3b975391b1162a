#include "creditband/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convex_program.hpp"
#include "creditband/errors.hpp"

namespace creditband {

namespace {

void check_distribution(std::span<const double> probs, std::size_t size) {
  if (probs.size() != size) {
    throw Error(ErrorCode::InvalidArgument, "scenario probabilities have the wrong length");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative scenario probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "scenario probabilities do not sum to one");
  }
}

}  // namespace

ScenarioSet::ScenarioSet(std::vector<Scenario> scenarios, std::size_t slots_per_day)
    : scenarios_(std::move(scenarios)), slots_per_day_(slots_per_day) {
  if (scenarios_.empty()) throw Error(ErrorCode::InvalidArgument, "empty scenario set");
  if (slots_per_day_ == 0) throw Error(ErrorCode::InvalidArgument, "slots_per_day must be positive");
  std::vector<double> prior;
  for (const auto& s : scenarios_) prior.push_back(s.prior);
  check_distribution(prior, scenarios_.size());
  posteriors_.assign(slots_per_day_, prior);
}

std::span<const double> ScenarioSet::posterior(std::size_t period) const {
  return posteriors_[period % slots_per_day_];
}

void ScenarioSet::set_posterior(std::size_t period, std::vector<double> probs) {
  check_distribution(probs, scenarios_.size());
  posteriors_[period % slots_per_day_] = std::move(probs);
}

InflowForecast predict_inflows(const UtilityModel& own, std::size_t start, double own_budget,
                               const ScenarioSet& scenarios, std::size_t horizon,
                               const ForecastContext& ctx) {
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "forecast horizon must be positive");
  if (ctx.n < 2) throw Error(ErrorCode::InvalidArgument, "forecast needs at least two gateways");
  const double members = static_cast<double>(ctx.n - 1);
  const double rho = ctx.rate_per_credit;

  detail::CirculationSpec spec;
  spec.n = 2;
  spec.horizon = horizon;
  spec.redistribution.resize(2, 2);
  spec.redistribution << 0.0, 1.0 / members, 1.0, (members - 1.0) / members;
  spec.budgets = {std::clamp(own_budget, 0.0, ctx.total),
                  std::max(0.0, ctx.total - own_budget)};
  spec.caps = {ctx.cap, members * ctx.cap};

  InflowForecast out;
  out.expected.assign(horizon, 0.0);
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& sc = scenarios.scenario(s);
    if (own.horizon() < start + horizon || sc.model.horizon() < start + horizon) {
      throw Error(ErrorCode::PeriodOutOfRange,
                  "scenario " + sc.id + ": model ends before the forecast horizon");
    }
    spec.utility = [&own, &sc, start, rho, members](std::size_t k, std::size_t t,
                                                     double credits) {
      if (k == 0) {
        UtilityEval e = evaluate_smoothed(own, start + t, rho * credits);
        e.slope *= rho;
        e.curvature *= rho * rho;
        return e;
      }
      // n - 1 members, each spending credits / (n - 1).
      UtilityEval e = evaluate_smoothed(sc.model, start + t, rho * credits / members);
      e.value *= members;
      e.slope *= rho;
      e.curvature *= rho * rho / members;
      return e;
    };
    const detail::CirculationProgram cp = detail::build_circulation(spec);
    const detail::IpmResult r =
        detail::solve_interior_point(cp.program, detail::uniform_start(spec));
    if (!r.converged) {
      throw Error(ErrorCode::NoConvergence, "scenario " + sc.id + ": joint solve did not converge");
    }
    const auto spends = detail::spends_from_cumulative(r.v, 2, horizon);
    std::vector<double> inflow(horizon);
    for (std::size_t t = 0; t < horizon; ++t) inflow[t] = std::max(0.0, spends[1][t]) / members;
    out.per_scenario.push_back(std::move(inflow));
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto probs = scenarios.posterior(start + t);
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      out.expected[t] += probs[s] * out.per_scenario[s][t];
    }
  }
  return out;
}

std::vector<double> likelihood(double observed, std::span<const double> predicted) {
  const std::size_t m = predicted.size();
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "likelihood needs at least two scenarios");
  std::vector<double> sq(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double d = observed - predicted[s];
    sq[s] = d * d;
  }
  const double denom = std::accumulate(sq.begin(), sq.end(), 0.0);
  std::vector<double> p(m);
  if (denom == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(m));
    return p;
  }
  const double scale = 1.0 / static_cast<double>(m - 1);
  for (std::size_t s = 0; s < m; ++s) p[s] = std::max(0.0, scale * (1.0 - sq[s] / denom));
  return p;
}

ScenarioSet bayes_update(const ScenarioSet& scenarios, double observed,
                         std::span<const double> predicted, std::size_t period) {
  if (predicted.size() != scenarios.size()) {
    throw Error(ErrorCode::InvalidArgument, "one prediction per scenario required");
  }
  const std::vector<double> like = likelihood(observed, predicted);
  const auto prior = scenarios.posterior(period);
  std::vector<double> post(like.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < like.size(); ++s) {
    post[s] = like[s] * prior[s];
    sum += post[s];
  }
  if (sum > 0.0) {
    for (double& p : post) p /= sum;
  } else {
    post = like;
  }
  ScenarioSet out = scenarios;
  out.set_posterior(period, std::move(post));
  return out;
}

ScenarioSet single_app_scenarios(std::vector<double> gamma, std::size_t slots_per_day,
                                 const AppParams& params) {
  static const char* names[kAppCount] = {"streaming", "social", "download", "browsing"};
  std::vector<Scenario> list;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    AppMix mix{};
    mix[k] = 1.0;
    std::vector<AppMix> probs(gamma.size(), mix);
    list.push_back({names[k], UtilityModel(gamma, std::move(probs), params), 0.25});
  }
  return ScenarioSet(std::move(list), slots_per_day);
}

}  // namespace creditband
