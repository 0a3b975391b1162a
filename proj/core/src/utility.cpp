#include "creditband/utility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "creditband/errors.hpp"

namespace creditband {

void AppUtilityParams::validate() const {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw Error(ErrorCode::InvalidArgument, "app utility alpha must be positive and != 1");
  }
  if (offset() == 0.0 && alpha > 1.0) {
    throw Error(ErrorCode::InvalidArgument,
                "streaming/social utilities need alpha < 1 to stay finite at zero");
  }
  if (!(scale > 0.0) || !(rate_scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "app utility scales must be positive");
  }
}

AppParams default_app_params() {
  return {{
      {AppKind::Streaming, 0.7, 2.0, 25.0},
      {AppKind::Social, 0.5, 1.0, 25.0},
      {AppKind::Download, 0.2, 1.0, 25.0},
      {AppKind::Browsing, 3.0, 15.0, 25.0},
  }};
}

double eval_app_utility(const AppUtilityParams& p, double rate) {
  if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative rate");
  const double base = p.rate_scale * rate + p.offset();
  return p.scale * (std::pow(base, 1.0 - p.alpha) - p.offset()) / (1.0 - p.alpha);
}

double app_marginal(const AppUtilityParams& p, double rate) {
  if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative rate");
  const double base = p.rate_scale * rate + p.offset();
  if (base == 0.0) {
    throw Error(ErrorCode::SingularAtZero, "marginal utility is unbounded at zero rate");
  }
  return p.scale * p.rate_scale * std::pow(base, -p.alpha);
}

double app_curvature(const AppUtilityParams& p, double rate) {
  if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative rate");
  const double base = p.rate_scale * rate + p.offset();
  if (base == 0.0) {
    throw Error(ErrorCode::SingularAtZero, "curvature is unbounded at zero rate");
  }
  return -p.scale * p.rate_scale * p.rate_scale * p.alpha * std::pow(base, -p.alpha - 1.0);
}

double app_marginal_inverse(const AppUtilityParams& p, double slope) {
  if (!(slope > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "marginal inverse needs a positive slope");
  }
  const double base = std::pow(p.scale * p.rate_scale / slope, 1.0 / p.alpha);
  return std::max(0.0, (base - p.offset()) / p.rate_scale);
}

UtilityModel::UtilityModel(std::vector<double> gamma, std::vector<AppMix> app_probs,
                           AppParams params)
    : gamma_(std::move(gamma)), app_probs_(std::move(app_probs)), params_(params) {
  if (gamma_.size() != app_probs_.size()) {
    throw Error(ErrorCode::InvalidArgument, "gamma and app probability horizons differ");
  }
  for (const auto& p : params_) p.validate();
  for (std::size_t t = 0; t < gamma_.size(); ++t) {
    if (!(gamma_[t] >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "negative gamma at period " + std::to_string(t));
    }
    double sum = 0.0;
    for (double v : app_probs_[t]) {
      if (!(v >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "negative app probability at period " + std::to_string(t));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument,
                  "app probabilities do not sum to one at period " + std::to_string(t));
    }
  }
}

namespace {

void check_period(const UtilityModel& model, std::size_t t) {
  if (t >= model.horizon()) {
    throw Error(ErrorCode::PeriodOutOfRange,
                "period " + std::to_string(t) + " outside horizon of " +
                    std::to_string(model.horizon()));
  }
}

}  // namespace

double eval_composite(const UtilityModel& model, std::size_t t, double rate) {
  check_period(model, t);
  if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative rate");
  const double g = model.gamma(t);
  if (g == 0.0) return 0.0;
  const auto& probs = model.app_probs(t);
  double sum = 0.0;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    if (probs[k] > 0.0) sum += probs[k] * eval_app_utility(model.params()[k], rate);
  }
  return g * sum;
}

double marginal(const UtilityModel& model, std::size_t t, double rate) {
  check_period(model, t);
  if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative rate");
  const double g = model.gamma(t);
  if (g == 0.0) return 0.0;
  const auto& probs = model.app_probs(t);
  double sum = 0.0;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    if (probs[k] > 0.0) sum += probs[k] * app_marginal(model.params()[k], rate);
  }
  return g * sum;
}

double curvature(const UtilityModel& model, std::size_t t, double rate) {
  check_period(model, t);
  if (rate < 0.0) throw Error(ErrorCode::NegativeRate, "negative rate");
  const double g = model.gamma(t);
  if (g == 0.0) return 0.0;
  const auto& probs = model.app_probs(t);
  double sum = 0.0;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    if (probs[k] > 0.0) sum += probs[k] * app_curvature(model.params()[k], rate);
  }
  return g * sum;
}

UtilityEval evaluate_smoothed(const UtilityModel& model, std::size_t t, double rate) {
  check_period(model, t);
  const double g = model.gamma(t);
  if (g == 0.0) return {};
  const auto& probs = model.app_probs(t);
  UtilityEval out;
  for (std::size_t k = 0; k < kAppCount; ++k) {
    if (probs[k] <= 0.0) continue;
    const auto& p = model.params()[k];
    const double w = g * probs[k];
    const double anchor = std::max(rate, kRateFloor);
    const double v = eval_app_utility(p, anchor);
    const double d1 = app_marginal(p, anchor);
    const double d2 = app_curvature(p, anchor);
    if (rate >= kRateFloor) {
      out.value += w * v;
      out.slope += w * d1;
      out.curvature += w * d2;
    } else {
      const double h = rate - kRateFloor;
      out.value += w * (v + d1 * h + 0.5 * d2 * h * h);
      out.slope += w * (d1 + d2 * h);
      out.curvature += w * d2;
    }
  }
  return out;
}

}  // namespace creditband
