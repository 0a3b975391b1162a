#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace creditband {

enum class AppKind { Streaming = 0, Social = 1, Download = 2, Browsing = 3 };

inline constexpr std::size_t kAppCount = 4;

/// One application's utility of a rate y (Mbps):
///   u(y) = scale * ((rate_scale * y + offset)^(1 - alpha) - offset) / (1 - alpha)
/// with offset 0 for streaming/social and 1 for download/browsing, which makes
/// download and browsing utilities vanish at y = 0.
struct AppUtilityParams {
  AppKind kind = AppKind::Streaming;
  double alpha = 0.5;
  double scale = 1.0;
  double rate_scale = 25.0;

  double offset() const {
    return kind == AppKind::Download || kind == AppKind::Browsing ? 1.0 : 0.0;
  }
  void validate() const;
};

using AppParams = std::array<AppUtilityParams, kAppCount>;
using AppMix = std::array<double, kAppCount>;

/// Streaming, social, download and browsing with alphas (0.7, 0.5, 0.2, 3) and
/// leading constants (2, 1, 1, 15).
AppParams default_app_params();

double eval_app_utility(const AppUtilityParams& params, double rate);
double app_marginal(const AppUtilityParams& params, double rate);
double app_curvature(const AppUtilityParams& params, double rate);

/// Smallest y >= 0 with u'(y) <= slope; zero when u'(0) <= slope.
double app_marginal_inverse(const AppUtilityParams& params, double slope);

/// Per-period composite utility gamma_t * sum_k p_t^k u_k(x) of one gateway.
class UtilityModel {
 public:
  UtilityModel(std::vector<double> gamma, std::vector<AppMix> app_probs,
               AppParams params = default_app_params());

  std::size_t horizon() const { return gamma_.size(); }
  double gamma(std::size_t t) const { return gamma_.at(t); }
  const AppMix& app_probs(std::size_t t) const { return app_probs_.at(t); }
  const AppParams& params() const { return params_; }
  std::span<const double> gammas() const { return gamma_; }

 private:
  std::vector<double> gamma_;
  std::vector<AppMix> app_probs_;
  AppParams params_;
};

double eval_composite(const UtilityModel& model, std::size_t t, double rate);
double marginal(const UtilityModel& model, std::size_t t, double rate);
double curvature(const UtilityModel& model, std::size_t t, double rate);

/// Solvers never evaluate the streaming/social terms below this rate; the
/// composite is continued by its second-order Taylor expansion there.
inline constexpr double kRateFloor = 1e-6;

struct UtilityEval {
  double value = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
};

/// Value and first two derivatives of the composite, defined for every real
/// rate through the quadratic continuation below kRateFloor.
UtilityEval evaluate_smoothed(const UtilityModel& model, std::size_t t, double rate);

}  // namespace creditband
