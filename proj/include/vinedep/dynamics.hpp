#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vinedep/common.hpp"

namespace vinedep {

/// Daily series for one channel. views_per_video is T x videos; a video
/// contributes zeros before it exists.
struct ChannelSeries {
  std::string channel_id;
  std::vector<std::int64_t> dates;  // consecutive day numbers
  Vector subscribers;
  Matrix views_per_video;
  Vector comments;                  // daily totals; may be empty
  std::vector<int> uploads;         // 0/1 per day
};

/// Throws MalformedInput when lengths disagree, counts are negative or the
/// dates are not consecutive days.
void validate_series(const ChannelSeries& series);

/// Total daily views across the channel's videos.
Vector aggregate_views(const ChannelSeries& series);

struct GrangerModel {
  Vector a;  // subscriber lags 1..n_s
  Vector b;  // view lags 1..n_v
  double intercept = 0.0;
  bool has_intercept = false;
  Vector residuals;
  Matrix cov;  // coefficient covariance, order (a, b, intercept)
  double sigma2 = 0.0;
  int n_s = 0;
  int n_v = 0;
  /// Spectral radius of the AR companion matrix of a.
  double spectral_radius = 0.0;
  bool stationarity_warning = false;
};

/// Least-squares fit of s(t) on s(t-1..t-n_s) and v(t-1..t-n_v).
GrangerModel fit_granger(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& v, int n_s = 3,
                         int n_v = 3, bool intercept = false);

/// Lagged regressor matrix used by fit_granger (rows t = max(n_s, n_v) .. T-1).
Matrix granger_design(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& v, int n_s, int n_v,
                      bool intercept);

double box_ljung_statistic(const Eigen::Ref<const Vector>& residuals, int lags);
/// Chi-square p-value with max(1, lags - fitted_params) degrees of freedom.
double box_ljung_pvalue(const Eigen::Ref<const Vector>& residuals, int lags, int fitted_params = 0);

/// Wald test of b = 0 against chi-square(n_v).
double wald_granger_pvalue(const GrangerModel& model);

struct Periodogram {
  Vector frequencies;  // cycles per day, k/T for k = 1..floor(T/2)
  Vector powers;
};

/// One-sided power spectrum of the mean-removed series; the powers sum to T
/// times the (population) variance.
Periodogram periodogram(const Eigen::Ref<const Vector>& series);
Periodogram periodogram(const std::vector<int>& uploads);

struct Dominance {
  bool is_dominant = false;
  double period_days = 0.0;
  double ratio = 0.0;
};

/// Peak power against the largest competitor that is not a harmonic of the
/// schedule frequency; dominant when the ratio exceeds 2. The schedule
/// frequency is the peak, or the lowest bin it is a harmonic of when that
/// bin holds a quarter of the peak power and exceeds twice every power
/// outside its own harmonic family.
Dominance dominant_schedule(const Vector& frequencies, const Vector& powers);

struct OffScheduleGain {
  double view_gain_frac = 0.0;
  std::optional<double> comment_gain_frac;
  std::size_t on_schedule = 0;
  std::size_t off_schedule = 0;
  double phase = 0.0;
};

/// Uploads within one day of a schedule tick are on schedule (the phase is
/// chosen to maximise that count). Each upload is scored by the sum of the
/// next 7 daily values starting on its upload day; the result is the share of
/// off-schedule uploads beating the median on-schedule score.
OffScheduleGain off_schedule_gain(const ChannelSeries& series, double schedule_period, const Vector& views,
                                  const Vector& comments);

struct DynamicsConfig {
  int n_s = 3;
  int n_v = 3;
  int ljung_lags = 10;
  double confidence = 0.95;
  bool intercept = false;
  /// Views enter the regression as cumulative totals instead of daily increments.
  bool cumulative_views = false;
  /// Skip channels that upload on more than 80% of days.
  bool exclude_daily_uploaders = false;
};

struct ChannelReport {
  std::string channel_id;
  std::size_t days = 0;
  bool excluded = false;
  std::optional<double> box_ljung_p;
  std::optional<bool> model_adequate;
  std::optional<double> wald_p;
  std::optional<bool> granger_causes;
  std::optional<bool> stationarity_warning;
  std::optional<bool> is_dominant;
  std::optional<double> period_days;
  std::optional<double> dominance_ratio;
  std::optional<double> view_gain_frac;
  std::optional<double> comment_gain_frac;
  std::string note;
  std::string error;
};

ChannelReport analyse_channel(const ChannelSeries& series, const DynamicsConfig& config = {});

/// Per-channel analyses; failures are recorded per row and never abort the batch.
std::vector<ChannelReport> analyse_channels(const std::vector<ChannelSeries>& channels,
                                            const DynamicsConfig& config = {});

}  // namespace vinedep
