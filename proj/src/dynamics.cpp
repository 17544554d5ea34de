#include "vinedep/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <unsupported/Eigen/FFT>

namespace vinedep {

void validate_series(const ChannelSeries& s) {
  const auto t = static_cast<Eigen::Index>(s.dates.size());
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::MalformedInput, "channel " + s.channel_id + ": " + what);
  };
  if (s.subscribers.size() != t || s.views_per_video.rows() != t || static_cast<Eigen::Index>(s.uploads.size()) != t ||
      (s.comments.size() != 0 && s.comments.size() != t))
    fail("series lengths differ");
  for (std::size_t i = 1; i < s.dates.size(); ++i)
    if (s.dates[i] != s.dates[i - 1] + 1) fail("dates are not consecutive days");
  if ((s.subscribers.array() < 0).any() || (s.views_per_video.array() < 0).any() || (s.comments.array() < 0).any())
    fail("negative counts");
  for (int x : s.uploads)
    if (x != 0 && x != 1) fail("upload indicator must be 0 or 1");
}

Vector aggregate_views(const ChannelSeries& series) {
  if (series.views_per_video.cols() == 0) return Vector::Zero(static_cast<Eigen::Index>(series.dates.size()));
  return series.views_per_video.rowwise().sum();
}

// ---------------------------------------------------------------- Granger

Matrix granger_design(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& v, int n_s, int n_v,
                      bool intercept) {
  const Eigen::Index lag = std::max(n_s, n_v);
  const Eigen::Index rows = s.size() - lag;
  Matrix x(rows, n_s + n_v + (intercept ? 1 : 0));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + lag;
    for (int k = 1; k <= n_s; ++k) x(r, k - 1) = s[t - k];
    for (int k = 1; k <= n_v; ++k) x(r, n_s + k - 1) = v[t - k];
    if (intercept) x(r, n_s + n_v) = 1.0;
  }
  return x;
}

GrangerModel fit_granger(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& v, int n_s, int n_v,
                         bool intercept) {
  if (n_s < 1 || n_v < 1) throw Error(ErrorCode::InputOutOfRange, "lag orders must be at least 1");
  if (s.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "subscriber and view series differ in length");
  if (s.size() < 10 * (n_s + n_v))
    throw Error(ErrorCode::InputOutOfRange, "series shorter than 10 * (n_s + n_v)");
  const Eigen::Index lag = std::max(n_s, n_v);
  const Matrix x = granger_design(s, v, n_s, n_v, intercept);
  const Vector y = s.tail(s.size() - lag);
  const Eigen::Index p = x.cols();

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  qr.compute(x);
  if (qr.rank() < p) throw Error(ErrorCode::CollinearDesign, "lagged regressors are linearly dependent");
  const Vector beta = qr.solve(y);

  GrangerModel m;
  m.n_s = n_s;
  m.n_v = n_v;
  m.a = beta.head(n_s);
  m.b = beta.segment(n_s, n_v);
  m.has_intercept = intercept;
  if (intercept) m.intercept = beta[p - 1];
  m.residuals = y - x * beta;
  m.sigma2 = m.residuals.squaredNorm() / static_cast<double>(x.rows() - p);
  const Matrix xtx = x.transpose() * x;
  m.cov = m.sigma2 * xtx.ldlt().solve(Matrix::Identity(p, p));

  Matrix companion = Matrix::Zero(n_s, n_s);
  companion.row(0) = m.a.transpose();
  for (int i = 1; i < n_s; ++i) companion(i, i - 1) = 1.0;
  m.spectral_radius = companion.eigenvalues().cwiseAbs().maxCoeff();
  m.stationarity_warning = m.spectral_radius >= 0.98;
  return m;
}

double box_ljung_statistic(const Eigen::Ref<const Vector>& residuals, int lags) {
  const Eigen::Index t = residuals.size();
  if (lags < 1 || 4 * lags >= t) throw Error(ErrorCode::InputOutOfRange, "Box-Ljung needs 1 <= lags < T/4");
  const Vector e = residuals.array() - residuals.mean();
  const double denom = e.squaredNorm();
  if (denom == 0.0) return 0.0;
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    const double rho = e.tail(t - k).dot(e.head(t - k)) / denom;
    q += rho * rho / static_cast<double>(t - k);
  }
  return static_cast<double>(t) * (static_cast<double>(t) + 2.0) * q;
}

double box_ljung_pvalue(const Eigen::Ref<const Vector>& residuals, int lags, int fitted_params) {
  const double q = box_ljung_statistic(residuals, lags);
  if (q <= 0.0) return 1.0;
  const boost::math::chi_squared dist(std::max(1, lags - fitted_params));
  return boost::math::cdf(boost::math::complement(dist, q));
}

double wald_granger_pvalue(const GrangerModel& m) {
  if (m.n_v < 1) throw Error(ErrorCode::InputOutOfRange, "the model has no view lags");
  const Matrix vb = m.cov.block(m.n_s, m.n_s, m.n_v, m.n_v);
  const Eigen::LDLT<Matrix> ldlt(vb);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any())
    throw Error(ErrorCode::SingularCovariance, "covariance of the view coefficients is singular");
  const double w = m.b.dot(ldlt.solve(m.b));
  if (!std::isfinite(w)) throw Error(ErrorCode::SingularCovariance, "non-finite Wald statistic");
  const boost::math::chi_squared dist(m.n_v);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, w)));
}

// ---------------------------------------------------------------- periodicity

Periodogram periodogram(const Eigen::Ref<const Vector>& series) {
  const Eigen::Index t = series.size();
  if (t < 28) throw Error(ErrorCode::InputOutOfRange, "periodogram needs at least 28 days");
  std::vector<double> x(static_cast<std::size_t>(t));
  const double mean = series.mean();
  for (Eigen::Index i = 0; i < t; ++i) x[static_cast<std::size_t>(i)] = series[i] - mean;
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, x);

  const Eigen::Index half = t / 2;
  Periodogram out;
  out.frequencies.resize(half);
  out.powers.resize(half);
  for (Eigen::Index k = 1; k <= half; ++k) {
    const double mag2 = std::norm(spec[static_cast<std::size_t>(k)]);
    const bool nyquist = 2 * k == t;
    out.frequencies[k - 1] = static_cast<double>(k) / static_cast<double>(t);
    out.powers[k - 1] = (nyquist ? 1.0 : 2.0) * mag2 / static_cast<double>(t);
  }
  return out;
}

Periodogram periodogram(const std::vector<int>& uploads) {
  Vector x(static_cast<Eigen::Index>(uploads.size()));
  for (std::size_t i = 0; i < uploads.size(); ++i) x[static_cast<Eigen::Index>(i)] = uploads[i];
  return periodogram(x);
}

Dominance dominant_schedule(const Vector& frequencies, const Vector& powers) {
  if (frequencies.size() == 0 || frequencies.size() != powers.size())
    throw Error(ErrorCode::InputOutOfRange, "spectrum must be nonempty");
  const double top = powers.maxCoeff();
  Dominance d;
  if (top <= 0.0) return d;
  // Near-ties resolve to the lowest frequency.
  Eigen::Index peak = 0;
  while (powers[peak] < top * (1.0 - 1e-9)) ++peak;
  auto is_harmonic = [](double m) { return m > 1.5 && std::abs(m - std::round(m)) < 1e-6; };
  // Largest power outside bin `base` and its harmonics.
  auto outside_family = [&](Eigen::Index base) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < powers.size(); ++k)
      if (k != base && !is_harmonic(frequencies[k] / frequencies[base])) best = std::max(best, powers[k]);
    return best;
  };
  // A periodic impulse train spreads its power over the harmonics, so a
  // harmonic can outrank the fundamental. Fold back to the lowest bin the
  // peak is a harmonic of when that bin holds at least a quarter of the peak
  // power and beats everything outside its harmonic family by the dominance factor.
  for (Eigen::Index k = 0; k < peak; ++k) {
    if (is_harmonic(frequencies[peak] / frequencies[k]) && powers[k] >= 0.25 * top &&
        powers[k] > 2.0 * outside_family(k)) {
      peak = k;
      break;
    }
  }
  const double f0 = frequencies[peak];
  d.period_days = 1.0 / f0;

  auto runner_up = [&](bool skip_harmonics) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < powers.size(); ++k) {
      if (k == peak) continue;
      if (skip_harmonics && is_harmonic(frequencies[k] / f0)) continue;
      best = std::max(best, powers[k]);
    }
    return best;
  };
  bool any_other = false;
  for (Eigen::Index k = 0; k < powers.size(); ++k) {
    if (k != peak && !is_harmonic(frequencies[k] / f0)) any_other = true;
  }
  const double second = runner_up(any_other);
  d.ratio = second > 0.0 ? top / second : std::numeric_limits<double>::infinity();
  d.is_dominant = d.ratio > 2.0;
  return d;
}

// ---------------------------------------------------------------- off-schedule gain

namespace {

double tick_distance(double t, double phase, double period) {
  const double r = std::fmod(t - phase, period);
  return std::abs(r - period * std::round(r / period));
}

double median(std::vector<double> x) {
  const std::size_t n = x.size();
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n / 2), x.end());
  const double hi = x[n / 2];
  if (n % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n / 2)));
}

constexpr int kWindow = 7;
constexpr double kTolerance = 1.0 + 1e-9;

}  // namespace

OffScheduleGain off_schedule_gain(const ChannelSeries& series, double period, const Vector& views,
                                  const Vector& comments) {
  if (!(period > 0.0)) throw Error(ErrorCode::InputOutOfRange, "schedule period must be positive");
  const auto t = static_cast<Eigen::Index>(series.uploads.size());
  if (views.size() != t || (comments.size() != 0 && comments.size() != t))
    throw Error(ErrorCode::LengthMismatch, "metric series must match the upload series");
  std::vector<double> days;
  for (Eigen::Index i = 0; i < t; ++i)
    if (series.uploads[static_cast<std::size_t>(i)]) days.push_back(static_cast<double>(i));
  if (days.empty()) throw Error(ErrorCode::NoOffScheduleUploads, "the channel has no uploads");

  OffScheduleGain g;
  std::size_t best = 0;
  std::vector<double> phases;
  for (double d : days) phases.push_back(std::fmod(d, period));
  std::sort(phases.begin(), phases.end());
  for (double phase : phases) {
    const auto hits = static_cast<std::size_t>(std::count_if(
        days.begin(), days.end(), [&](double d) { return tick_distance(d, phase, period) <= kTolerance; }));
    if (hits > best) {
      best = hits;
      g.phase = phase;
    }
  }

  std::vector<Eigen::Index> on, off;
  for (double d : days) (tick_distance(d, g.phase, period) <= kTolerance ? on : off).push_back(static_cast<Eigen::Index>(d));
  g.on_schedule = on.size();
  g.off_schedule = off.size();
  if (off.empty()) throw Error(ErrorCode::NoOffScheduleUploads, "every upload is on schedule");

  auto gain = [&](const Vector& metric) -> std::optional<double> {
    auto scores = [&](const std::vector<Eigen::Index>& ix) {
      std::vector<double> out;
      for (Eigen::Index d : ix)
        if (d + kWindow <= t) out.push_back(metric.segment(d, kWindow).sum());
      return out;
    };
    const auto on_scores = scores(on), off_scores = scores(off);
    if (off_scores.empty()) throw Error(ErrorCode::NoOffScheduleUploads, "no off-schedule upload has a full window");
    if (on_scores.empty()) throw Error(ErrorCode::InputOutOfRange, "no on-schedule upload has a full window");
    const double ref = median(on_scores);
    const auto wins = std::count_if(off_scores.begin(), off_scores.end(), [&](double s) { return s > ref; });
    return static_cast<double>(wins) / static_cast<double>(off_scores.size());
  };
  g.view_gain_frac = *gain(views);
  if (comments.size() != 0) g.comment_gain_frac = gain(comments);
  return g;
}

// ---------------------------------------------------------------- batch

ChannelReport analyse_channel(const ChannelSeries& series, const DynamicsConfig& config) {
  ChannelReport r;
  r.channel_id = series.channel_id;
  r.days = series.dates.size();
  auto add = [](std::string& field, const std::string& text) {
    if (!field.empty()) field += "; ";
    field += text;
  };
  try {
    validate_series(series);
  } catch (const Error& e) {
    r.error = e.what();
    return r;
  }
  const auto uploads = std::accumulate(series.uploads.begin(), series.uploads.end(), 0);
  if (config.exclude_daily_uploaders && r.days > 0 && uploads > 0.8 * static_cast<double>(r.days)) {
    r.excluded = true;
    r.note = "uploads on more than 80% of days";
    return r;
  }

  const Vector daily = aggregate_views(series);
  Vector v = daily;
  if (config.cumulative_views)
    for (Eigen::Index i = 1; i < v.size(); ++i) v[i] += v[i - 1];

  try {
    const GrangerModel m = fit_granger(series.subscribers, v, config.n_s, config.n_v, config.intercept);
    r.stationarity_warning = m.stationarity_warning;
    if (m.stationarity_warning) add(r.note, "AR spectral radius >= 0.98");
    r.box_ljung_p = box_ljung_pvalue(m.residuals, config.ljung_lags, config.n_s);
    r.model_adequate = *r.box_ljung_p > 0.05;
    r.wald_p = wald_granger_pvalue(m);
    r.granger_causes = *r.wald_p < 1.0 - config.confidence;
  } catch (const Error& e) {
    add(r.error, e.what());
  }

  try {
    const Periodogram p = periodogram(series.uploads);
    const Dominance d = dominant_schedule(p.frequencies, p.powers);
    r.is_dominant = d.is_dominant;
    r.period_days = d.period_days;
    r.dominance_ratio = d.ratio;
    if (d.is_dominant) {
      try {
        const OffScheduleGain g = off_schedule_gain(series, d.period_days, daily, series.comments);
        r.view_gain_frac = g.view_gain_frac;
        r.comment_gain_frac = g.comment_gain_frac;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoOffScheduleUploads) add(r.note, "no off-schedule uploads");
        else add(r.error, e.what());
      }
    }
  } catch (const Error& e) {
    add(r.error, e.what());
  }
  return r;
}

std::vector<ChannelReport> analyse_channels(const std::vector<ChannelSeries>& channels,
                                            const DynamicsConfig& config) {
  std::vector<ChannelReport> out(channels.size());
  parallel_for(channels.size(), [&](std::size_t i) { out[i] = analyse_channel(channels[i], config); });
  return out;
}

}  // namespace vinedep
