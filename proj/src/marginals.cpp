#include "vinedep/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace vinedep {

double EmpiricalCDF::operator()(double x) const {
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  const auto hi = std::upper_bound(lo, sorted_.end(), x);
  const double n1 = static_cast<double>(sorted_.size() + 1);
  const auto below = static_cast<double>(lo - sorted_.begin());
  const auto through = static_cast<double>(hi - sorted_.begin());
  if (lo == hi) return through / n1;
  // tied block occupies ranks below+1 .. through
  return 0.5 * (below + 1.0 + through) / n1;
}

EmpiricalCDF ecdf_fit(const Eigen::Ref<const Vector>& samples) {
  if (samples.size() < 2)
    throw Error(ErrorCode::InputOutOfRange, "ECDF needs at least 2 samples");
  if (!samples.allFinite())
    throw Error(ErrorCode::MalformedInput, "ECDF samples must be finite");
  EmpiricalCDF cdf;
  cdf.sorted_.assign(samples.data(), samples.data() + samples.size());
  std::sort(cdf.sorted_.begin(), cdf.sorted_.end());
  return cdf;
}

Vector pit_column(const Eigen::Ref<const Vector>& column) {
  const Eigen::Index n = column.size();
  if (n < 2) throw Error(ErrorCode::InputOutOfRange, "PIT needs at least 2 samples");
  if (!column.allFinite()) throw Error(ErrorCode::MalformedInput, "PIT input must be finite");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return column[a] < column[b]; });
  if (column[order.front()] == column[order.back()])
    throw Error(ErrorCode::DegenerateColumn, "all samples are identical");

  Vector out(n);
  const double n1 = static_cast<double>(n + 1);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && column[order[j + 1]] == column[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank / n1;
    i = j + 1;
  }
  return out;
}

PseudoObservations make_pseudo_observations(Matrix data, std::vector<std::string> names) {
  if (data.rows() < 2 || data.cols() < 2)
    throw Error(ErrorCode::InputOutOfRange, "pseudo-observations need N >= 2 and d >= 2");
  if (!(data.array() > 0.0).all() || !(data.array() < 1.0).all())
    throw Error(ErrorCode::InputOutOfRange, "pseudo-observations must lie strictly inside (0,1)");
  if (names.empty()) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) names.push_back("V" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != data.cols())
    throw Error(ErrorCode::LengthMismatch, "column name count does not match data");
  return PseudoObservations{std::move(data), std::move(names)};
}

PseudoObservations pit_transform(const Matrix& raw, std::vector<std::string> names) {
  if (names.empty()) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) names.push_back("V" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != raw.cols())
    throw Error(ErrorCode::LengthMismatch, "column name count does not match data");
  Matrix u(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    try {
      u.col(j) = pit_column(raw.col(j));
    } catch (const Error& e) {
      throw Error(e.code(), "column '" + names[static_cast<std::size_t>(j)] + "': " + e.what());
    }
  }
  return make_pseudo_observations(std::move(u), std::move(names));
}

double ks_uniform_statistic(const Eigen::Ref<const Vector>& u) {
  std::vector<double> s(u.data(), u.data() + u.size());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - s[i];
    const double below = s[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi theta form of the CDF converges quickly for small lambda.
    double cdf = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-18) break;
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

double ks_uniform_pvalue(const Eigen::Ref<const Vector>& u) {
  if (u.size() < 10) throw Error(ErrorCode::InputOutOfRange, "KS test needs at least 10 values");
  if (!(u.array() > 0.0).all() || !(u.array() < 1.0).all())
    throw Error(ErrorCode::InputOutOfRange, "KS input must lie strictly inside (0,1)");
  const double d = ks_uniform_statistic(u);
  return kolmogorov_survival(std::sqrt(static_cast<double>(u.size())) * d);
}

}  // namespace vinedep
