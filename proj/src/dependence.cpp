#include "vinedep/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vinedep {

namespace {

std::int64_t tie_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Sorts v ascending, returns the number of inversions removed.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi), v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

ConcordanceCounts concordance_counts(const Eigen::Ref<const Vector>& x,
                                     const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "kendall_tau inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::InputOutOfRange, "kendall_tau needs at least 2 observations");
  const auto n = static_cast<std::size_t>(x.size());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    return x[ia] < x[ib] || (x[ia] == x[ib] && y[ia] < y[ib]);
  });

  ConcordanceCounts c;
  c.pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[static_cast<Eigen::Index>(order[i])];

  std::int64_t run_x = 1, run_xy = 1;
  for (std::size_t i = 1; i < n; ++i) {
    const auto prev = static_cast<Eigen::Index>(order[i - 1]);
    const auto cur = static_cast<Eigen::Index>(order[i]);
    if (x[cur] == x[prev]) {
      ++run_x;
      if (y[cur] == y[prev]) {
        ++run_xy;
      } else {
        c.tied_xy += tie_pairs(run_xy);
        run_xy = 1;
      }
    } else {
      c.tied_x += tie_pairs(run_x);
      c.tied_xy += tie_pairs(run_xy);
      run_x = 1;
      run_xy = 1;
    }
  }
  c.tied_x += tie_pairs(run_x);
  c.tied_xy += tie_pairs(run_xy);

  std::vector<double> scratch(n);
  c.discordant = merge_count(ys, scratch, 0, n);

  std::int64_t run_y = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (ys[i] == ys[i - 1]) {
      ++run_y;
    } else {
      c.tied_y += tie_pairs(run_y);
      run_y = 1;
    }
  }
  c.tied_y += tie_pairs(run_y);
  return c;
}

double kendall_tau(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y, TauMode mode) {
  const ConcordanceCounts c = concordance_counts(x, y);
  const auto diff = static_cast<double>(c.concordant() - c.discordant);
  if (mode == TauMode::TauA) return diff / static_cast<double>(c.pairs);
  const double den = std::sqrt(static_cast<double>(c.pairs - c.tied_x)) *
                     std::sqrt(static_cast<double>(c.pairs - c.tied_y));
  if (den == 0.0) return 0.0;
  return std::clamp(diff / den, -1.0, 1.0);
}

TauMatrix tau_matrix(const Matrix& data, std::vector<std::string> names, TauMode mode) {
  const Eigen::Index d = data.cols();
  if (d < 2) throw Error(ErrorCode::InputOutOfRange, "tau matrix needs at least 2 columns");
  if (names.empty())
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("V" + std::to_string(j + 1));
  TauMatrix out{Matrix::Identity(d, d), std::move(names)};

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  std::vector<double> taus(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    taus[k] = kendall_tau(data.col(pairs[k].first), data.col(pairs[k].second), mode);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.values(pairs[k].first, pairs[k].second) = taus[k];
    out.values(pairs[k].second, pairs[k].first) = taus[k];
  }
  return out;
}

TauMatrix tau_matrix(const PseudoObservations& u, TauMode mode) {
  return tau_matrix(u.data, u.names, mode);
}

}  // namespace vinedep
