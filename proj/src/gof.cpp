#include "vinedep/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vinedep {

namespace {

struct Coordinate {
  double centre;
  double step;
};

// Steps scale with |theta|; the centre is pulled inside the fitting box so
// every probe stays a valid parameter.
std::vector<Coordinate> coordinates(const EdgeSpecs& specs, const Vector& theta) {
  std::vector<Coordinate> out;
  Eigen::Index k = 0;
  for (const auto& tree : specs)
    for (const auto& s : tree) {
      const ParamBounds b = fit_bounds(s.family);
      for (std::size_t i = 0; i < b.lower.size(); ++i, ++k) {
        const double h = 1e-4 * std::max(1.0, std::abs(theta[k]));
        const double c = std::clamp(theta[k], b.lower[i] + 2.0 * h, b.upper[i] - 2.0 * h);
        out.push_back({c, h});
      }
    }
  return out;
}

}  // namespace

InfoMatrices info_matrices(const FittedVine& vine, const PseudoObservations& u) {
  const Vector theta = parameter_vector(vine);
  const Eigen::Index p = theta.size();
  if (p == 0) throw Error(ErrorCode::InputOutOfRange, "the vine has no free parameters");
  const EdgeSpecs specs = edge_specs(vine);
  const auto coords = coordinates(specs, theta);
  Vector centre(p);
  for (Eigen::Index k = 0; k < p; ++k) centre[k] = coords[static_cast<std::size_t>(k)].centre;

  auto rows_at = [&](const Vector& th) {
    return vine_log_density_rows(vine.structure, specs_with_parameters(specs, th), u.data);
  };
  auto shifted = [&](std::initializer_list<std::pair<Eigen::Index, double>> moves) {
    Vector th = centre;
    for (const auto& [k, sign] : moves) th[k] += sign * coords[static_cast<std::size_t>(k)].step;
    return th;
  };

  const Vector f0 = rows_at(centre);
  const double base = f0.sum();
  std::vector<Vector> plus(static_cast<std::size_t>(p)), minus(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) {
    plus[static_cast<std::size_t>(k)] = rows_at(shifted({{k, +1.0}}));
    minus[static_cast<std::size_t>(k)] = rows_at(shifted({{k, -1.0}}));
  }

  Matrix scores(u.rows(), p);
  Matrix hessian(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double h = coords[static_cast<std::size_t>(k)].step;
    const auto& fp = plus[static_cast<std::size_t>(k)];
    const auto& fm = minus[static_cast<std::size_t>(k)];
    scores.col(k) = (fp - fm) / (2.0 * h);
    hessian(k, k) = (fp.sum() - 2.0 * base + fm.sum()) / (h * h);
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
  std::vector<double> cross(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t q) {
    const auto [i, j] = pairs[q];
    const double hi = coords[static_cast<std::size_t>(i)].step, hj = coords[static_cast<std::size_t>(j)].step;
    const double fpp = rows_at(shifted({{i, +1.0}, {j, +1.0}})).sum();
    const double fpm = rows_at(shifted({{i, +1.0}, {j, -1.0}})).sum();
    const double fmp = rows_at(shifted({{i, -1.0}, {j, +1.0}})).sum();
    const double fmm = rows_at(shifted({{i, -1.0}, {j, -1.0}})).sum();
    cross[q] = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
  });
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    hessian(i, j) = hessian(j, i) = cross[q];
  }
  if (!hessian.allFinite() || !scores.allFinite())
    throw Error(ErrorCode::NumericalOverflow, "non-finite log-likelihood derivatives");

  InfoMatrices m;
  m.hessian = 0.5 * (hessian + hessian.transpose());
  m.outer_product = scores.transpose() * scores;
  m.outer_product = 0.5 * (m.outer_product + m.outer_product.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(m.hessian, Eigen::EigenvaluesOnly);
  const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().maxCoeff() > 1e-3 * scale + 1e-8)
    throw Error(ErrorCode::SingularCurvature, "log-likelihood Hessian is not negative semidefinite");
  return m;
}

double white_statistic(const InfoMatrices& m, std::size_t n) {
  const Matrix sum = (m.hessian + m.outer_product) / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index j = 0; j < sum.cols(); ++j)
    for (Eigen::Index i = j; i < sum.rows(); ++i) ss += sum(i, j) * sum(i, j);
  return std::sqrt(ss);
}

double bootstrap_pvalue(double observed, const std::vector<double>& replicates) {
  const auto exceed = std::count_if(replicates.begin(), replicates.end(), [&](double r) { return r >= observed; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(replicates.size()) + 1.0);
}

WhiteTestResult white_test(const FittedVine& vine, const PseudoObservations& u, std::size_t n_bootstrap,
                           std::uint64_t seed) {
  if (n_bootstrap < 20) throw Error(ErrorCode::InputOutOfRange, "the bootstrap needs at least 20 replicates");
  if (u.cols() != vine.dim()) throw Error(ErrorCode::LengthMismatch, "data dimension does not match the vine");
  const auto n = static_cast<std::size_t>(u.rows());

  WhiteTestResult result;
  result.statistic = white_statistic(info_matrices(vine, u), n);

  std::vector<double> stats(n_bootstrap, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_bootstrap, [&](std::size_t b) {
    try {
      const PseudoObservations sim =
          vine_simulate(vine, static_cast<Eigen::Index>(n), derive_seed(seed, "white-bootstrap", b));
      const FittedVine refit = refit_parameters(vine, sim);
      stats[b] = white_statistic(info_matrices(refit, sim), n);
    } catch (const Error&) {
      // counted below
    }
  });
  for (double s : stats) {
    if (std::isfinite(s)) result.per_replicate_stats.push_back(s);
    else ++result.failed_replicates;
  }
  if (10 * result.failed_replicates >= n_bootstrap)
    throw Error(ErrorCode::TestUnreliable, std::to_string(result.failed_replicates) + " of " +
                                               std::to_string(n_bootstrap) + " bootstrap replicates failed");
  result.n_bootstrap = result.per_replicate_stats.size();
  result.p_value = bootstrap_pvalue(result.statistic, result.per_replicate_stats);
  return result;
}

}  // namespace vinedep
