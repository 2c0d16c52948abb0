#include "orbitot/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "orbitot/errors.hpp"
#include "orbitot/group.hpp"
#include "orbitot/random.hpp"

namespace orbitot {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

McEstimate summarize(const std::vector<double>& values) {
  McEstimate r;
  r.n = values.size();
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  r.estimate = mean;
  r.std_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return r;
}

}  // namespace

Assignment hungarian(const Matrix& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.rows() != cost.cols()) throw InvalidArgument("hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw InvalidArgument("hungarian: cost matrix has non-finite entries");
  Assignment result;
  if (n == 0) return result;

  // Row-major copy, 1-based indices as in the classical formulation.
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      const double* row = &a[(i0 - 1) * n];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.permutation.assign(n, -1);
  for (std::size_t j = 1; j <= n; ++j) result.permutation[match[j] - 1] = static_cast<int>(j - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += a[i * n + static_cast<std::size_t>(result.permutation[i])];
  result.cost = total / static_cast<double>(n);
  return result;
}

Matrix squared_distance_matrix(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw DimensionMismatch("point clouds have different dimensions");
  const Vector xn = x.rowwise().squaredNorm();
  const Vector yn = y.rowwise().squaredNorm();
  Matrix c = (-2.0 * x * y.transpose()).eval();
  c.colwise() += xn;
  c.rowwise() += yn.transpose();
  // Guard against tiny negative values from cancellation.
  return c.cwiseMax(0.0);
}

double sampled_kantorovich(const DistributionSpec& mu0, const DistributionSpec& mu1, std::size_t n,
                           std::uint64_t seed0, std::uint64_t seed1) {
  if (n < 1 || n > kMaxAssignmentSize) {
    std::ostringstream os;
    os << "sampled_kantorovich: n=" << n << " outside [1, " << kMaxAssignmentSize << "]";
    throw InvalidArgument(os.str());
  }
  if (sample_dim(mu0) != sample_dim(mu1)) throw DimensionMismatch("laws have different dimensions");
  const Matrix x = sample(mu0, n, seed0);
  const Matrix y = sample(mu1, n, seed1);
  return hungarian(squared_distance_matrix(x, y)).cost;
}

double sampled_kantorovich(const DistributionSpec& mu0, const DistributionSpec& mu1, std::size_t n,
                           std::uint64_t seed) {
  return sampled_kantorovich(mu0, mu1, n, derive_seed(seed, 0), derive_seed(seed, 1));
}

bool McEstimate::within(double target, double k) const {
  return std::abs(estimate - target) <= std::max(k * std_error, 1e-12);
}

McEstimate mc_monge_cost(const MongeMap& map, const DistributionSpec& mu0, std::size_t n,
                         std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("mc_monge_cost needs n >= 2");
  const Matrix x = sample(mu0, n, seed);
  const Matrix y = apply_map(map, x);
  const Vector d = (x - y).rowwise().squaredNorm();
  return summarize(std::vector<double>(d.data(), d.data() + d.size()));
}

McEstimate mc_wishart_moment(const Matrix& u, const Matrix& v, double p, int d, std::size_t n,
                             std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("mc_wishart_moment needs n >= 2");
  if (u.rows() != d || u.cols() != d || v.rows() != d || v.cols() != d) {
    throw DimensionMismatch("mc_wishart_moment: U and V must be d x d");
  }
  const auto xs = sample_wishart(reference_wishart(d, p), n, seed);
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = (u * xs[k] * v * xs[k]).trace();
  return summarize(values);
}

std::vector<double> continuity_probe(const Vector& m0, const Matrix& cov0, const Vector& m1,
                                     const Matrix& cov1, const std::vector<double>& eps_ladder) {
  if (eps_ladder.empty()) throw InvalidArgument("continuity_probe: empty ladder");
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    const double e = eps_ladder[k];
    if (!std::isfinite(e) || e < 1e-12) {
      throw InvalidArgument("continuity_probe: every epsilon must be finite and >= 1e-12");
    }
    if (k > 0 && !(e < eps_ladder[k - 1])) {
      throw InvalidArgument("continuity_probe: ladder must be strictly decreasing");
    }
  }
  std::vector<double> out;
  out.reserve(eps_ladder.size());
  for (double e : eps_ladder) out.push_back(regularized_gaussian_cost(m0, cov0, m1, cov1, e));
  return out;
}

PairedAssignment paired_assignment_check(const MongeMap& map, const DistributionSpec& mu0,
                                         std::size_t n, std::uint64_t seed) {
  if (n < 1 || n > kMaxAssignmentSize) {
    throw InvalidArgument("paired_assignment_check: n outside [1, 2048]");
  }
  const Matrix x = sample(mu0, n, seed);
  const Matrix y = apply_map(map, x);
  PairedAssignment r;
  r.n = n;
  r.monge_cost = (x - y).rowwise().squaredNorm().mean();
  r.assignment_cost = hungarian(squared_distance_matrix(x, y)).cost;
  const double scale = std::max(r.monge_cost, std::numeric_limits<double>::min());
  r.relative_gap = (r.monge_cost - r.assignment_cost) / scale;
  return r;
}

bool OracleReport::passed() const {
  for (const auto& c : checks) {
    if (c.applicable && !c.passed) return false;
  }
  return true;
}

OracleReport validate(const DistributionSpec& mu0, const DistributionSpec& mu1,
                      const TransportSolution& solution, const ValidationConfig& config) {
  if (config.n_trials < 1) throw InvalidArgument("validation needs at least one trial");
  OracleReport r;
  r.closed_form = solution.cost;

  auto start = std::chrono::steady_clock::now();
  r.mc_seed = derive_seed(config.base_seed, std::numeric_limits<std::uint64_t>::max());
  r.mc_monge = mc_monge_cost(solution.map, mu0, config.mc_samples, r.mc_seed);
  r.mc_seconds = seconds_since(start);

  std::vector<double> costs;
  for (std::size_t t = 0; t < config.n_trials; ++t) {
    TrialRow row;
    row.trial = t;
    row.seed = derive_seed(config.base_seed, t);
    row.n = config.n_samples;
    start = std::chrono::steady_clock::now();
    row.assignment_cost = sampled_kantorovich(mu0, mu1, config.n_samples, row.seed);
    row.seconds = seconds_since(start);
    costs.push_back(row.assignment_cost);
    r.trials.push_back(row);
  }
  std::sort(costs.begin(), costs.end());
  const McEstimate agg = summarize(costs);
  r.assignment_kantorovich = agg.estimate;
  r.assignment_stderr = agg.std_error;

  start = std::chrono::steady_clock::now();
  r.paired_seed = derive_seed(config.base_seed, std::numeric_limits<std::uint64_t>::max() - 1);
  r.paired = paired_assignment_check(solution.map, mu0, config.n_samples, r.paired_seed);
  r.paired_seconds = seconds_since(start);

  std::ostringstream os;
  OracleCheck mc{"mc_monge_matches_closed_form", true, r.mc_monge.within(r.closed_form, config.mc_sigma), ""};
  os << "|" << r.mc_monge.estimate << " - " << r.closed_form << "| vs " << config.mc_sigma
     << " x stderr " << r.mc_monge.std_error;
  mc.detail = os.str();
  r.checks.push_back(mc);

  os.str("");
  OracleCheck paired{"paired_assignment_identity_optimal", true,
                     r.paired.relative_gap <= config.paired_gap_tol, ""};
  os << "relative gap " << r.paired.relative_gap << " <= " << config.paired_gap_tol;
  paired.detail = os.str();
  r.checks.push_back(paired);

  // E[W(mu0_n, mu1_n)] >= W(mu0, mu1) by joint convexity, so a mean far below
  // the closed form is a breach in any dimension.
  os.str("");
  OracleCheck lower{"assignment_not_below_closed_form", true,
                    r.assignment_kantorovich >= r.closed_form - config.mc_sigma * r.assignment_stderr -
                                                    1e-12 * std::max(1.0, r.closed_form),
                    ""};
  os << r.assignment_kantorovich << " >= " << r.closed_form << " - " << config.mc_sigma << " x "
     << r.assignment_stderr;
  lower.detail = os.str();
  r.checks.push_back(lower);

  os.str("");
  const int dim = sample_dim(mu0);
  OracleCheck assign{"assignment_matches_closed_form",
                     r.closed_form > 1e-12 && dim <= config.relative_check_max_dim, false, ""};
  if (assign.applicable) {
    const double rel = std::abs(r.assignment_kantorovich - r.closed_form) / r.closed_form;
    assign.passed = rel <= config.assignment_rel_tol;
    os << "relative error " << rel << " <= " << config.assignment_rel_tol;
  } else if (r.closed_form <= 1e-12) {
    os << "closed form is zero; empirical bias makes a relative check meaningless";
  } else {
    os << "sample dimension " << dim << " > " << config.relative_check_max_dim
       << "; empirical bias at this n exceeds the relative tolerance";
  }
  assign.detail = os.str();
  r.checks.push_back(assign);

  OracleCheck cert{"certificate", true, solution.certificate.verdict == Verdict::certified,
                   to_string(solution.certificate.verdict)};
  r.checks.push_back(cert);
  return r;
}

}  // namespace orbitot
