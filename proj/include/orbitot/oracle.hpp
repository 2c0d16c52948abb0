#pragma once

// Ground truth that does not trust the closed forms: exact assignment on
// equal-weight empirical measures, Monte-Carlo estimates of Monge costs and
// Wishart moments, and the ε-regularization ladder for singular covariances.

#include <cstdint>
#include <string>
#include <vector>

#include "orbitot/distributions.hpp"
#include "orbitot/maps.hpp"
#include "orbitot/transport.hpp"

namespace orbitot {

inline constexpr std::size_t kMaxAssignmentSize = 2048;

struct Assignment {
  std::vector<int> permutation;  // row i is matched to column permutation[i]
  double cost = 0.0;             // mean matched cost, (1/n) Σᵢ C(i, π(i))
};

/// Minimum-cost perfect matching, O(n³) shortest augmenting paths with
/// potentials. Throws on non-square or non-finite input.
Assignment hungarian(const Matrix& cost);

/// Squared Euclidean distances between rows of x and rows of y.
Matrix squared_distance_matrix(const Matrix& x, const Matrix& y);

/// Empirical Kantorovich cost between n draws of mu0 (seed0) and n draws of
/// mu1 (seed1). Matrix-valued draws are compared in Frobenius norm.
double sampled_kantorovich(const DistributionSpec& mu0, const DistributionSpec& mu1, std::size_t n,
                           std::uint64_t seed0, std::uint64_t seed1);

/// As above with seeds derive_seed(seed, 0) and derive_seed(seed, 1).
double sampled_kantorovich(const DistributionSpec& mu0, const DistributionSpec& mu1, std::size_t n,
                           std::uint64_t seed);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;

  /// |estimate − target| ≤ k·stderr (with a 1e-12 absolute floor).
  bool within(double target, double k = 3.0) const;
};

/// Mean of ‖x − T(x)‖² over n draws of mu0, with its standard error.
McEstimate mc_monge_cost(const MongeMap& map, const DistributionSpec& mu0, std::size_t n,
                         std::uint64_t seed);

/// Monte-Carlo estimate of E_{X∼W_d(I,p)}[Tr(U X V X)].
McEstimate mc_wishart_moment(const Matrix& u, const Matrix& v, double p, int d, std::size_t n,
                             std::uint64_t seed);

/// Gaussian cost at Σᵢ + εI for each ε of a strictly decreasing ladder with
/// every ε ≥ 1e-12.
std::vector<double> continuity_probe(const Vector& m0, const Matrix& cov0, const Vector& m1,
                                     const Matrix& cov1, const std::vector<double>& eps_ladder);

/// Draws x₁..xₙ from mu0 and solves the assignment between {xᵢ} and {T(xᵢ)}.
/// The identity matching is feasible, so assignment ≤ monge; an optimal map
/// is cyclically monotone and makes the two equal.
struct PairedAssignment {
  double monge_cost = 0.0;       // (1/n) Σ ‖xᵢ − T(xᵢ)‖²
  double assignment_cost = 0.0;  // optimal matching cost on the same clouds
  double relative_gap = 0.0;     // (monge − assignment) / max(monge, tiny)
  std::size_t n = 0;
};

PairedAssignment paired_assignment_check(const MongeMap& map, const DistributionSpec& mu0,
                                         std::size_t n, std::uint64_t seed);

struct ValidationConfig {
  std::size_t n_samples = 512;        // assignment size
  std::size_t n_trials = 4;           // independent assignment trials
  std::size_t mc_samples = 100000;    // Monte-Carlo Monge samples
  std::uint64_t base_seed = 42;
  double assignment_rel_tol = 0.15;   // |mean assignment − closed form| / closed form
  double mc_sigma = 3.0;              // MC acceptance in standard errors
  double paired_gap_tol = 1e-9;
  int relative_check_max_dim = 3;     // sample dimension up to which the relative check applies
};

struct TrialRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double assignment_cost = 0.0;
  double seconds = 0.0;
};

struct OracleCheck {
  std::string name;
  bool applicable = true;
  bool passed = false;
  std::string detail;
};

struct OracleReport {
  double closed_form = 0.0;
  McEstimate mc_monge;
  std::uint64_t mc_seed = 0;
  double assignment_kantorovich = 0.0;  // mean over trials
  double assignment_stderr = 0.0;       // across trials (0 for a single trial)
  std::vector<TrialRow> trials;
  PairedAssignment paired;
  std::uint64_t paired_seed = 0;
  std::vector<OracleCheck> checks;
  double mc_seconds = 0.0;
  double paired_seconds = 0.0;

  bool passed() const;
};

/// Runs the Monte-Carlo, independent-assignment and paired-assignment oracles
/// against `solution`. Trial seeds are derive_seed(base_seed, trial).
OracleReport validate(const DistributionSpec& mu0, const DistributionSpec& mu1,
                      const TransportSolution& solution, const ValidationConfig& config);

}  // namespace orbitot
