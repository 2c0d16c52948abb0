#pragma once

// Algebraic optimality certificates for quadratic cost. A map of the form
// x ↦ ∇ of a convex potential is optimal; for the orbit families that
// reduces to finite checks:
//
//   affine / congruence   linear part symmetric positive definite
//   diagonal              all ratios positive
//   quantile (1-D)        nondecreasing on a probe grid
//
// plus a push-forward check that the map carries μ₀ onto μ₁.

#include <cstdint>
#include <functional>
#include <vector>

#include "orbitot/distributions.hpp"
#include "orbitot/maps.hpp"

namespace orbitot {

inline constexpr int kMonotoneProbeGrid = 1024;
inline constexpr double kMonotoneSlack = 1e-10;
inline constexpr double kPushforwardTol = 1e-8;
inline constexpr std::size_t kKsSamples = 10000;
inline constexpr std::uint64_t kCertificateSeed = 0x5eed0c3a7ULL;
inline constexpr int kCongruenceProbes = 100;

enum class Verdict { certified, upper_bound_only };

std::string to_string(Verdict v);

struct CheckResult {
  bool applicable = false;
  bool passed = false;
  double value = 0.0;  // min eigenvalue, residual, or min slope
};

struct CertificateReport {
  Family family = Family::gaussian;
  CheckResult spd;
  CheckResult pushforward;
  CheckResult monotonicity;
  Verdict verdict = Verdict::upper_bound_only;

  /// Sets verdict: certified iff at least one check applies and every
  /// applicable check passed.
  void finalize();
};

CertificateReport certify_affine(const AffineMap& map);

/// SPD check on t plus ⟨H, t H t⟩ ≥ 0 for kCongruenceProbes random
/// symmetric H drawn with `probe_seed`.
CertificateReport certify_congruence(const CongruenceMap& map,
                                     std::uint64_t probe_seed = kCertificateSeed);

CertificateReport certify_monotone(const DiagMap& map);
CertificateReport certify_monotone(const QuantileMap& map, int probe_grid = kMonotoneProbeGrid);
CertificateReport certify_monotone(const ProductQuantileMap& map,
                                   int probe_grid = kMonotoneProbeGrid);
/// Finite-difference slopes of `map` over `probe_grid` quantile-spaced
/// points of `source`.
CertificateReport certify_monotone(const std::function<double(double)>& map,
                                   const Marginal1D& source, int probe_grid = kMonotoneProbeGrid);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value c(α)·√((n+m)/(nm)); α ∈ {0.10, 0.05, 0.01, 0.001}.
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.01);

/// Parameter-level residual for Gaussian/elliptical/Wishart maps, KS statistic
/// for 1-D and product maps (max over coordinates). Throws InvalidArgument on
/// family mismatch.
double pushforward_residual(const MongeMap& map, const DistributionSpec& a,
                            const DistributionSpec& b);

/// Threshold pushforward_residual must stay below for this family.
double pushforward_threshold(Family family);

/// Runs every applicable check for the map between a and b.
CertificateReport certify(const MongeMap& map, const DistributionSpec& a,
                          const DistributionSpec& b);

}  // namespace orbitot
