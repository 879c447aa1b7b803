#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsgraph/graph.hpp"
#include "hsgraph/random.hpp"

namespace hsgraph {

// Discrete heavy-tail fitting on positive integer samples (degrees).
// Zero is not a valid observation; callers drop zero degrees first.

/// Hurwitz zeta sum_{k>=0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

struct FitOptions {
  std::size_t min_tail = 50;
  std::optional<std::uint64_t> xmin;  // skip the scan and use this cutoff
  std::size_t bootstrap = 0;          // goodness-of-fit replicates, 0 = off
  std::uint64_t seed = 0;             // bootstrap sampler seed
};

struct PowerLawFit {
  double alpha = 0.0;
  std::uint64_t xmin = 1;
  double ks_distance = 0.0;
  std::size_t tail_size = 0;
  double tail_fraction = 0.0;
  double loglik = 0.0;
  bool low_confidence = false;
};

struct LognormalFit {
  double mu = 0.0;
  double sigma = 1.0;
  std::uint64_t xmin = 1;
  std::size_t tail_size = 0;
  double loglik = 0.0;
  bool low_confidence = false;
};

struct Comparison {
  double loglik_ratio = 0.0;  // > 0 favours the first model
  double p_value = 1.0;
};

/// Scans every distinct value as xmin (tail >= min_tail, at least two
/// distinct tail values), fits alpha by maximum likelihood and keeps the
/// cutoff with the smallest KS distance, ties to the smaller xmin.
/// Throws DataError "insufficient tail" when no cutoff qualifies.
PowerLawFit fit_power_law(std::span<const std::uint64_t> sample, const FitOptions& opt = {});

/// Alpha MLE and KS distance at a fixed cutoff.
PowerLawFit fit_power_law_at(std::span<const std::uint64_t> sample, std::uint64_t xmin);

/// Exact sup-norm gap between the tail's empirical CDF and the fitted model.
double power_law_ks(std::span<const std::uint64_t> sample, double alpha, std::uint64_t xmin);

/// Log-normal discretised by rounding and truncated below xmin; maximum
/// likelihood over (mu, log sigma). Throws DataError when the tail is empty
/// or constant.
LognormalFit fit_lognormal(std::span<const std::uint64_t> sample, std::uint64_t xmin);

/// Per-observation log-likelihoods over the tail (values >= xmin), in
/// sample order.
std::vector<double> power_law_loglik(std::span<const std::uint64_t> sample, double alpha,
                                     std::uint64_t xmin);
std::vector<double> lognormal_loglik(std::span<const std::uint64_t> sample, double mu,
                                     double sigma, std::uint64_t xmin);

/// Sum of pointwise differences a - b and the two-sided normal
/// approximation p-value for its sign. Sizes must match.
Comparison compare_loglik(std::span<const double> a, std::span<const double> b);

/// Power law minus log-normal. Throws UsageError when the fits were made
/// on different cutoffs.
Comparison compare_fits(std::span<const std::uint64_t> sample, const PowerLawFit& pl,
                        const LognormalFit& ln);

/// Samplers. The power law is exact up to a tabulated bound and uses the
/// continuous approximation beyond it; the log-normal rounds continuous
/// draws and rejects those below xmin.
std::vector<std::uint64_t> sample_power_law(Rng& rng, double alpha, std::uint64_t xmin,
                                            std::size_t n);
std::vector<std::uint64_t> sample_lognormal(Rng& rng, double mu, double sigma,
                                            std::uint64_t xmin, std::size_t n);

struct FitReport {
  std::string status = "ok";  // "ok" or the reason no fit was possible
  std::size_t sample_size = 0;
  std::optional<PowerLawFit> power_law;
  std::optional<LognormalFit> lognormal;
  std::optional<Comparison> comparison;
  std::optional<double> bootstrap_p;
};

/// Full procedure. Data problems (too small, constant, zeros) end up in
/// `status` rather than being thrown.
FitReport fit_report(std::span<const std::uint64_t> sample, const FitOptions& opt = {});
nlohmann::json to_json(const FitReport& r);

enum class DegreeKind : std::uint8_t { in, out, total };
DegreeKind parse_degree_kind(std::string_view s);

/// Non-zero degrees of the chosen kind. `total` on a directed graph is
/// in + out; every kind means plain degree on an undirected graph.
std::vector<std::uint64_t> positive_degrees(const ServiceGraph& g, DegreeKind kind);

}  // namespace hsgraph
