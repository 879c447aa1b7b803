#include "hsgraph/fitting.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "hsgraph/error.hpp"
#include "hsgraph/parallel.hpp"

namespace hsgraph {

namespace {

constexpr double kAlphaLo = 1.0 + 1e-6;
constexpr double kAlphaHi = 50.0;
constexpr double kSigmaLo = 1e-2;
constexpr double kSigmaHi = 50.0;
constexpr double kMuLo = -200.0;
constexpr double kMuHi = 50.0;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// B_2j / (2j)!
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
};

void require_positive(std::span<const std::uint64_t> sample) {
  if (std::find(sample.begin(), sample.end(), 0u) != sample.end()) {
    throw DataError("sample contains zero; only positive values can be fitted");
  }
}

/// Distinct values and their multiplicities, ascending.
struct Histogram {
  std::vector<std::uint64_t> values;
  std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const std::uint64_t> sample, std::uint64_t xmin) {
  std::vector<std::uint64_t> tail;
  for (auto x : sample)
    if (x >= xmin) tail.push_back(x);
  std::sort(tail.begin(), tail.end());
  Histogram h;
  for (auto x : tail) {
    if (h.values.empty() || h.values.back() != x) {
      h.values.push_back(x);
      h.counts.push_back(0);
    }
    ++h.counts.back();
  }
  return h;
}

double alpha_mle(double sum_log, std::size_t n, std::uint64_t xmin, bool* on_bound) {
  const double q = static_cast<double>(xmin);
  const double dn = static_cast<double>(n);
  auto nll = [&](double a) { return a * sum_log + dn * std::log(hurwitz_zeta(a, q)); };
  std::uintmax_t iters = 200;
  const auto [alpha, f] = boost::math::tools::brent_find_minima(
      nll, kAlphaLo, kAlphaHi, std::numeric_limits<double>::digits / 2, iters);
  (void)f;
  if (on_bound) *on_bound = alpha - kAlphaLo < 1e-4 || kAlphaHi - alpha < 1e-4;
  return alpha;
}

double ks_from_histogram(const Histogram& h, double alpha, std::uint64_t xmin) {
  const double z = hurwitz_zeta(alpha, static_cast<double>(xmin));
  const auto model_cdf = [&](std::uint64_t x) {
    return 1.0 - hurwitz_zeta(alpha, static_cast<double>(x) + 1.0) / z;
  };
  const double n = static_cast<double>(
      std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}));
  double below = 0.0;
  double gap = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    const auto d = h.values[i];
    // Just before a jump the empirical CDF is still flat.
    const bool flat_run = d > xmin && (i == 0 || d - 1 > h.values[i - 1]);
    if (flat_run) gap = std::max(gap, std::abs(below / n - model_cdf(d - 1)));
    below += static_cast<double>(h.counts[i]);
    gap = std::max(gap, std::abs(below / n - model_cdf(d)));
  }
  return gap;
}

// log of Phi(b) - Phi(a), a < b, without cancellation in either tail.
double log_normal_mass(double a, double b) {
  double p;
  if (a > 0) {
    p = 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
  } else {
    p = 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
  }
  if (p > 1e-300) return std::log(p);
  const double m = 0.5 * (a + b);
  return -0.5 * m * m - kLogSqrt2Pi + std::log(b - a);
}

// log Q(c), Q the standard normal upper tail.
double log_upper_tail(double c) {
  const double q = 0.5 * std::erfc(c / kSqrt2);
  if (q > 1e-300) return std::log(q);
  return -0.5 * c * c - std::log(c) - kLogSqrt2Pi;
}

double lognormal_point(std::uint64_t x, double mu, double sigma, double log_norm) {
  const double xd = static_cast<double>(x);
  const double a = (std::log(xd - 0.5) - mu) / sigma;
  const double b = (std::log(xd + 0.5) - mu) / sigma;
  return log_normal_mass(a, b) - log_norm;
}

double lognormal_log_norm(double mu, double sigma, std::uint64_t xmin) {
  return log_upper_tail((std::log(static_cast<double>(xmin) - 0.5) - mu) / sigma);
}

using Point = std::array<double, 2>;

/// Nelder-Mead on two parameters; returns the best vertex.
template <typename F>
Point nelder_mead(F&& f, Point start, Point step) {
  std::array<Point, 3> x = {start, start, start};
  x[1][0] += step[0];
  x[2][1] += step[1];
  std::array<double, 3> fx = {f(x[0]), f(x[1]), f(x[2])};
  for (int iter = 0; iter < 4000; ++iter) {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fx[i] < fx[j]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    const double size = std::max({std::abs(x[mid][0] - x[best][0]), std::abs(x[mid][1] - x[best][1]),
                                  std::abs(x[worst][0] - x[best][0]), std::abs(x[worst][1] - x[best][1])});
    if (fx[worst] - fx[best] <= 1e-12 * (1.0 + std::abs(fx[best])) && size < 1e-9) break;

    Point c{(x[best][0] + x[mid][0]) / 2, (x[best][1] + x[mid][1]) / 2};
    auto along = [&](double t) {
      return Point{c[0] + t * (x[worst][0] - c[0]), c[1] + t * (x[worst][1] - c[1])};
    };
    const Point r = along(-1.0);
    const double fr = f(r);
    if (fr < fx[best]) {
      const Point e = along(-2.0);
      const double fe = f(e);
      if (fe < fr) {
        x[worst] = e, fx[worst] = fe;
      } else {
        x[worst] = r, fx[worst] = fr;
      }
    } else if (fr < fx[mid]) {
      x[worst] = r, fx[worst] = fr;
    } else {
      const Point k = fr < fx[worst] ? along(-0.5) : along(0.5);
      const double fk = f(k);
      if (fk < std::min(fr, fx[worst])) {
        x[worst] = k, fx[worst] = fk;
      } else {
        for (int i : {mid, worst}) {
          x[i] = Point{(x[i][0] + x[best][0]) / 2, (x[i][1] + x[best][1]) / 2};
          fx[i] = f(x[i]);
        }
      }
    }
  }
  return x[std::min_element(fx.begin(), fx.end()) - fx.begin()];
}

}  // namespace

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) throw UsageError("hurwitz_zeta needs s > 1 and q > 0");
  // Direct head, then Euler-Maclaurin once the base clears both 12 and s.
  const double target = std::max(12.0, s);
  double sum = 0.0;
  double a = q;
  while (a < target) {
    sum += std::pow(a, -s);
    a += 1.0;
  }
  const double a_s = std::pow(a, -s);
  sum += a * a_s / (s - 1.0) + 0.5 * a_s;
  double rising = s;        // s (s+1) ... (s+2j-2)
  double power = a_s / a;   // a^(-s-2j+1)
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    const double term = kBernoulliOverFactorial[j] * rising * power;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
    const double k = static_cast<double>(2 * j + 1);
    rising *= (s + k) * (s + k + 1.0);
    power /= a * a;
  }
  return sum;
}

double power_law_ks(std::span<const std::uint64_t> sample, double alpha, std::uint64_t xmin) {
  const auto h = histogram(sample, xmin);
  if (h.values.empty()) throw DataError("empty tail at xmin " + std::to_string(xmin));
  return ks_from_histogram(h, alpha, xmin);
}

PowerLawFit fit_power_law_at(std::span<const std::uint64_t> sample, std::uint64_t xmin) {
  require_positive(sample);
  if (xmin == 0) throw UsageError("xmin must be positive");
  const auto h = histogram(sample, xmin);
  if (h.values.size() < 2) throw DataError("insufficient tail: fewer than two distinct values at xmin");
  PowerLawFit fit;
  fit.xmin = xmin;
  double sum_log = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    sum_log += static_cast<double>(h.counts[i]) * std::log(static_cast<double>(h.values[i]));
    fit.tail_size += h.counts[i];
  }
  fit.alpha = alpha_mle(sum_log, fit.tail_size, xmin, &fit.low_confidence);
  fit.ks_distance = ks_from_histogram(h, fit.alpha, xmin);
  fit.tail_fraction = static_cast<double>(fit.tail_size) / static_cast<double>(sample.size());
  fit.loglik = -fit.alpha * sum_log -
               static_cast<double>(fit.tail_size) * std::log(hurwitz_zeta(fit.alpha, static_cast<double>(xmin)));
  if (h.values.size() < 3) fit.low_confidence = true;
  return fit;
}

PowerLawFit fit_power_law(std::span<const std::uint64_t> sample, const FitOptions& opt) {
  require_positive(sample);
  if (opt.xmin) {
    auto fit = fit_power_law_at(sample, *opt.xmin);
    if (fit.tail_size < opt.min_tail) throw DataError("insufficient tail at fixed xmin");
    return fit;
  }
  const auto h = histogram(sample, 1);

  // Candidates: distinct values leaving enough tail and two distinct values.
  struct Candidate {
    std::size_t first;  // index into the histogram
    std::size_t tail;
    double sum_log;
  };
  std::vector<Candidate> candidates;
  {
    std::size_t tail = 0;
    double sum_log = 0.0;
    for (std::size_t i = h.values.size(); i-- > 0;) {
      tail += h.counts[i];
      sum_log += static_cast<double>(h.counts[i]) * std::log(static_cast<double>(h.values[i]));
      if (tail >= opt.min_tail && h.values.size() - i >= 2) candidates.push_back({i, tail, sum_log});
    }
    std::reverse(candidates.begin(), candidates.end());
  }
  if (candidates.empty()) {
    throw DataError("insufficient tail: need " + std::to_string(opt.min_tail) +
                    " observations over at least two distinct values");
  }

  std::vector<PowerLawFit> fits(candidates.size());
  parallel_chunks(candidates.size(), 16, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const auto& cand = candidates[c];
      Histogram tail_h;
      tail_h.values.assign(h.values.begin() + static_cast<std::ptrdiff_t>(cand.first), h.values.end());
      tail_h.counts.assign(h.counts.begin() + static_cast<std::ptrdiff_t>(cand.first), h.counts.end());
      auto& fit = fits[c];
      fit.xmin = h.values[cand.first];
      fit.tail_size = cand.tail;
      fit.alpha = alpha_mle(cand.sum_log, cand.tail, fit.xmin, &fit.low_confidence);
      fit.ks_distance = ks_from_histogram(tail_h, fit.alpha, fit.xmin);
      fit.loglik = -fit.alpha * cand.sum_log -
                   static_cast<double>(cand.tail) *
                       std::log(hurwitz_zeta(fit.alpha, static_cast<double>(fit.xmin)));
      if (tail_h.values.size() < 3) fit.low_confidence = true;
    }
  });
  // Strict < keeps the smallest xmin among equal distances.
  std::size_t best = 0;
  for (std::size_t c = 1; c < fits.size(); ++c)
    if (fits[c].ks_distance < fits[best].ks_distance) best = c;
  auto fit = fits[best];
  fit.tail_fraction = static_cast<double>(fit.tail_size) / static_cast<double>(sample.size());
  return fit;
}

LognormalFit fit_lognormal(std::span<const std::uint64_t> sample, std::uint64_t xmin) {
  require_positive(sample);
  if (xmin == 0) throw UsageError("xmin must be positive");
  const auto h = histogram(sample, xmin);
  if (h.values.empty()) throw DataError("empty tail: xmin above sample maximum");
  if (h.values.size() < 2) throw DataError("degenerate tail: a single distinct value");

  double n = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    const double l = std::log(static_cast<double>(h.values[i]));
    n += c;
    m1 += c * l;
    m2 += c * l * l;
  }
  m1 /= n;
  const double sd = std::sqrt(std::max(0.0, m2 / n - m1 * m1));

  auto nll = [&](const Point& p) {
    const double mu = p[0];
    const double sigma = std::exp(p[1]);
    if (mu < kMuLo || mu > kMuHi || sigma < kSigmaLo || sigma > kSigmaHi) {
      return std::numeric_limits<double>::infinity();
    }
    const double log_norm = lognormal_log_norm(mu, sigma, xmin);
    double s = 0.0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
      s += static_cast<double>(h.counts[i]) * lognormal_point(h.values[i], mu, sigma, log_norm);
    }
    return -s;
  };
  Point start{m1, std::log(std::clamp(sd, 0.05, 10.0))};
  Point best = nelder_mead(nll, start, {0.5, 0.3});
  best = nelder_mead(nll, best, {0.05, 0.05});

  LognormalFit fit;
  fit.mu = best[0];
  fit.sigma = std::exp(best[1]);
  fit.xmin = xmin;
  fit.tail_size = static_cast<std::size_t>(n);
  fit.loglik = -nll(best);
  const bool on_bound = fit.mu - kMuLo < 1e-3 || kMuHi - fit.mu < 1e-3 ||
                        fit.sigma / kSigmaLo < 1.001 || kSigmaHi / fit.sigma < 1.001;
  fit.low_confidence = on_bound || h.values.size() < 3;
  return fit;
}

std::vector<double> power_law_loglik(std::span<const std::uint64_t> sample, double alpha,
                                     std::uint64_t xmin) {
  const double log_z = std::log(hurwitz_zeta(alpha, static_cast<double>(xmin)));
  std::vector<double> out;
  for (auto x : sample) {
    if (x >= xmin) out.push_back(-alpha * std::log(static_cast<double>(x)) - log_z);
  }
  return out;
}

std::vector<double> lognormal_loglik(std::span<const std::uint64_t> sample, double mu,
                                     double sigma, std::uint64_t xmin) {
  const double log_norm = lognormal_log_norm(mu, sigma, xmin);
  std::vector<double> out;
  for (auto x : sample) {
    if (x >= xmin) out.push_back(lognormal_point(x, mu, sigma, log_norm));
  }
  return out;
}

Comparison compare_loglik(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("log-likelihood vectors differ in length");
  if (a.empty()) throw DataError("nothing to compare");
  const double n = static_cast<double>(a.size());
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] - b[i];
  const double mean = r / n;
  double var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) - mean;
    var += d * d;
  }
  var /= n;
  Comparison c;
  c.loglik_ratio = r;
  if (var > 0) {
    c.p_value = std::erfc(std::abs(r) / std::sqrt(2.0 * n * var));
  } else {
    c.p_value = r == 0.0 ? 1.0 : 0.0;
  }
  return c;
}

Comparison compare_fits(std::span<const std::uint64_t> sample, const PowerLawFit& pl,
                        const LognormalFit& ln) {
  if (pl.xmin != ln.xmin) {
    throw UsageError("fits use different tails (xmin " + std::to_string(pl.xmin) + " vs " +
                     std::to_string(ln.xmin) + ")");
  }
  return compare_loglik(power_law_loglik(sample, pl.alpha, pl.xmin),
                        lognormal_loglik(sample, ln.mu, ln.sigma, ln.xmin));
}

std::vector<std::uint64_t> sample_power_law(Rng& rng, double alpha, std::uint64_t xmin,
                                            std::size_t n) {
  if (!(alpha > 1.0) || xmin == 0) throw UsageError("power-law sampler needs alpha > 1, xmin >= 1");
  constexpr std::uint64_t kTable = 1u << 17;
  const double z = hurwitz_zeta(alpha, static_cast<double>(xmin));
  std::vector<double> cdf;
  cdf.reserve(kTable);
  double acc = 0.0;
  for (std::uint64_t k = 0; k < kTable; ++k) {
    acc += std::pow(static_cast<double>(xmin + k), -alpha);
    cdf.push_back(acc / z);
  }
  const double top = static_cast<double>(xmin + kTable) - 0.5;  // continuous beyond here
  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < cdf.back()) {
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      out.push_back(xmin + static_cast<std::uint64_t>(it - cdf.begin()));
    } else {
      const double x = top * std::pow(rng.open_uniform(), -1.0 / (alpha - 1.0)) + 0.5;
      out.push_back(static_cast<std::uint64_t>(std::min(std::floor(x), 1e18)));
    }
  }
  return out;
}

std::vector<std::uint64_t> sample_lognormal(Rng& rng, double mu, double sigma,
                                            std::uint64_t xmin, std::size_t n) {
  if (!(sigma > 0.0) || xmin == 0) throw UsageError("log-normal sampler needs sigma > 0, xmin >= 1");
  std::vector<std::uint64_t> out;
  out.reserve(n);
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > 1000 * (n + 1)) throw DataError("log-normal sampler: xmin leaves almost no mass");
    const double x = std::round(std::exp(mu + sigma * rng.normal()));
    if (x >= static_cast<double>(xmin) && x < 1e18) out.push_back(static_cast<std::uint64_t>(x));
  }
  return out;
}

namespace {

std::optional<double> bootstrap_p(std::span<const std::uint64_t> sample, const PowerLawFit& fit,
                                  const FitOptions& opt) {
  std::vector<std::uint64_t> body;
  for (auto x : sample)
    if (x < fit.xmin) body.push_back(x);
  Rng rng(opt.seed);
  std::size_t done = 0, worse = 0;
  FitOptions inner = opt;
  inner.bootstrap = 0;
  for (std::size_t b = 0; b < opt.bootstrap; ++b) {
    std::vector<std::uint64_t> synthetic;
    synthetic.reserve(sample.size());
    std::size_t from_tail = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (body.empty() || rng.uniform() < fit.tail_fraction) {
        ++from_tail;
      } else {
        synthetic.push_back(body[rng.below(body.size())]);
      }
    }
    const auto tail = sample_power_law(rng, fit.alpha, fit.xmin, from_tail);
    synthetic.insert(synthetic.end(), tail.begin(), tail.end());
    try {
      const auto refit = fit_power_law(synthetic, inner);
      ++done;
      if (refit.ks_distance >= fit.ks_distance) ++worse;
    } catch (const DataError&) {
      // replicate too small to fit; leave it out
    }
  }
  if (done == 0) return std::nullopt;
  return static_cast<double>(worse) / static_cast<double>(done);
}

}  // namespace

FitReport fit_report(std::span<const std::uint64_t> sample, const FitOptions& opt) {
  FitReport r;
  r.sample_size = sample.size();
  try {
    r.power_law = fit_power_law(sample, opt);
  } catch (const DataError& e) {
    r.status = e.what();
    return r;
  }
  try {
    r.lognormal = fit_lognormal(sample, r.power_law->xmin);
    r.comparison = compare_fits(sample, *r.power_law, *r.lognormal);
  } catch (const DataError& e) {
    r.status = std::string("lognormal: ") + e.what();
  }
  if (opt.bootstrap > 0) r.bootstrap_p = bootstrap_p(sample, *r.power_law, opt);
  return r;
}

nlohmann::json to_json(const FitReport& r) {
  using nlohmann::json;
  json j;
  j["status"] = r.status;
  j["sample_size"] = r.sample_size;
  const auto opt = [](bool present, auto value) { return present ? json(value) : json(nullptr); };
  const auto* pl = r.power_law ? &*r.power_law : nullptr;
  const auto* ln = r.lognormal ? &*r.lognormal : nullptr;
  j["alpha"] = opt(pl, pl ? pl->alpha : 0.0);
  j["xmin"] = opt(pl, pl ? pl->xmin : 0);
  j["ks_distance"] = opt(pl, pl ? pl->ks_distance : 0.0);
  j["tail_size"] = opt(pl, pl ? pl->tail_size : 0);
  j["tail_fraction"] = opt(pl, pl ? pl->tail_fraction : 0.0);
  j["power_law_loglik"] = opt(pl, pl ? pl->loglik : 0.0);
  j["power_law_low_confidence"] = opt(pl, pl ? pl->low_confidence : false);
  j["lognormal_mu"] = opt(ln, ln ? ln->mu : 0.0);
  j["lognormal_sigma"] = opt(ln, ln ? ln->sigma : 0.0);
  j["lognormal_loglik"] = opt(ln, ln ? ln->loglik : 0.0);
  j["lognormal_low_confidence"] = opt(ln, ln ? ln->low_confidence : false);
  j["loglik_ratio"] = opt(r.comparison.has_value(), r.comparison ? r.comparison->loglik_ratio : 0.0);
  j["p_value"] = opt(r.comparison.has_value(), r.comparison ? r.comparison->p_value : 0.0);
  j["bootstrap_p"] = opt(r.bootstrap_p.has_value(), r.bootstrap_p.value_or(0.0));
  return j;
}

DegreeKind parse_degree_kind(std::string_view s) {
  if (s == "in") return DegreeKind::in;
  if (s == "out") return DegreeKind::out;
  if (s == "total") return DegreeKind::total;
  throw UsageError("degree kind must be in, out or total, not '" + std::string(s) + "'");
}

std::vector<std::uint64_t> positive_degrees(const ServiceGraph& g, DegreeKind kind) {
  std::vector<std::uint64_t> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    std::uint64_t d = 0;
    if (!g.directed()) {
      d = g.out_degree(v);
    } else if (kind == DegreeKind::in) {
      d = g.in_degree(v);
    } else if (kind == DegreeKind::out) {
      d = g.out_degree(v);
    } else {
      d = g.in_degree(v) + g.out_degree(v);
    }
    if (d > 0) out.push_back(d);
  }
  return out;
}

}  // namespace hsgraph
