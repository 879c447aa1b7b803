#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "hsgraph/error.hpp"
#include "hsgraph/fitting.hpp"

using namespace hsgraph;

namespace {

// zeta(s, q) for integer q from the Riemann zeta minus the head.
double zeta_oracle(double s, std::uint64_t q) {
  double head = 0;
  for (std::uint64_t k = 1; k < q; ++k) head += std::pow(static_cast<double>(k), -s);
  return boost::math::zeta(s) - head;
}

// Max CDF gap checked at every integer from xmin to the sample maximum.
double ks_oracle(const std::vector<std::uint64_t>& sample, double alpha, std::uint64_t xmin) {
  std::vector<std::uint64_t> tail;
  for (auto x : sample)
    if (x >= xmin) tail.push_back(x);
  std::sort(tail.begin(), tail.end());
  const double z = zeta_oracle(alpha, xmin);
  double model = 0, gap = 0;
  std::size_t idx = 0;
  for (std::uint64_t x = xmin; x <= tail.back(); ++x) {
    model += std::pow(static_cast<double>(x), -alpha) / z;
    while (idx < tail.size() && tail[idx] <= x) ++idx;
    gap = std::max(gap, std::abs(static_cast<double>(idx) / static_cast<double>(tail.size()) - model));
  }
  return gap;
}

}  // namespace

TEST_CASE("hurwitz zeta agrees with the Riemann zeta tail") {
  for (double s : {1.05, 1.5, 2.0, 2.5, 3.7, 8.0, 30.0}) {
    for (std::uint64_t q : {1u, 2u, 5u, 40u}) {
      CHECK(hurwitz_zeta(s, static_cast<double>(q)) == doctest::Approx(zeta_oracle(s, q)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(hurwitz_zeta(1.0, 1.0), UsageError);
}

TEST_CASE("sampler CDF matches the model") {
  Rng rng(1);
  const auto x = sample_power_law(rng, 2.5, 1, 200000);
  const double ones = static_cast<double>(std::count(x.begin(), x.end(), 1u)) / 200000.0;
  CHECK(ones == doctest::Approx(1.0 / zeta_oracle(2.5, 1)).epsilon(0.01));
  Rng rng2(2);
  const auto y = sample_power_law(rng2, 2.0, 3, 1000);
  CHECK(*std::min_element(y.begin(), y.end()) == 3);
}

TEST_CASE("power-law recovery") {
  int hits = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(500 + seed);
    const auto x = sample_power_law(rng, 2.5, 1, 10000);
    const auto fit = fit_power_law(x);
    hits += fit.alpha >= 2.4 && fit.alpha <= 2.6;
    CHECK(fit.ks_distance >= 0.0);
    CHECK(fit.ks_distance <= 1.0);
    CHECK(fit.tail_fraction > 0.0);
    CHECK(fit.tail_fraction <= 1.0);
  }
  CHECK(hits >= 9);
}

TEST_CASE("reported KS equals the brute-force gap") {
  for (int seed = 0; seed < 5; ++seed) {
    Rng rng(900 + seed);
    const auto x = sample_power_law(rng, 2.2 + 0.2 * seed, 1, 3000);
    const auto fit = fit_power_law(x);
    CHECK(std::abs(fit.ks_distance - ks_oracle(x, fit.alpha, fit.xmin)) < 1e-12);
    CHECK(std::abs(power_law_ks(x, 2.5, 2) - ks_oracle(x, 2.5, 2)) < 1e-12);
  }
}

TEST_CASE("planted cutoff is found and matches a brute-force scan") {
  Rng rng(77);
  std::vector<std::uint64_t> x;
  for (int i = 0; i < 3000; ++i) x.push_back(1 + rng.below(9));
  const auto tail = sample_power_law(rng, 2.5, 10, 3000);
  x.insert(x.end(), tail.begin(), tail.end());
  const auto fit = fit_power_law(x);
  CHECK(fit.xmin >= 8);
  CHECK(fit.xmin <= 12);

  // brute force: every candidate through the fixed-cutoff path
  std::vector<std::uint64_t> distinct(x);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  double best = 2.0;
  std::uint64_t best_xmin = 0;
  for (auto c : distinct) {
    const auto n_tail = std::count_if(x.begin(), x.end(), [c](auto v) { return v >= c; });
    if (n_tail < 50) break;
    try {
      const auto f = fit_power_law_at(x, c);
      if (f.ks_distance < best) best = f.ks_distance, best_xmin = c;
    } catch (const DataError&) {
    }
  }
  CHECK(fit.xmin == best_xmin);
}

TEST_CASE("degenerate samples") {
  const std::vector<std::uint64_t> constant(500, 4);
  CHECK_THROWS_WITH_AS(fit_power_law(constant), doctest::Contains("insufficient tail"), DataError);
  const std::vector<std::uint64_t> tiny = {1, 2, 3};
  CHECK_THROWS_AS(fit_power_law(tiny), DataError);
  const std::vector<std::uint64_t> zero = {0, 1, 2};
  CHECK_THROWS_AS(fit_power_law(zero), DataError);
  const auto report = fit_report(constant);
  CHECK(report.status.find("insufficient tail") != std::string::npos);
  CHECK_FALSE(report.power_law.has_value());
}

TEST_CASE("log-normal recovery") {
  Rng rng(31);
  const auto x = sample_lognormal(rng, 1.0, 0.5, 1, 10000);
  const auto fit = fit_lognormal(x, 1);
  CHECK(std::abs(fit.mu - 1.0) < 0.1);
  CHECK(std::abs(fit.sigma - 0.5) < 0.1);
  CHECK(fit.sigma > 0);
  CHECK_THROWS_AS(fit_lognormal(x, 100000), DataError);
}

TEST_CASE("two-point tail gives finite, low-confidence parameters") {
  std::vector<std::uint64_t> x(30, 1);
  x.insert(x.end(), 10, 2);
  const auto fit = fit_lognormal(x, 1);
  CHECK(std::isfinite(fit.mu));
  CHECK(std::isfinite(fit.sigma));
  CHECK(fit.low_confidence);
}

TEST_CASE("comparison") {
  SUBCASE("identical likelihoods") {
    const std::vector<double> a = {-1.0, -2.0, -3.0};
    const auto c = compare_loglik(a, a);
    CHECK(c.loglik_ratio == 0.0);
    CHECK(c.p_value == 1.0);
  }
  SUBCASE("antisymmetric") {
    Rng rng(3);
    std::vector<double> a, b;
    for (int i = 0; i < 100; ++i) a.push_back(-rng.uniform() * 5), b.push_back(-rng.uniform() * 5);
    const auto ab = compare_loglik(a, b), ba = compare_loglik(b, a);
    CHECK(ab.loglik_ratio == -ba.loglik_ratio);
    CHECK(ab.p_value == ba.p_value);
  }
  SUBCASE("log-normal data favours the log-normal") {
    Rng rng(8);
    const auto x = sample_lognormal(rng, 1.0, 1.0, 1, 10000);
    FitOptions at_one;
    at_one.xmin = 1;
    const auto pl = fit_power_law(x, at_one);
    const auto ln = fit_lognormal(x, 1);
    const auto c = compare_fits(x, pl, ln);
    CHECK(c.loglik_ratio < 0);
    CHECK(c.p_value < 0.1);
  }
  SUBCASE("power-law data mostly favours the power law") {
    int positive = 0;
    for (int seed = 0; seed < 9; ++seed) {
      Rng rng(3000 + seed);
      const auto x = sample_power_law(rng, 2.5, 1, 10000);
      FitOptions at_one;
      at_one.xmin = 1;
      const auto c = compare_fits(x, fit_power_law(x, at_one), fit_lognormal(x, 1));
      positive += c.loglik_ratio > 0;
    }
    CHECK(positive >= 5);
  }
  SUBCASE("different cutoffs") {
    Rng rng(9);
    const auto x = sample_power_law(rng, 2.5, 1, 2000);
    FitOptions o;
    o.xmin = 1;
    CHECK_THROWS_AS(compare_fits(x, fit_power_law(x, o), fit_lognormal(x, 2)), UsageError);
  }
}

TEST_CASE("report json and bootstrap flag") {
  Rng rng(12);
  const auto x = sample_power_law(rng, 2.5, 1, 2000);
  FitOptions opt;
  opt.bootstrap = 5;
  opt.seed = 1;
  const auto r = fit_report(x, opt);
  CHECK(r.status == "ok");
  REQUIRE(r.bootstrap_p.has_value());
  CHECK(*r.bootstrap_p >= 0.0);
  CHECK(*r.bootstrap_p <= 1.0);
  const auto j = to_json(r);
  CHECK(j.at("alpha").get<double>() > 1.0);
  CHECK(j.at("xmin").get<std::uint64_t>() >= 1);
  CHECK(j.contains("loglik_ratio"));
  CHECK(to_json(fit_report(x)).at("bootstrap_p").is_null());
}

TEST_CASE("degree selection drops zeros") {
  GraphBuilder b(Directedness::directed);
  b.add_edge("a", "b");
  b.add_edge("a", "c");
  b.add_vertex("z");
  const auto g = b.build();
  CHECK(positive_degrees(g, DegreeKind::out) == std::vector<std::uint64_t>{2});
  CHECK(positive_degrees(g, DegreeKind::in) == std::vector<std::uint64_t>{1, 1});
  CHECK(positive_degrees(g, DegreeKind::total) == std::vector<std::uint64_t>{2, 1, 1});
  CHECK_THROWS_AS(parse_degree_kind("sideways"), UsageError);
}
