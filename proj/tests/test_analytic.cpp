#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "trisq/analytic.hpp"
#include "trisq/escalator.hpp"
#include "trisq/expression.hpp"

using namespace trisq;

namespace {

constexpr double kCatalan = 0.915965594177219015054603514932384110774;

// Divisor enumeration oracle for sum_{d | n} chi(d) / d.
double oracle_sigma(Integer n, const QuadraticCharacter& chi) {
  double s = 0;
  for (Integer d = 1; d <= n; ++d)
    if (n % d == 0) s += chi(d) / static_cast<double>(d);
  return s;
}

Integer oracle_divisor_count(Integer n) {
  Integer c = 0;
  for (Integer d = 1; d <= n; ++d) c += n % d == 0;
  return c;
}

// Jacobi's four-square theorem.
Integer jacobi_r4(Integer n) {
  Integer s = 0;
  for (Integer d = 1; d <= n; ++d)
    if (n % d == 0 && d % 4 != 0) s += d;
  return 8 * s;
}

// min of n^eps sigma_chi(n) / sigma_0(n) over 19-smooth n <= limit, each value computed
// from the full divisor list. Primes p >= 23 satisfy p^(1/4) (1 - 1/p) >= 2, so for eps = 1/4
// their presence never lowers the quotient and the infimum is attained on 19-smooth n.
double smooth_Ceps(const QuadraticCharacter& chi, double eps, Integer limit) {
  const std::vector<Integer> primes{2, 3, 5, 7, 11, 13, 17, 19};
  double best = INFINITY;
  std::vector<int> exps(primes.size(), 0);
  auto evaluate = [&](Integer n) {
    std::vector<Integer> divisors{1};
    for (std::size_t i = 0; i < primes.size(); ++i) {
      const std::size_t size = divisors.size();
      Integer pk = 1;
      for (int k = 1; k <= exps[i]; ++k) {
        pk *= primes[i];
        for (std::size_t j = 0; j < size; ++j) divisors.push_back(divisors[j] * pk);
      }
    }
    double s = 0;
    for (Integer d : divisors) s += chi(d) / static_cast<double>(d);
    best = std::min(best, std::pow(static_cast<double>(n), eps) * s / static_cast<double>(divisors.size()));
  };
  auto dfs = [&](auto&& self, std::size_t i, Integer n) -> void {
    if (i == primes.size()) {
      evaluate(n);
      return;
    }
    exps[i] = 0;
    for (Integer m = n;; m *= primes[i]) {
      self(self, i + 1, m);
      if (m > limit / primes[i]) break;
      ++exps[i];
    }
    exps[i] = 0;
  };
  dfs(dfs, 0, 1);
  return best;
}

// min over n <= bound (with the given exponent rules) of n^eps sigma_chi(n) / sigma_0(n), by sieving.
double brute_Ceps(const QuadraticCharacter& chi, double eps, Integer bound, const AdmissibleExponents& rules) {
  std::vector<double> sigma(static_cast<std::size_t>(bound) + 1, 0.0);
  std::vector<int> count(static_cast<std::size_t>(bound) + 1, 0);
  for (Integer d = 1; d <= bound; ++d) {
    const double w = chi(d) / static_cast<double>(d);
    for (Integer m = d; m <= bound; m += d) {
      sigma[m] += w;
      ++count[m];
    }
  }
  double best = INFINITY;
  for (Integer n = 1; n <= bound; ++n) {
    bool ok = true;
    for (const auto& [p, rule] : rules) {
      const int t = valuation(n, p);
      ok &= t >= rule.min && (!rule.max || t <= *rule.max);
    }
    if (ok) best = std::min(best, std::pow(static_cast<double>(n), eps) * sigma[n] / count[n]);
  }
  return best;
}

const CongruenceForm& node_form() {
  static const CongruenceForm f = complete_squares(parse_sum("P3+P3+5P4+19P3"));
  return f;
}

}  // namespace

TEST_CASE("L(2, chi)") {
  const ApproxReal zeta = dirichlet_L2(QuadraticCharacter(1), 1e-10);
  CHECK(std::abs(zeta.value - std::numbers::pi * std::numbers::pi / 6) <= zeta.error);
  CHECK(zeta.error <= 1e-10);
  const ApproxReal catalan = dirichlet_L2(QuadraticCharacter(-4), 1e-10);
  CHECK(std::abs(catalan.value - kCatalan) <= catalan.error);

  // Independent long-double summation with the non-principal tail below 2 * period / N.
  const QuadraticCharacter chi(3040);
  long double direct = 0;
  const Integer terms = 20'000'000;
  for (Integer n = terms; n >= 1; --n) direct += chi(n) / (static_cast<long double>(n) * n);
  const ApproxReal l = dirichlet_L2(chi, 1e-10);
  CHECK(std::abs(l.value - static_cast<double>(direct)) <= 1e-9);
  CHECK(l.value == doctest::Approx(1.1493946817).epsilon(1e-9));

  std::mt19937_64 rng(2);
  const double z = std::numbers::pi * std::numbers::pi / 6;
  for (int i = 0; i < 50; ++i) {
    Integer d = static_cast<Integer>(rng() % 10'000) + 1;
    if (d % 4 == 2 || d % 4 == 3) d *= 4;
    const QuadraticCharacter c(d);
    CHECK(std::abs(dirichlet_L2(c, 1e-8).value) <= z);
  }
  CHECK_THROWS_AS(dirichlet_L2(chi, 0), std::invalid_argument);
  CHECK_THROWS_AS(dirichlet_L2(chi, 1e-25), ResourceLimitError);
}

TEST_CASE("divisor functions") {
  const QuadraticCharacter trivial(1);
  CHECK(sigma_twisted(1, QuadraticCharacter(3040)) == 1.0);
  CHECK(sigma_twisted(6, trivial) == doctest::Approx(2.0));
  CHECK(sigma_zero(1) == 1);
  CHECK(sigma_zero(12) == 6);
  for (Integer p : primes_up_to(300)) CHECK(sigma_zero(p) == 2);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<Integer> pick(1, 3000);
  const QuadraticCharacter chi(3040);
  int pairs = 0;
  while (pairs < 100) {
    const Integer a = pick(rng), b = pick(rng);
    if (std::gcd(a, b) != 1) continue;
    ++pairs;
    CHECK(sigma_twisted(a * b, chi) == doctest::Approx(sigma_twisted(a, chi) * sigma_twisted(b, chi)));
    CHECK(sigma_zero(a * b) == sigma_zero(a) * sigma_zero(b));
    CHECK(sigma_twisted(a, chi) == doctest::Approx(oracle_sigma(a, chi)));
    CHECK(sigma_zero(a) == oracle_divisor_count(a));
  }
}

TEST_CASE("C_eps is the infimum") {
  const QuadraticCharacter chi(3040);
  const double unrestricted = constant_Ceps(chi, 0.25);
  const double brute = brute_Ceps(chi, 0.25, 1'000'000, {});
  CHECK(unrestricted <= brute);
  // The unrestricted infimum sits beyond 10^6, on a 19-smooth integer.
  const double smooth = smooth_Ceps(chi, 0.25, 1'000'000'000'000);
  CHECK(unrestricted <= smooth);
  CHECK(unrestricted >= smooth - 1e-12);
  CHECK(unrestricted == doctest::Approx(0.190516).epsilon(1e-5));

  const AdmissibleExponents rules = admissible_exponents(node_form());
  REQUIRE(rules.size() == 3);
  CHECK(rules.at(2).min == 0);
  CHECK(rules.at(2).max == 0);
  CHECK(rules.at(5).max == 1);
  CHECK(rules.at(19).max == 1);
  const double restricted = constant_Ceps(chi, 0.25, rules);
  const double brute_restricted = brute_Ceps(chi, 0.25, 1'000'000, rules);
  CHECK(restricted <= brute_restricted);
  CHECK(restricted >= brute_restricted - 1e-12);
  CHECK(restricted == doctest::Approx(0.482).epsilon(0.01));

  CHECK(constant_Ceps(QuadraticCharacter(1), 0.25) <= 1.0);
  for (double eps : {0.1, 0.2, 0.3, 0.4}) {
    const QuadraticCharacter c(12);
    CHECK(constant_Ceps(c, eps) <= brute_Ceps(c, eps, 200'000, {}));
  }
  CHECK_THROWS_AS(constant_Ceps(chi, 0.5), std::invalid_argument);
}

TEST_CASE("C_E formula and scaling") {
  const FormGeometry g = geometry(node_form());
  const QuadraticCharacter chi(g.discriminant);
  const ApproxReal l2 = dirichlet_L2(chi);
  std::map<Integer, Rational> floors;
  for (Integer p : prime_divisors(g.level)) floors[p] = density_floor(node_form(), p).value;
  const double ce = constant_CE(g, chi, l2, floors);
  CHECK(ce == doctest::Approx(0.236).epsilon(0.01 / 0.236));

  double by_hand = std::numbers::pi * std::numbers::pi / (l2.value * std::sqrt(3040.0));
  for (const auto& [p, b] : floors) by_hand *= to_double(b) / (1 - chi(p) / static_cast<double>(p * p));
  CHECK(ce == doctest::Approx(by_hand).epsilon(1e-14));

  for (const auto& [p, b] : floors) {
    auto one = floors;
    one[p] = 2 * b;
    CHECK(constant_CE(g, chi, l2, one) == doctest::Approx(2 * ce).epsilon(1e-14));
  }
  auto all = floors;
  for (auto& [p, b] : all) b *= 2;
  CHECK(constant_CE(g, chi, l2, all) == doctest::Approx(std::pow(2.0, floors.size()) * ce).epsilon(1e-14));
  auto missing = floors;
  missing.erase(19);
  CHECK_THROWS_AS(constant_CE(g, chi, l2, missing), std::invalid_argument);
}

TEST_CASE("crossover bound") {
  const Integer n0 = crossover_bound(0.236, 12.645, 0.482, 0.25);
  CHECK(std::abs(static_cast<double>(n0) - 152402970.0) <= 0.01 * 152402970.0);
  auto holds = [](Integer n) { return 0.236 * 0.482 * std::pow(n, 0.75) > 12.645 * std::sqrt(static_cast<double>(n)); };
  CHECK(holds(n0));
  CHECK_FALSE(holds(n0 - 1));
  CHECK(crossover_bound(0.236, 0, 0.482, 0.25) == 1);
  CHECK(crossover_bound(0.236, 13, 0.482, 0.25) > n0);
  CHECK(crossover_bound(0.25, 12.645, 0.482, 0.25) < n0);
  CHECK(crossover_bound(0.236, 12.645, 0.5, 0.25) < n0);
  CHECK_THROWS_AS(crossover_bound(0, 1, 1, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(crossover_bound(1e-9, 1e9, 1e-9, 0.49), std::overflow_error);
}

TEST_CASE("profile of the analytic node") {
  const AnalyticProfile p = analytic_profile(node_form(), 0.25, 12.645);
  CHECK(p.geometry.discriminant == 3040);
  CHECK(p.geometry.level == 760);
  CHECK(p.c_e == doctest::Approx(0.236).epsilon(0.01 / 0.236));
  CHECK(p.c_eps == doctest::Approx(0.482).epsilon(0.01 / 0.482));
  REQUIRE(p.crossover);
  CHECK(std::abs(static_cast<double>(*p.crossover) - 152402970.0) <= 0.01 * 152402970.0);
  CHECK_FALSE(analytic_profile(node_form(), 0.25).crossover);
}

TEST_CASE("Siegel-Minkowski is exact for four squares") {
  EisensteinSeries series(diagonal_form({1, 1, 1, 1}));
  for (Integer n = 1; n <= 2000; ++n) {
    const ApproxReal a = series.coefficient(n);
    REQUIRE(std::abs(a.value - static_cast<double>(jacobi_r4(n))) <= 1e-6 * static_cast<double>(jacobi_r4(n)));
    REQUIRE(std::abs(series.residual(n)) <= 1e-4 * std::max<double>(1, jacobi_r4(n)));
  }
  CHECK(std::abs(cusp_residual(diagonal_form({1, 1, 1, 1}), 1000)) <= 1e-4 * jacobi_r4(1000));
}

TEST_CASE("Eisenstein coefficients of the analytic node") {
  const CongruenceForm& f = node_form();
  EisensteinSeries series(f);
  const AnalyticProfile p = analytic_profile(f, 0.25);
  const QuadraticCharacter chi(p.character);
  // Targets outside the progression have no representations and vanish.
  for (Integer t = 1; t < 400; ++t) {
    if (t % 8 == 5) continue;
    CHECK(series.coefficient(t).value == 0.0);
    CHECK(series.residual(t) == 0.0);
  }
  // a_E(t) / t is bounded above and below on admissible targets.
  double lo = INFINITY, hi = 0;
  for (Integer n = 0; n < 3000; ++n) {
    const Integer t = f.target(n);
    if (valuation(t, 5) > 1 || valuation(t, 19) > 1) continue;
    const ApproxReal a = series.coefficient(t);
    CHECK(a.value + a.error >= p.c_e * sigma_twisted(t, chi) * static_cast<double>(t) * (1 - 1e-9));
    lo = std::min(lo, a.value / static_cast<double>(t));
    hi = std::max(hi, a.value / static_cast<double>(t));
  }
  CHECK(lo > 0);
  CHECK(hi < 10 * lo);
  CHECK_THROWS_AS(series.coefficient(0), std::invalid_argument);
  CHECK_THROWS_AS(EisensteinSeries(diagonal_form({1, 1, 1})), std::invalid_argument);
}

TEST_CASE("the Eisenstein lower bound holds on other analytic nodes") {
  std::mt19937_64 rng(13);
  int nodes = 0;
  for (const char* parent : {"P3+P4+6P4", "P3+P4+7P3", "P4+2P4+3P3", "P3+2P4+4P4"}) {
    const auto kids = children(parse_sum(parent), *truant(parse_sum(parent), 100));
    for (int i = 0; i < 3; ++i) {
      const CongruenceForm f = complete_squares(kids[rng() % kids.size()]);
      const AnalyticProfile p = analytic_profile(f, 0.25, std::nullopt, 1e-8);
      REQUIRE(p.c_e > 0);
      EisensteinSeries series(f, 1e-8);
      const QuadraticCharacter chi(p.character);
      for (int s = 0; s < 50; ++s) {
        const Integer t = f.target(static_cast<Integer>(rng() % 20'000));
        bool admissible = true;
        for (Integer q : prime_divisors(p.geometry.level)) admissible &= q == 2 || valuation(t, q) <= 1;
        if (!admissible) continue;
        const ApproxReal a = series.coefficient(t);
        CHECK(a.value + a.error >= p.c_e * sigma_twisted(t, chi) * static_cast<double>(t) * (1 - 1e-9));
      }
      ++nodes;
    }
  }
  CHECK(nodes == 12);
}

TEST_CASE("normalized cusp residuals of the analytic node stay Deligne-sized") {
  // n is the polygonal index: residual at the target 8n + 21, normalized at the target.
  const CongruenceForm& f = node_form();
  const std::vector<Integer> r = theta_coefficients(f, f.target(10'000));
  EisensteinSeries series(f);
  auto normalized = [&](Integer n) {
    const Integer t = f.target(n);
    return std::abs(series.residual(t, r[t])) / (static_cast<double>(sigma_zero(t)) * std::sqrt(static_cast<double>(t)));
  };
  double early = 0, late = 0;
  for (Integer n = 100; n < 1000; ++n) early = std::max(early, normalized(n));
  for (Integer n = 1000; n <= 10'000; ++n) late = std::max(late, normalized(n));
  CHECK(late <= 1.1 * early);
  CHECK(late < 12.645);
}
