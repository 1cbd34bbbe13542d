#include <random>

#include "doctest.h"
#include "trisq/expression.hpp"
#include "trisq/local.hpp"

using namespace trisq;

namespace {

Integer ipow(Integer p, int k) {
  Integer r = 1;
  while (k-- > 0) r *= p;
  return r;
}

// Brute-force N_k: tuples modulo p^k in the admissible classes with Q = n (mod p^k).
// At odd p the modulus-2 conditions are vacuous because 2 is a unit.
Integer oracle_count(const CongruenceForm& f, Integer n, Integer p, int k) {
  const Integer m = ipow(p, k);
  std::vector<std::vector<Integer>> values(f.rank());
  for (std::size_t i = 0; i < f.rank(); ++i) {
    const auto& t = f.terms[i];
    for (Integer z = 0; z < m; ++z) {
      if (p == 2 && t.modulus > 1 && ((z - t.residue) % t.modulus + t.modulus) % t.modulus != 0) continue;
      values[i].push_back(t.coefficient * z * z % m);
    }
  }
  std::vector<Integer> hist(static_cast<std::size_t>(m), 0);
  hist[0] = 1;
  for (const auto& vs : values) {
    std::vector<Integer> next(static_cast<std::size_t>(m), 0);
    for (Integer a = 0; a < m; ++a)
      if (hist[a] != 0)
        for (Integer v : vs) next[(a + v) % m] += hist[a];
    hist = std::move(next);
  }
  return hist[static_cast<std::size_t>(((n % m) + m) % m)];
}

Rational oracle_density(const CongruenceForm& f, Integer n, Integer p, int k) {
  return Rational(oracle_count(f, n, p, k)) / Rational(BigInt(ipow(p, k * static_cast<int>(f.rank() - 1))));
}

CongruenceForm random_form(std::mt19937_64& rng, bool with_conditions) {
  std::uniform_int_distribution<Integer> coef(1, 30);
  CongruenceForm f = diagonal_form({coef(rng), coef(rng), coef(rng), coef(rng)});
  if (with_conditions) {
    f.mu = 8;
    for (auto& t : f.terms) {
      t.modulus = 2;
      t.residue = static_cast<Integer>(rng() % 2);
    }
  }
  return f;
}

}  // namespace

TEST_CASE("solution counts modulo prime powers") {
  const CongruenceForm four = diagonal_form({1, 1, 1, 1});
  CHECK(count_solutions_mod(four, 1, 3, 1) == 24);
  CHECK(oracle_count(four, 1, 3, 1) == 24);
  const CongruenceForm tri = complete_squares(parse_sum("P3+P3+3P3"));
  CHECK(count_solutions_mod(tri, 5, 2, 3) > 0);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 60; ++i) {
    const CongruenceForm f = random_form(rng, i % 2 == 0);
    for (auto [p, k] : {std::pair<Integer, int>{2, 4}, {3, 2}, {5, 2}, {7, 1}, {2, 5}}) {
      const Integer n = static_cast<Integer>(rng() % 1000);
      REQUIRE(count_solutions_mod(f, n, p, k) == oracle_count(f, n, p, k));
    }
  }
  CHECK_THROWS_AS(count_solutions_mod(four, 1, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(count_solutions_mod(four, 1, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(count_solutions_mod(four, 1, 2, 40), ResourceLimitError);
}

TEST_CASE("closed form at unramified primes") {
  const CongruenceForm four = diagonal_form({1, 1, 1, 1});
  const LocalDensity d = local_density(four, 1, 3);
  CHECK(d.value == Rational(8, 9));
  CHECK(d.method == DensityMethod::closed_form);
  CHECK(oracle_density(four, 1, 3, 2) == Rational(8, 9));
  LocalDensityEngine engine(complete_squares(parse_sum("P3+P3+5P4+19P3")));
  const QuadraticCharacter& chi = engine.character();
  for (Integer p : {3, 7, 11, 13, 17, 23}) {
    const Integer n = 8 * 1 + 21;  // 29, prime to all of these
    CHECK(engine.density_closed_form(n, p) == 1 - Rational(chi(p), p * p));
  }
}

TEST_CASE("closed form equals counting on random instances") {
  std::mt19937_64 rng(21);
  const std::vector<Integer> primes{3, 5, 7, 11, 13};
  int done = 0;
  while (done < 50) {
    const CongruenceForm f = random_form(rng, false);
    const Integer p = primes[rng() % primes.size()];
    const Integer n = 1 + static_cast<Integer>(rng() % 3000);
    LocalDensityEngine engine(f);
    if (engine.geometry().level % p == 0) continue;
    try {
      CHECK(engine.density_by_counting(n, p).value == engine.density_closed_form(n, p));
      ++done;
    } catch (const ResourceLimitError&) {
    }
  }
}

TEST_CASE("reduction equals counting at odd primes") {
  std::mt19937_64 rng(4);
  const std::vector<Integer> primes{3, 5, 7};
  int done = 0;
  while (done < 300) {
    const CongruenceForm f = random_form(rng, rng() % 2 == 0);
    const Integer p = primes[rng() % primes.size()];
    const Integer n = 1 + static_cast<Integer>(rng() % 5000);
    LocalDensityEngine engine(f);
    try {
      const LocalDensity counted = engine.density_by_counting(n, p);
      REQUIRE(engine.density_by_reduction(n, p) == counted.value);
      ++done;
    } catch (const ResourceLimitError&) {
    }
  }
  LocalDensityEngine engine(diagonal_form({1, 1, 1, 1}));
  CHECK_THROWS_AS(engine.density_by_reduction(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(engine.density_by_reduction(0, 3), std::invalid_argument);
}

TEST_CASE("counting agrees with the brute-force limit") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 40; ++i) {
    const CongruenceForm f = random_form(rng, true);
    const Integer n = f.mu * static_cast<Integer>(rng() % 50) + static_cast<Integer>(rng() % 8);
    if (n == 0) continue;
    LocalDensityEngine engine(f);
    const int k = engine.stabilization_exponent(n, 2);
    if (ipow(2, k + 1) > 64) continue;
    const LocalDensity d = engine.density_by_counting(n, 2);
    CHECK(d.value == oracle_density(f, n, 2, k));
    CHECK(d.value == oracle_density(f, n, 2, k + 1));
  }
}

TEST_CASE("stabilized once k >= ord_p(4Dn) + 3") {
  std::mt19937_64 rng(30);
  int done = 0;
  while (done < 30) {
    const CongruenceForm f = random_form(rng, rng() % 2 == 0);
    const Integer p = rng() % 2 == 0 ? 2 : 3;
    const Integer n = 1 + static_cast<Integer>(rng() % 200);
    LocalDensityEngine engine(f);
    const int k = valuation(4 * engine.geometry().discriminant * n, p) + 3;
    if (ipow(p, k + 1) > kMaxCountingModulus) continue;
    const Rational scale_k = Rational(BigInt(ipow(p, 3 * k)));
    const Rational scale_k1 = Rational(BigInt(ipow(p, 3 * (k + 1))));
    const Rational a = Rational(engine.count_solutions(n, p, k)) / scale_k;
    const Rational b = Rational(engine.count_solutions(n, p, k + 1)) / scale_k1;
    CHECK(a == b);
    CHECK(a == engine.density(n, p).value);
    ++done;
  }
}

TEST_CASE("odd-prime densities ignore the mod-2 conditions") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 40; ++i) {
    const CongruenceForm with = random_form(rng, true);
    CongruenceForm without = with;
    for (auto& t : without.terms) t = {t.coefficient, 1, 0};
    without.mu = 1;
    const Integer p = rng() % 2 == 0 ? 3 : 5;
    const Integer n = 1 + static_cast<Integer>(rng() % 500);
    CHECK(local_density(with, n, p).value == local_density(without, n, p).value);
  }
}

TEST_CASE("local representability") {
  const CongruenceForm four = diagonal_form({1, 1, 1, 1});
  for (Integer n = 1; n <= 200; ++n) CHECK(locally_represented(four, n));
  const CongruenceForm tri = complete_squares(parse_sum("P3+P3+3P3"));
  const std::vector<Integer> three{3};
  LocalDensityEngine engine(tri);
  CHECK(engine.density(8 * 8 + 5, 2).value > 0);
  // The 3-adic verdict is the counting oracle's.
  const int k = engine.stabilization_exponent(69, 3);
  CHECK(locally_represented(tri, 69, three) == (oracle_count(tri, 69, 3, k) > 0));
  // Targets outside 5 mod 8 are not represented 2-adically.
  for (Integer n : {1, 2, 3, 4, 6, 7, 9}) CHECK_FALSE(locally_represented(tri, n, three));
  CHECK_FALSE(locally_represented(tri, -1));
}

TEST_CASE("density floors") {
  const CongruenceForm f = complete_squares(parse_sum("P3+P3+5P4+19P3"));
  LocalDensityEngine engine(f);
  for (Integer p : engine.bad_primes()) {
    const DensityFloor b = engine.density_floor(p);
    CHECK(b.value > 0);
    CHECK(b.zero_classes == 0);
    // The floor is attained by a class in the progression.
    CHECK(b.attained_at % std::gcd(f.mu, b.class_modulus) == f.rho % std::gcd(f.mu, b.class_modulus));
    const Rational at = engine.density(b.attained_at, p).value;
    CHECK(at == b.beta_min);
    CHECK(b.value == (p == 2 ? 4 * b.beta_min : b.beta_min));
  }
  // Floors are lower bounds on sampled admissible targets.
  for (Integer n = 0; n < 2000; ++n) {
    const Integer t = f.target(n);
    for (Integer p : engine.bad_primes()) {
      if (p != 2 && valuation(t, p) > 1) continue;
      CHECK(engine.density(t, p).value >= engine.density_floor(p).beta_min);
    }
  }
  CHECK_THROWS_AS(engine.density_floor(3), std::invalid_argument);
  // b_2 exists for every form with a triangular term.
  for (const char* s : {"P3+P4+6P4+7P3", "P4+2P4+3P3+5P4", "P3+P3+P3+P3"})
    CHECK(density_floor(complete_squares(parse_sum(s)), 2).value > 0);
}
