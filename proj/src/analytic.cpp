#include "trisq/analytic.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trisq {

namespace {

constexpr Integer kMaxL2Terms = Integer{1} << 32;
constexpr Integer kMaxCepsPrime = 50'000'000;

void require_rank4(const CongruenceForm& form) {
  if (form.rank() != 4) throw std::invalid_argument("Eisenstein data is implemented for quaternary forms");
}

/// sum_{j <= t} (c/p)^j.
double local_sigma(int c, Integer p, int t) {
  double sum = 0.0, term = 1.0;
  for (int j = 0; j <= t; ++j) {
    sum += term;
    term *= static_cast<double>(c) / static_cast<double>(p);
  }
  return sum;
}

/// min over allowed t of p^{eps t} sigma_chi(p^t) / (t + 1).
double prime_factor_minimum(Integer p, int c, double eps, const ExponentRule& rule) {
  const double pe = std::pow(static_cast<double>(p), eps);
  const double floor_sigma = 1.0 - 1.0 / static_cast<double>(p);
  double best = INFINITY;
  for (int t = rule.min;; ++t) {
    if (rule.max && t > *rule.max) break;
    best = std::min(best, std::pow(pe, t) * local_sigma(c, p, t) / (t + 1));
    if (!rule.max) {
      // Past this point p^{eps s}(1 - 1/p)/(s + 1) is increasing and at least best.
      const double lower = std::pow(pe, t + 1) * floor_sigma / (t + 2);
      if (lower >= best && pe * (t + 2) >= (t + 3)) break;
    }
    if (t > 4096) throw std::runtime_error("per-prime minimization did not terminate");
  }
  return best;
}

}  // namespace

ApproxReal dirichlet_L2(const QuadraticCharacter& chi, double tolerance) {
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  const Integer period = chi.period();
  std::vector<int> values(static_cast<std::size_t>(period));
  long double mean = 0;
  for (Integer a = 1; a <= period; ++a) {
    values[static_cast<std::size_t>(a % period)] = chi(a);
    mean += chi(a);
  }
  mean /= static_cast<long double>(period);
  // B bounds the partial sums of chi - mean, which are periodic.
  long double partial = 0, spread = 0;
  for (Integer a = 1; a <= period; ++a) {
    partial += values[static_cast<std::size_t>(a % period)] - mean;
    spread = std::max(spread, std::fabs(partial));
  }
  // Truncation error after N terms is at most (|mean|/2 + 2B) / N^2.
  const long double weight = std::fabs(mean) / 2 + 2 * spread;
  const auto terms = static_cast<Integer>(std::ceil(std::sqrt(weight / (tolerance / 2)))) + 1;
  if (terms > kMaxL2Terms) throw ResourceLimitError("tolerance too small for direct summation of L(2, chi)");
  const long double rounding = 4 * static_cast<long double>(terms) * LDBL_EPSILON;
  if (rounding > tolerance / 2) throw ResourceLimitError("tolerance is below the summation rounding floor");

  long double sum = 0;
  for (Integer n = terms; n >= 1; --n) {
    const int c = values[static_cast<std::size_t>(n % period)];
    if (c == 0) continue;
    const auto nl = static_cast<long double>(n);
    sum += c / (nl * nl);
  }
  const auto nl = static_cast<long double>(terms);
  sum += mean * (1 / nl + 1 / (nl + 1)) / 2;
  const long double truncation = weight / (nl * nl);
  return {static_cast<double>(sum), static_cast<double>(truncation + rounding)};
}

double sigma_twisted(Integer n, const QuadraticCharacter& chi) {
  if (n < 1) throw std::invalid_argument("sigma_twisted needs n >= 1");
  double product = 1.0;
  for (const auto& [p, e] : factorize(n)) product *= local_sigma(chi(p), p, e);
  return product;
}

Integer sigma_zero(Integer n) {
  if (n < 1) throw std::invalid_argument("sigma_zero needs n >= 1");
  Integer count = 1;
  for (const auto& [p, e] : factorize(n)) count *= e + 1;
  return count;
}

AdmissibleExponents admissible_exponents(const CongruenceForm& form) {
  AdmissibleExponents rules;
  for (Integer p : prime_divisors(geometry(form).level)) {
    ExponentRule rule;
    const int e = valuation(form.mu, p);
    if (e > 0) {
      if (form.rho % checked_pow(p, e) != 0) {
        rule.min = valuation(form.rho, p);
        rule.max = rule.min;
      } else {
        rule.min = e;
      }
    }
    if (p != 2) rule.max = rule.max ? std::min(*rule.max, 1) : 1;
    if (rule.max && *rule.max < rule.min)
      throw std::domain_error("no exponent of " + std::to_string(p) + " is admissible");
    rules[p] = rule;
  }
  return rules;
}

double constant_Ceps(const QuadraticCharacter& chi, double epsilon, const AdmissibleExponents& rules) {
  if (!(epsilon > 0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2)");
  const Integer last_ruled = rules.empty() ? 0 : rules.rbegin()->first;
  double product = 1.0;
  // Unconstrained primes with p^eps (1 - 1/p) >= 2 have every factor >= 1 (t >= 1) and 1 at t = 0.
  auto beyond_cutoff = [&](Integer p) {
    return std::pow(static_cast<double>(p), epsilon) * (1.0 - 1.0 / static_cast<double>(p)) >= 2.0;
  };
  for (Integer p = 2;; ++p) {
    if (!is_prime(p)) continue;
    const bool ruled = rules.contains(p);
    if (!ruled && p > last_ruled && beyond_cutoff(p)) break;
    if (p > kMaxCepsPrime) throw ResourceLimitError("epsilon too small for the prime-by-prime infimum");
    if (!ruled && beyond_cutoff(p)) continue;
    product *= prime_factor_minimum(p, chi(p), epsilon, ruled ? rules.at(p) : ExponentRule{});
  }
  return product;
}

double constant_CE(const FormGeometry& geometry, const QuadraticCharacter& chi, const ApproxReal& l2,
                   const std::map<Integer, Rational>& floors) {
  if (!(l2.value > 0)) throw std::invalid_argument("L(2, chi) must be positive");
  double product = 1.0;
  for (Integer p : prime_divisors(geometry.level)) {
    const auto it = floors.find(p);
    if (it == floors.end()) throw std::invalid_argument("missing density floor at " + std::to_string(p));
    const double pp = static_cast<double>(p);
    product *= to_double(it->second) / (1.0 - chi(p) / (pp * pp));
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return pi2 / (l2.value * std::sqrt(static_cast<double>(geometry.discriminant))) * product;
}

Integer crossover_bound(double c_e, double c_g, double c_eps, double epsilon) {
  if (!(c_e > 0 && c_eps > 0)) throw std::invalid_argument("C_E and C_eps must be positive");
  if (!(c_g >= 0)) throw std::invalid_argument("C_G must be nonnegative");
  if (!(epsilon > 0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2)");
  if (c_g == 0) return 1;
  const long double exponent = 0.5L - epsilon;
  const long double x = std::pow(static_cast<long double>(c_g) / (static_cast<long double>(c_e) * c_eps), 1 / exponent);
  if (!(x < 9.0e18L)) throw std::overflow_error("crossover bound exceeds 64 bits");
  // Least N0 with C_E C_eps n^{1/2 - eps} > C_G, i.e. n > x.
  return std::max<Integer>(1, static_cast<Integer>(std::floor(x)) + 1);
}

EisensteinSeries::EisensteinSeries(CongruenceForm form, double tolerance) : engine_(std::move(form)) {
  require_rank4(engine_.form());
  l2_ = dirichlet_L2(engine_.character(), tolerance);
}

ApproxReal EisensteinSeries::coefficient(Integer n) {
  if (n < 1) throw std::invalid_argument("Eisenstein coefficients are taken at n >= 1");
  const FormGeometry& g = engine_.geometry();
  const QuadraticCharacter& chi = engine_.character();
  double product = 1.0;
  for (Integer p : prime_divisors(g.level)) {
    const Rational beta = engine_.density(n, p).value;
    if (beta == 0) return {0.0, 0.0};
    const double pp = static_cast<double>(p);
    product *= to_double(beta) / (1.0 - chi(p) / (pp * pp));
  }
  for (const auto& [p, e] : factorize(n))
    if (g.level % p != 0) product *= local_sigma(chi(p), p, e);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double value =
      4.0 * pi2 * static_cast<double>(n) / std::sqrt(static_cast<double>(g.discriminant)) * product / l2_.value;
  const double relative = l2_.error / (l2_.value - l2_.error);
  return {value, std::fabs(value) * relative + std::fabs(value) * 64 * DBL_EPSILON};
}

double EisensteinSeries::residual(Integer n, Integer representation_number) {
  return static_cast<double>(representation_number) - coefficient(n).value;
}

double EisensteinSeries::residual(Integer n) { return residual(n, form_representation_count(engine_.form(), n)); }

ApproxReal eisenstein_coefficient(const CongruenceForm& form, Integer n, double tolerance) {
  return EisensteinSeries(form, tolerance).coefficient(n);
}

double cusp_residual(const CongruenceForm& form, Integer n) { return EisensteinSeries(form).residual(n); }

AnalyticProfile analytic_profile(const CongruenceForm& form, double epsilon, std::optional<double> c_g,
                                 double tolerance) {
  require_rank4(form);
  AnalyticProfile profile;
  profile.form = form;
  LocalDensityEngine engine(form);
  profile.geometry = engine.geometry();
  profile.character = engine.character().discriminant();
  profile.l2 = dirichlet_L2(engine.character(), tolerance);
  std::map<Integer, Rational> floors;
  for (Integer p : prime_divisors(profile.geometry.level)) {
    profile.floors[p] = engine.density_floor(p);
    floors[p] = profile.floors[p].value;
  }
  profile.c_e = constant_CE(profile.geometry, engine.character(), profile.l2, floors);
  profile.epsilon = epsilon;
  profile.c_eps = constant_Ceps(engine.character(), epsilon, admissible_exponents(form));
  profile.c_g = c_g;
  if (c_g) profile.crossover = crossover_bound(profile.c_e, *c_g, profile.c_eps, epsilon);
  return profile;
}

}  // namespace trisq
