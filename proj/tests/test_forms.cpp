#include <numeric>
#include <random>

#include "doctest.h"
#include "trisq/escalator.hpp"
#include "trisq/expression.hpp"
#include "trisq/forms.hpp"

using namespace trisq;

namespace {

// Brute force over |z_i| <= sqrt(n / q_i) honoring the congruence conditions.
Integer oracle_theta(const CongruenceForm& f, std::size_t k, Integer n) {
  if (k == f.terms.size()) return n == 0 ? 1 : 0;
  const auto& t = f.terms[k];
  Integer total = 0;
  for (Integer z = -400; z <= 400; ++z) {
    if (((z - t.residue) % t.modulus + t.modulus) % t.modulus != 0) continue;
    const Integer v = t.coefficient * z * z;
    if (v <= n) total += oracle_theta(f, k + 1, n - v);
  }
  return total;
}

}  // namespace

TEST_CASE("completing squares") {
  const CongruenceForm a = complete_squares(parse_sum("P3+P3+3P3"));
  CHECK(a.mu == 8);
  CHECK(a.rho == 5);
  CHECK(a.terms == std::vector<CongruenceTerm>{{1, 2, 1}, {1, 2, 1}, {3, 2, 1}});

  const CongruenceForm b = complete_squares(parse_sum("P3+P4+6P4+7P4"));
  CHECK(b.mu == 8);
  CHECK(b.rho == 1);
  CHECK(b.terms == std::vector<CongruenceTerm>{{1, 2, 1}, {2, 2, 0}, {12, 2, 0}, {14, 2, 0}});

  const CongruenceForm c = complete_squares(parse_sum("P4+P4"));
  CHECK(c.mu == 1);
  CHECK(c.rho == 0);
  CHECK(c.terms == std::vector<CongruenceTerm>{{1, 1, 0}, {1, 1, 0}});
  CHECK_THROWS_AS(complete_squares(parse_sum("P3+P5")), std::invalid_argument);
}

TEST_CASE("discriminant and level") {
  const FormGeometry a = geometry(complete_squares(parse_sum("P3+P3+3P3")));
  CHECK(a.hessian_diagonal == std::vector<Integer>{2, 2, 6});
  CHECK(a.discriminant == 24);
  CHECK(geometry(complete_squares(parse_sum("P3+P4+6P4+7P3"))).level == 336);
  const FormGeometry four = geometry(diagonal_form({1, 1, 1, 1}));
  CHECK(four.discriminant == 16);
  CHECK(four.level == 4);
  const FormGeometry node = geometry(complete_squares(parse_sum("P3+P3+5P4+19P3")));
  CHECK(node.discriminant == 3040);
  CHECK(node.level == 760);
}

TEST_CASE("level is the least N with every N / 2q even") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Integer> coef(1, 40);
  for (int i = 0; i < 200; ++i) {
    const CongruenceForm f = diagonal_form({coef(rng), coef(rng), coef(rng), coef(rng)});
    const FormGeometry g = geometry(f);
    Integer least = 1;
    for (;; ++least) {
      bool ok = true;
      for (Integer h : g.hessian_diagonal) ok &= least % h == 0 && (least / h) % 2 == 0;
      if (ok) break;
    }
    CHECK(g.level == least);
    CHECK((4 * g.discriminant) % g.level == 0);
  }
}

TEST_CASE("theta coefficients") {
  const CongruenceForm four = diagonal_form({1, 1, 1, 1});
  CHECK(form_representation_count(four, 1) == 8);
  CHECK(form_representation_count(four, 8) == 24);
  const CongruenceForm a = complete_squares(parse_sum("P3+P3+3P3"));
  CHECK(form_representation_count(a, 5) == 8);
  CHECK(form_representation_count(a, 5) == representation_count(parse_sum("P3+P3+3P3"), 0));
  for (Integer n = 0; n < 100; ++n)
    if (n % 8 != 5) CHECK(form_representation_count(a, n) == 0);

  const std::vector<Integer> theta = theta_coefficients(four, 200);
  CHECK(theta[0] == 1);
  for (Integer n = 0; n <= 200; ++n) CHECK(theta[n] == oracle_theta(four, 0, n));
  CHECK(theta_coefficients(a, 10)[0] == 0);
}

TEST_CASE("theta sieve agrees with enumeration and across threads") {
  const CongruenceForm f = complete_squares(parse_sum("P3+P4+7P3+14P4"));
  const std::vector<Integer> one = theta_coefficients(f, 3000, 1);
  CHECK(theta_coefficients(f, 3000, 4) == one);
  for (Integer n = 0; n <= 3000; n += 7) CHECK(one[n] == form_representation_count(f, n));
}

TEST_CASE("r_F(n) = r_Q(mu n + rho) on every node of depth at most 4") {
  const EscalatorNode tree = build_tree(2000);
  int checked = 0;
  for_each_node(tree, [&](const EscalatorNode& node) {
    if (node.depth == 0 || node.depth > 4 || node.status == NodeStatus::pruned) return;
    const CongruenceForm f = complete_squares(node.sum);
    const std::vector<Integer> theta = theta_coefficients(f, f.target(400));
    for (Integer n = 0; n <= 400; n += 1) REQUIRE(representation_count(node.sum, n) == theta[f.target(n)]);
    ++checked;
  });
  CHECK(checked > 200);
}

TEST_CASE("r_F(n) = r_Q(mu n + rho) up to 2000 on sampled nodes") {
  for (const char* text : {"P3+P3+5P4+19P3", "P3+P4+6P4", "P4+2P4+5P4+5P4", "P3+P4+7P4+7P4"}) {
    const PolygonalSum s = parse_sum(text);
    const CongruenceForm f = complete_squares(s);
    const std::vector<Integer> theta = theta_coefficients(f, f.target(2000));
    for (Integer n = 0; n <= 2000; ++n) REQUIRE(representation_count(s, n) == theta[f.target(n)]);
  }
}

TEST_CASE("pure squares map to themselves") {
  const PolygonalSum s = parse_sum("P4+2P4+5P4");
  const CongruenceForm f = complete_squares(s);
  const std::vector<Integer> theta = theta_coefficients(f, 5000);
  const RepresentedSet set = represented_set(s, 5000);
  for (Integer n = 0; n <= 5000; ++n) CHECK(set.contains(n) == (theta[n] > 0));
}

TEST_CASE("oracle cross-check of the congruence forms") {
  const CongruenceForm f = complete_squares(parse_sum("P3+2P4+3P3"));
  for (Integer n = 0; n <= 300; ++n) CHECK(form_representation_count(f, n) == oracle_theta(f, 0, n));
}
