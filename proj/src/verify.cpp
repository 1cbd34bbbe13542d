#include "trisq/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <map>
#include <random>
#include <set>

#include "trisq/expression.hpp"
#include "trisq/forms.hpp"

namespace trisq {

namespace {

using Clock = std::chrono::steady_clock;
using i128 = __int128;

constexpr std::size_t kListLimit = 64;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json head(const std::vector<Integer>& values) {
  auto out = nlohmann::json::array();
  for (std::size_t i = 0; i < values.size() && i < kListLimit; ++i) out.push_back(values[i]);
  return out;
}

void finish(VerificationReport& report, Clock::time_point start) {
  report.passed = report.counterexamples.empty();
  report.seconds = seconds_since(start);
}

Integer floor_mod(Integer a, Integer m) {
  Integer r = a % m;
  return r < 0 ? r + m : r;
}

std::map<PolygonalSum, const EscalatorNode*> index_nodes(const EscalatorNode& tree) {
  std::map<PolygonalSum, const EscalatorNode*> out;
  for_each_node(tree, [&](const EscalatorNode& n) {
    if (n.status != NodeStatus::pruned) out.emplace(n.sum, &n);
  });
  return out;
}

}  // namespace

bool GeometricFamily::contains(Integer target) const {
  if (target <= 0 || c <= 0 || target % c != 0) return false;
  Integer q = target / c;
  if (g <= 1) return q == 1;
  while (q % g == 0) q /= g;
  return q == 1;
}

bool ExceptionalFamily::contains(Integer n) const {
  if (std::find(values.begin(), values.end(), n) != values.end()) return true;
  for (const auto& cls : classes)
    if (floor_mod(n, cls.modulus) == floor_mod(cls.residue, cls.modulus)) return true;
  const Integer target = mu * n + rho;
  return std::any_of(geometric.begin(), geometric.end(), [&](const GeometricFamily& f) { return f.contains(target); });
}

void ExceptionalFamily::validate() const {
  for (const auto& f : geometric) {
    if (f.c <= 0) throw std::invalid_argument("family base must be positive");
    if (floor_mod(f.c - rho, mu) != 0)
      throw std::invalid_argument("family base " + std::to_string(f.c) + " is not a target mu n + rho");
    const auto factors = factorize(f.g);
    if (f.g < 4 || factors.size() != 1 || factors[0].second != 2)
      throw std::invalid_argument("family ratio " + std::to_string(f.g) + " is not a prime square");
  }
  for (const auto& cls : classes)
    if (cls.modulus < 1) throw std::invalid_argument("residue class modulus must be positive");
}

std::string ExceptionalFamily::to_string() const {
  std::vector<std::string> parts;
  for (Integer v : values) parts.push_back("n=" + std::to_string(v));
  for (const auto& cls : classes) parts.push_back("n=" + std::to_string(cls.residue) + " mod " + std::to_string(cls.modulus));
  const std::string target = std::to_string(mu) + "n+" + std::to_string(rho);
  for (const auto& f : geometric) parts.push_back(target + "=" + std::to_string(f.c) + "*" + std::to_string(f.g) + "^a");
  if (parts.empty()) return "none";
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

std::string to_string(CheckMode m) { return m == CheckMode::exact ? "exact" : "containment"; }

nlohmann::json VerificationReport::to_json(bool with_time) const {
  nlohmann::json j;
  j["claim"] = claim;
  j["status"] = passed ? "pass" : "fail";
  j["bound"] = bound;
  nlohmann::json d = data;
  d["mode"] = mode;
  if (!counterexamples.empty()) d["counterexamples"] = head(counterexamples);
  j["data"] = d;
  if (with_time) j["seconds"] = seconds;
  return j;
}

Verifier::Verifier(VerifyConfig config) : config_(std::move(config)) {}

const EscalatorNode& Verifier::tree() {
  std::call_once(tree_once_, [&] {
    tree_ = std::make_unique<EscalatorNode>(build_tree(config_.tree_cap, true, config_.threads));
  });
  return *tree_;
}

const std::vector<PrintedTruant>& printed_truants() {
  static const std::vector<PrintedTruant> rows = {
      {1, "P3+P3", 5, false},          {1, "P3+P4", 8, false},          {1, "P3+2P3", 4, false},
      {1, "P3+2P4", 4, false},         {1, "P4+P4", 3, false},          {1, "P4+2P4", 5, false},
      {2, "P3+P3+3P3", 8, true},       {2, "P3+P3+3P4", 8, true},       {2, "P3+P3+5P4", 19, false},
      {2, "P3+P4+5P3", 13, true},      {2, "P3+P4+5P4", 13, true},      {2, "P3+P4+6P4", 47, false},
      {2, "P3+P4+7P3", 20, false},     {2, "P3+P4+7P4", 20, false},     {2, "P3+2P4+3P3", 7, true},
      {2, "P3+2P4+3P4", 7, true},      {2, "P3+2P4+4P4", 20, false},    {2, "P4+P4+P4", 7, true},
      {2, "P4+P4+2P4", 14, true},      {2, "P4+P4+3P3", 6, true},       {2, "P4+P4+3P4", 6, true},
      {2, "P4+2P4+2P4", 7, true},      {2, "P4+2P4+3P3", 23, false},    {2, "P4+2P4+3P4", 10, true},
      {2, "P4+2P4+4P4", 14, true},     {2, "P4+2P4+5P3", 10, false},    {2, "P4+2P4+5P4", 10, true},
      {3, "P3+P4+5P3+10P3", 23, false}, {3, "P3+P4+5P3+10P4", 23, false}, {3, "P3+P4+5P4+5P4", 18, false},
      {3, "P4+2P4+5P4+5P4", 15, false}, {3, "P3+P4+7P3+7P3", 41, false},  {3, "P3+P4+7P3+14P3", 34, false},
      {3, "P3+P4+7P3+14P4", 34, false}, {3, "P3+P4+7P4+14P3", 41, false}, {3, "P3+P4+7P4+7P4", 27, false},
      {3, "P3+P4+7P4+14P4", 41, false}, {3, "P4+2P4+5P3+10P3", 20, false}, {3, "P4+2P4+5P3+8P4", 28, false},
      {3, "P4+2P4+5P3+10P4", 20, false},
  };
  return rows;
}

const std::vector<Integer>& critical_integers() {
  static const std::vector<Integer> set = {1, 2, 3, 4, 5, 6, 7, 8, 10, 13, 14, 15, 18, 19, 20, 23, 27, 28, 34, 41, 47, 48};
  return set;
}

const std::vector<ExceptionalClaim>& exceptional_claims() {
  static const std::vector<ExceptionalClaim> claims = [] {
    struct Row {
      const char* id_suffix;
      const char* sum;
      CheckMode mode;
      std::vector<Integer> values;
      std::vector<ResidueClass> classes;
      std::vector<GeometricFamily> geometric;
    };
    const std::vector<Row> rows = {
        {"", "P3+P4+5P3+10P3", CheckMode::containment, {23}, {{93, 125}, {123, 125}}, {}},
        {"/refined", "P3+P4+5P3+10P3", CheckMode::containment, {}, {}, {{200, 25}}},
        {"", "P3+P4+5P3+10P4", CheckMode::exact, {23}, {}, {}},
        {"", "P3+P4+5P4+5P4", CheckMode::exact, {18}, {}, {}},
        {"", "P4+2P4+5P4+5P4", CheckMode::exact, {15}, {}, {}},
        {"", "P3+P4+7P3+7P3", CheckMode::containment, {}, {}, {{343, 49}}},
        {"", "P3+P4+7P3+14P3", CheckMode::containment, {}, {}, {{294, 49}, {686, 49}}},
        {"", "P3+P4+7P3+14P4", CheckMode::containment, {}, {}, {{280, 49}}},
        {"", "P3+P4+7P4+14P3", CheckMode::containment, {}, {}, {{343, 49}}},
        {"", "P3+P4+7P4+7P4", CheckMode::containment, {}, {}, {{217, 49}, {385, 49}}},
        {"", "P3+P4+7P4+14P4", CheckMode::containment, {}, {}, {{329, 49}}},
        {"", "P4+2P4+5P3+10P3", CheckMode::containment, {}, {}, {{175, 25}}},
        {"", "P4+2P4+5P3+8P4", CheckMode::exact, {28}, {}, {}},
        {"", "P4+2P4+5P3+10P4", CheckMode::exact, {20}, {}, {}},
    };
    std::vector<ExceptionalClaim> out;
    for (const auto& r : rows) {
      const PolygonalSum sum = parse_sum(r.sum);
      const CongruenceForm form = complete_squares(sum);
      ExceptionalFamily family{form.mu, form.rho, r.values, r.classes, r.geometric};
      family.validate();
      out.push_back({"exceptional/" + sum.to_string() + r.id_suffix, sum, std::move(family), r.mode});
    }
    return out;
  }();
  return claims;
}

std::optional<ExceptionalFamily> family_of(const PolygonalSum& sum) {
  for (const auto& c : exceptional_claims())
    if (c.sum == sum) return c.family;
  return std::nullopt;
}

VerificationReport verify_truant_tables(const EscalatorNode& tree) {
  const auto start = Clock::now();
  VerificationReport report;
  report.claim = "truant-tables";
  report.mode = "exact";
  const auto nodes = index_nodes(tree);
  Integer cap = 0;
  if (tree.certificate) cap = tree.certificate->checked_bound;
  for_each_node(tree, [&](const EscalatorNode& n) {
    if (n.certificate) cap = std::max(cap, n.certificate->checked_bound);
  });
  report.bound = cap;

  auto rows = nlohmann::json::array();
  std::map<int, std::set<PolygonalSum>> printed_by_depth;
  for (const auto& row : printed_truants()) {
    const PolygonalSum sum = parse_sum(row.sum);
    printed_by_depth[row.table + 1].insert(sum);
    const auto it = nodes.find(sum);
    const bool in_tree = it != nodes.end() && it->second->depth == row.table + 1 &&
                         it->second->status == NodeStatus::non_universal;
    const Integer tree_truant = in_tree ? it->second->truant : 0;
    const auto direct = truant(sum, std::max<Integer>(cap, kMinClassifyCap));
    const bool ok = in_tree && tree_truant == row.truant && direct && *direct == row.truant;
    if (!ok) report.counterexamples.push_back(row.truant);
    rows.push_back({{"table", row.table}, {"sum", row.sum}, {"printed", row.truant}, {"tree", tree_truant},
                    {"direct", direct ? *direct : 0}, {"match", ok}});
  }
  // No unprinted non-universal node at depths 2..4.
  auto extras = nlohmann::json::array();
  for (int depth = 2; depth <= 4; ++depth) {
    for (const auto& e : truant_table(tree, depth)) {
      if (!printed_by_depth[depth].contains(e.sum)) {
        extras.push_back(e.sum.to_string());
        report.counterexamples.push_back(e.truant);
      }
    }
  }
  report.data["rows"] = rows;
  report.data["pairs"] = printed_truants().size();
  report.data["unprinted_non_universal"] = extras;
  finish(report, start);
  return report;
}

VerificationReport verify_truant_tables(Integer cap, unsigned threads) {
  return verify_truant_tables(build_tree(cap, true, threads));
}

VerificationReport verify_exceptional_set(const PolygonalSum& sum, const ExceptionalFamily& family, CheckMode mode,
                                          Integer bound, unsigned threads) {
  const auto start = Clock::now();
  family.validate();
  VerificationReport report;
  report.claim = "exceptional/" + sum.to_string();
  report.bound = bound;
  report.mode = to_string(mode);
  for (Integer v : family.values)
    if (v > bound) throw std::invalid_argument("bound is below an explicit exclusion");
  const RepresentedSet set = represented_set(sum, bound, threads);
  std::vector<Integer> missed = set.missing(1);
  std::vector<Integer> members;
  for (Integer n = 1; n <= bound; ++n)
    if (family.contains(n)) members.push_back(n);

  std::vector<Integer> missed_members;
  for (Integer n : missed) {
    if (family.contains(n)) {
      missed_members.push_back(n);
    } else {
      report.counterexamples.push_back(n);  // a miss outside the family
    }
  }
  if (mode == CheckMode::exact) {
    for (Integer n : members)
      if (set.contains(n)) report.counterexamples.push_back(n);  // the family is not exactly the missed set
  }
  std::sort(report.counterexamples.begin(), report.counterexamples.end());
  report.data["sum"] = sum.to_string();
  report.data["family"] = family.to_string();
  report.data["missed_count"] = missed.size();
  report.data["missed"] = head(missed);
  report.data["family_members"] = members.size();
  report.data["family_members_missed"] = missed_members.size();
  finish(report, start);
  return report;
}

VerificationReport verify_family_escape(const PolygonalSum& parent, const ExceptionalFamily& family, Term added,
                                        Integer bound) {
  const auto start = Clock::now();
  family.validate();
  VerificationReport report;
  const PolygonalSum child = parent.with(added);
  report.claim = "family-escape/" + child.to_string();
  report.bound = bound;
  report.mode = "escape";
  const std::vector<Integer> shifts = term_values(Term{1, added.order}, bound / added.coefficient + 1);
  std::map<Integer, Integer> used;  // shift value -> count
  Integer direct = 0;
  for (Integer n = 1; n <= bound; ++n) {
    if (!family.contains(n)) {
      ++direct;
      continue;
    }
    bool escaped = false;
    for (Integer w : shifts) {
      if (w == 0) continue;
      const Integer rest = n - added.coefficient * w;
      if (rest < 0) break;
      if (rest == 0 || !family.contains(rest)) {
        ++used[w];
        escaped = true;
        break;
      }
    }
    if (!escaped) report.counterexamples.push_back(n);
  }
  report.data["parent"] = parent.to_string();
  report.data["child"] = child.to_string();
  report.data["family"] = family.to_string();
  report.data["escaped_at_v0"] = direct;
  nlohmann::json shift_counts = nlohmann::json::object();
  for (const auto& [w, c] : used) shift_counts[std::to_string(w)] = c;
  report.data["shifted"] = shift_counts;
  finish(report, start);
  return report;
}

VerificationReport verify_descent(Integer bound, unsigned threads) {
  const auto start = Clock::now();
  VerificationReport report;
  report.claim = "descent";
  report.bound = bound;
  report.mode = "exact";
  const PolygonalSum base = parse_sum("P3+P3+3P3");
  const RepresentedSet base_set = represented_set(base, bound, threads);
  auto fail = [&](Integer n, const std::string& why) {
    report.counterexamples.push_back(n);
    if (!report.data.contains("failures")) report.data["failures"] = nlohmann::json::array();
    if (report.data["failures"].size() < kListLimit) report.data["failures"].push_back({{"n", n}, {"reason", why}});
  };

  // v = 0: the ternary form covers every n outside 8, 17, 23, 26 mod 27.
  Integer ternary_misses = 0;
  for (Integer n = 1; n <= bound; ++n) {
    const Integer r = n % 27;
    if (r == 8 || r == 17 || r == 23 || r == 26) continue;
    if (!base_set.contains(n)) {
      ++ternary_misses;
      fail(n, "ternary form misses a class outside 8,17,23,26 mod 27");
    }
  }

  // Divisibility premise and the shape of one descent step.
  Integer longest_chain = 0;
  for (Integer n = 23; n <= bound; n += 27) {
    if ((8 * n + 5) % 9 != 0) fail(n, "8n+5 not divisible by 9");
    const Integer m = (n - 23) / 27;
    if ((8 * n + 5) / 9 != 8 * (3 * m + 2) + 5) fail(n, "descent step does not land on 8(3m+2)+5");
    Integer k = n, steps = 0;
    while (k % 27 == 23) {
      k = 3 * ((k - 23) / 27) + 2;
      ++steps;
    }
    longest_chain = std::max(longest_chain, steps);
  }

  auto json_children = nlohmann::json::array();
  for (Integer a4 = 3; a4 <= 8; ++a4) {
    const PolygonalSum child = base.with(Term{a4, 4});
    const RepresentedSet child_set = represented_set(child, bound, threads);
    Integer shifted = 0, small = 0, lifted = 0;
    for (Integer n = 1; n <= bound; ++n) {
      const Integer r = n % 27;
      if (r == 8 || r == 17 || r == 26) {
        // w = 1 (subtract a4), or w = 2 (subtract 4 a4) when a4 = 3 and n = 26 mod 27.
        const Integer drop = (a4 == 3 && r == 26) ? 4 * a4 : a4;
        if (n >= drop) {
          if (!base_set.contains(n - drop)) fail(n, "shift by a4 P4(w) is not represented by the ternary form");
          ++shifted;
        } else {
          if (!child_set.contains(n)) fail(n, "small n not represented by the child");
          ++small;
        }
      } else if (r == 23) {
        // Descend to a class the argument covers, then scale the witness by 3 per step.
        Integer k = n;
        int steps = 0;
        while (k % 27 == 23) {
          k = 3 * ((k - 23) / 27) + 2;
          ++steps;
        }
        const auto w = represents(child, k);
        if (!w) {
          fail(n, "descended target is not represented");
          continue;
        }
        std::vector<Integer> x = w->assignment;  // canonical order P3, P3, 3P3, a4 P4
        for (int s = 0; s < steps; ++s) {
          for (std::size_t i = 0; i < 3; ++i) x[i] = 3 * x[i] + 1;  // 2x+1 -> 3(2x+1)
          x[3] *= 3;
        }
        if (child.evaluate(x) != n) fail(n, "lifted witness does not evaluate to n");
        ++lifted;
      }
      if (!child_set.contains(n)) fail(n, "child misses n");
    }
    json_children.push_back({{"child", child.to_string()}, {"shifted", shifted}, {"small_direct", small},
                             {"lifted_by_descent", lifted}, {"universal_to_bound", !child_set.first_missing(1)}});
  }
  report.data["ternary"] = base.to_string();
  report.data["ternary_misses_outside_classes"] = ternary_misses;
  report.data["n23_descends_to"] = 3 * ((23 - 23) / 27) + 2;
  report.data["n23_target_divisible_by_9"] = (8 * 23 + 5) % 9 == 0;
  report.data["longest_chain"] = longest_chain;
  report.data["children"] = json_children;
  std::sort(report.counterexamples.begin(), report.counterexamples.end());
  report.counterexamples.erase(std::unique(report.counterexamples.begin(), report.counterexamples.end()),
                               report.counterexamples.end());
  finish(report, start);
  return report;
}

namespace {

using Vec3 = std::array<Integer, 3>;
using Mat3 = std::array<Vec3, 3>;

// Hessians (twice the Gram matrices) of Q1 = x^2 + 3y^2 + 8z^2 and
// Q2 = 3x^2 + 3y^2 + 4z^2 + 2xy - 2xz + 2yz.
constexpr Mat3 kA1{{{2, 0, 0}, {0, 6, 0}, {0, 0, 16}}};
constexpr Mat3 kA2{{{6, 2, -2}, {2, 6, 2}, {-2, 2, 8}}};
// Five times the substitutions of the four identities and of T. The second identity
// holds only with +y in its last coordinate; the -y variant is kept to report it.
constexpr Mat3 kIdentity2AsPrinted{{{4, 8, -1}, {-3, -1, -3}, {-2, -1, 3}}};
constexpr std::array<Mat3, 4> kIdentities{{
    {{{4, 8, 5}, {-3, -1, 5}, {-2, 1, 0}}},
    {{{4, 8, -1}, {-3, -1, -3}, {-2, 1, 3}}},
    {{{8, 4, -5}, {-1, -3, -5}, {-1, 2, 0}}},
    {{{8, 4, 1}, {-1, -3, 3}, {-1, 2, 3}}},
}};
constexpr Mat3 kT{{{0, -5, 0}, {-1, 4, 6}, {-4, -4, -1}}};
// Coset representatives of R1..R5 (each also with its negative).
const std::array<std::vector<Vec3>, 5> kCosets{{
    {{0, 0, 2}, {1, 2, 3}, {1, 2, 4}, {2, 4, 0}, {2, 4, 4}},
    {{2, 0, 3}, {2, 1, 1}, {2, 2, 4}, {2, 3, 2}},
    {{1, 3, 0}, {1, 3, 4}, {2, 1, 2}},
    {{0, 2, 2}, {2, 2, 1}},
    {{2, 3, 0}},
}};

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Mat3 transpose(const Mat3& a) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

Mat3 scaled(const Mat3& a, Integer s) {
  Mat3 out = a;
  for (auto& row : out)
    for (auto& v : row) v *= s;
  return out;
}

Integer determinant(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<i128, 3> act(const Mat3& m, const std::array<i128, 3>& v) {
  std::array<i128, 3> out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i] += m[i][j] * v[j];
  return out;
}

i128 q1(const std::array<i128, 3>& v) { return v[0] * v[0] + 3 * v[1] * v[1] + 8 * v[2] * v[2]; }
i128 q2(const std::array<i128, 3>& v) {
  return 3 * v[0] * v[0] + 3 * v[1] * v[1] + 4 * v[2] * v[2] + 2 * v[0] * v[1] - 2 * v[0] * v[2] + 2 * v[1] * v[2];
}

Vec3 reduce5(const std::array<i128, 3>& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = static_cast<Integer>(((v[i] % 5) + 5) % 5);
  return out;
}

bool divisible5(const std::array<i128, 3>& v) {
  return std::all_of(v.begin(), v.end(), [](i128 x) { return x % 5 == 0; });
}

/// Index 0..4 of the coset R_i holding the class of v (scaled by `unit`), or -1.
int coset_of(const Vec3& v, Integer unit) {
  for (int i = 0; i < 5; ++i) {
    for (const Vec3& c : kCosets[i]) {
      for (Integer sign : {Integer{1}, Integer{-1}}) {
        bool same = true;
        for (int k = 0; k < 3; ++k) same &= floor_mod(sign * unit * c[k] - v[k], 5) == 0;
        if (same) return i;
      }
    }
  }
  return -1;
}

std::array<i128, 3> widen(const Vec3& v) { return {v[0], v[1], v[2]}; }

}  // namespace

VerificationReport verify_sliding_identities(Integer bound, std::uint64_t seed, unsigned threads) {
  const auto start = Clock::now();
  VerificationReport report;
  report.claim = "sliding-identities";
  report.bound = bound;
  report.mode = "exact";
  Integer failed_check = 0;
  auto check = [&](bool ok, const char* name) {
    ++failed_check;
    report.data["checks"][name] = ok;
    if (!ok) report.counterexamples.push_back(failed_check);
  };

  // Polynomial identities as exact matrix identities M^T A1 M = 25 A2.
  for (std::size_t i = 0; i < kIdentities.size(); ++i) {
    const Mat3& m = kIdentities[i];
    const bool ok = multiply(multiply(transpose(m), kA1), m) == scaled(kA2, 25);
    check(ok, ("identity_" + std::to_string(i + 1) + "_matrix").c_str());
  }
  report.data["identity_2_with_minus_y_is_identity"] =
      multiply(multiply(transpose(kIdentity2AsPrinted), kA1), kIdentity2AsPrinted) == scaled(kA2, 25);
  check(multiply(multiply(transpose(kT), kA2), kT) == scaled(kA2, 25), "T_preserves_Q2");
  check(determinant(kT) == 125, "det_T_is_125");
  {
    const auto fixed = act(kT, {1, -1, 0});
    check(fixed[0] == 5 && fixed[1] == -5 && fixed[2] == 0, "T_fixes_(1,-1,0)");
    check(q2({1, -1, 0}) == 4, "Q2(1,-1,0)=4");
  }

  // Random evaluation of the identities at integer triples.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Integer> coord(-1'000'000, 1'000'000);
  bool random_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::array<i128, 3> v{coord(rng), coord(rng), coord(rng)};
    for (const Mat3& m : kIdentities) random_ok &= q1(act(m, v)) == 25 * q2(v);
    random_ok &= q2(act(kT, v)) == 25 * q2(v);
  }
  check(random_ok, "random_evaluation_1000");

  // Integrality of each substitution on its cosets (and on 2 R_i for n = -1 mod 5).
  bool integral = true;
  for (int i = 0; i < 4; ++i)
    for (const Vec3& c : kCosets[i])
      for (Integer s : {1, -1, 2, -2}) integral &= divisible5(act(kIdentities[i], widen({s * c[0], s * c[1], s * c[2]})));
  for (Integer s : {1, -1, 2, -2})
    integral &= divisible5(act(kT, widen({s * kCosets[4][0][0], s * kCosets[4][0][1], s * kCosets[4][0][2]})));
  check(integral, "substitutions_integral_on_cosets");
  {
    const auto pre = act(kIdentities[0], {0, 0, 2});
    check(divisible5(pre) && q1({pre[0] / 5, pre[1] / 5, pre[2] / 5}) == q2({0, 0, 2}), "identity_1_at_(0,0,2)");
  }

  // Every class with Q2 = 1 (mod 5) lies in R1..R5; those with Q2 = -1 lie in 2 R1..2 R5.
  bool covers = true, disjoint = true;
  Integer classes_one = 0;
  for (Integer x = 0; x < 5; ++x)
    for (Integer y = 0; y < 5; ++y)
      for (Integer z = 0; z < 5; ++z) {
        const Vec3 v{x, y, z};
        const Integer value = static_cast<Integer>(q2(widen(v)) % 5);
        if (value == 1) {
          ++classes_one;
          covers &= coset_of(v, 1) >= 0;
        }
        if (value == 4) covers &= coset_of(v, 2) >= 0;
        int hits = 0;
        for (int i = 0; i < 5; ++i)
          for (const Vec3& c : kCosets[i])
            for (Integer s : {1, -1}) {
              bool same = true;
              for (int k = 0; k < 3; ++k) same &= floor_mod(s * c[k] - v[k], 5) == 0;
              hits += same;
            }
        disjoint &= hits <= 1;
      }
  check(covers, "cosets_cover_unit_classes");
  check(disjoint, "cosets_disjoint");
  report.data["classes_with_Q2_1_mod_5"] = classes_one;

  // T sends representations in R5 back into R1..R5 (classes mod 25 suffice).
  bool t_closed = true;
  for (Integer x = 0; x < 25; ++x)
    for (Integer y = 0; y < 25; ++y)
      for (Integer z = 0; z < 25; ++z) {
        const std::array<i128, 3> v{x, y, z};
        if (coset_of(reduce5(v), 1) != 4 || q2(v) % 5 != 1) continue;
        const auto tv = act(kT, v);
        t_closed &= divisible5(tv) && coset_of(reduce5({tv[0] / 5, tv[1] / 5, tv[2] / 5}), 1) >= 0;
      }
  check(t_closed, "T_maps_R5_into_cosets");

  // Random Q2-representations of n = +-1 mod 5 become Q1-representations.
  Integer sampled = 0, via_identity = 0, via_t = 0, eigen = 0;
  bool transfer_ok = true;
  std::uniform_int_distribution<Integer> small(-200, 200);
  while (sampled < 1000) {
    std::array<i128, 3> v{small(rng), small(rng), small(rng)};
    const i128 n = q2(v);
    const Integer r = static_cast<Integer>(n % 5);
    if (n <= 0 || (r != 1 && r != 4)) continue;
    ++sampled;
    const Integer unit = r == 1 ? 1 : 2;
    bool done = false;
    for (int step = 0; step < 64 && !done; ++step) {
      const int cls = coset_of(reduce5(v), unit);
      if (cls < 0) {
        transfer_ok = false;
        break;
      }
      if (cls < 4) {
        const auto pre = act(kIdentities[static_cast<std::size_t>(cls)], v);
        transfer_ok &= divisible5(pre) && q1({pre[0] / 5, pre[1] / 5, pre[2] / 5}) == n;
        ++via_identity;
        if (step > 0) ++via_t;
        done = true;
      } else {
        const auto tv = act(kT, v);
        if (!divisible5(tv)) {
          transfer_ok = false;
          break;
        }
        const std::array<i128, 3> next{tv[0] / 5, tv[1] / 5, tv[2] / 5};
        transfer_ok &= q2(next) == n;
        if (next == v) {
          ++eigen;  // on the fixed line through (1,-1,0), so n = 4 t^2
          transfer_ok &= v[0] == -v[1] && v[2] == 0;
          done = true;
        }
        v = next;
      }
    }
    transfer_ok &= done;
  }
  check(transfer_ok, "random_representations_transfer");
  report.data["sampled_representations"] = sampled;
  report.data["transferred_directly"] = via_identity - via_t;
  report.data["transferred_after_T"] = via_t;
  report.data["on_fixed_line"] = eigen;

  // The congruence conditions on Q1 are forced modulo 8.
  bool forced = true;
  for (Integer x = 0; x < 8; ++x)
    for (Integer y = 0; y < 8; ++y)
      for (Integer z = 0; z < 8; ++z)
        if (q1({x, y, z}) % 8 == 1) forced &= x % 2 == 1 && y % 4 == 0;
  check(forced, "congruence_conditions_forced_mod_8");

  // Conclusion: P3+P4+6P4 represents every n = 0, 1 (mod 5).
  const RepresentedSet set = represented_set(parse_sum("P3+P4+6P4"), bound, threads);
  std::vector<Integer> misses;
  for (Integer n = 1; n <= bound; ++n)
    if ((n % 5 == 0 || n % 5 == 1) && !set.contains(n)) misses.push_back(n);
  report.data["checks"]["mod5_conclusion"] = misses.empty();
  report.data["mod5_misses"] = head(misses);
  report.counterexamples.insert(report.counterexamples.end(), misses.begin(), misses.end());
  finish(report, start);
  return report;
}

VerificationReport verify_mod5_children(Integer bound, unsigned threads) {
  const auto start = Clock::now();
  VerificationReport report;
  report.claim = "mod5-children";
  report.bound = bound;
  report.mode = "exact";
  const PolygonalSum parent = parse_sum("P3+P4+6P4");
  const RepresentedSet parent_set = represented_set(parent, bound, threads);
  std::vector<Term> stated;
  for (Integer a = 7; a <= 47; ++a)
    if (a % 5 == 1 || a % 5 == 4) stated.push_back({a, 3});
  for (Integer a = 6; a <= 47; ++a)
    if (a % 5 == 2 || a % 5 == 3) stated.push_back({a, 4});

  // The stated children are escalations of the parent (truant 47).
  const auto escalations = children(parent, 47);
  auto json_children = nlohmann::json::array();
  for (const Term& t : stated) {
    const PolygonalSum child = parent.with(t);
    if (std::find(escalations.begin(), escalations.end(), child) == escalations.end()) {
      report.counterexamples.push_back(t.coefficient);
      continue;
    }
    const RepresentedSet child_set = represented_set(child, bound, threads);
    const std::vector<Integer> values = term_values(Term{t.coefficient, t.order}, bound);
    Integer covered = 0, shifted = 0, fallback = 0, max_shift = 0;
    for (Integer n = 1; n <= bound; ++n) {
      if (n % 5 == 0 || n % 5 == 1) {
        if (parent_set.contains(n)) {
          ++covered;
        } else {
          report.counterexamples.push_back(n);
        }
        continue;
      }
      bool done = false;
      for (Integer w : values) {
        if (w == 0) continue;
        if (w > n) break;
        const Integer rest = n - w;
        if ((rest % 5 == 0 || rest % 5 == 1) && parent_set.contains(rest)) {
          ++shifted;
          max_shift = std::max(max_shift, w);
          done = true;
          break;
        }
      }
      if (!done) {
        if (child_set.contains(n)) {
          ++fallback;
        } else {
          report.counterexamples.push_back(n);
        }
      }
    }
    const bool sieve_universal = !child_set.first_missing(1);
    if (!sieve_universal) report.counterexamples.push_back(*child_set.first_missing(1));
    json_children.push_back({{"child", child.to_string()}, {"mod5_covered", covered}, {"one_shift", shifted},
                             {"direct_small", fallback}, {"largest_shift", max_shift},
                             {"sieve_universal", sieve_universal}});
  }
  report.data["children"] = json_children;
  report.data["stated_children"] = stated.size();
  finish(report, start);
  return report;
}

VerificationReport verify_euler(Integer bound, unsigned threads) {
  const auto start = Clock::now();
  VerificationReport report;
  report.claim = "euler";
  report.bound = bound;
  report.mode = "exact";
  const RepresentedSet a = represented_set(parse_sum("P3+P3"), bound, threads);
  const RepresentedSet b = represented_set(parse_sum("P4+2P3"), bound, threads);
  std::vector<Integer> differ;
  for (Integer n = 0; n <= bound; ++n)
    if (a.contains(n) != b.contains(n)) differ.push_back(n);
  report.counterexamples = differ;
  report.data["symmetric_difference"] = differ.size();
  report.data["first_missing"] = a.first_missing(1) ? *a.first_missing(1) : 0;
  report.data["count_represented"] = a.count();

  // Subtrees with pruning off carry the same truants depth by depth.
  const Integer cap = std::clamp<Integer>(bound, kMinClassifyCap, kDefaultClassifyCap);
  const EscalatorNode left = build_subtree(parse_sum("P3+P3"), cap, false, threads);
  const EscalatorNode right = build_subtree(parse_sum("P4+2P3"), cap, false, threads);
  auto by_depth = [](const EscalatorNode& t) {
    std::map<int, std::multiset<Integer>> out;
    for_each_node(t, [&](const EscalatorNode& n) {
      if (n.status == NodeStatus::non_universal) out[n.depth].insert(n.truant);
    });
    return out;
  };
  const auto l = by_depth(left), r = by_depth(right);
  std::set<Integer> lt, rt;
  for (const auto& [d, s] : l) lt.insert(s.begin(), s.end());
  for (const auto& [d, s] : r) rt.insert(s.begin(), s.end());
  bool same = l.size() == r.size();
  for (const auto& [d, s] : l) same &= r.contains(d) && std::set<Integer>(s.begin(), s.end()) == std::set<Integer>(r.at(d).begin(), r.at(d).end());
  report.data["subtree_truants_match"] = same;
  report.data["subtree_cap"] = cap;
  if (!same) report.counterexamples.push_back(cap);
  finish(report, start);
  return report;
}

VerificationReport verify_critical_construction(Integer t, const EscalatorNode& tree, Integer bound) {
  const auto start = Clock::now();
  if (bound < 4 * t + 2) throw std::invalid_argument("bound must be at least 4t + 2");
  VerificationReport report;
  report.claim = "critical-constructions/" + std::to_string(t);
  report.bound = bound;
  report.mode = "exact";
  const EscalatorNode* chosen = nullptr;
  for_each_node(tree, [&](const EscalatorNode& n) {
    if (n.status != NodeStatus::non_universal || n.truant != t) return;
    if (!chosen || n.depth < chosen->depth || (n.depth == chosen->depth && n.sum < chosen->sum)) chosen = &n;
  });
  if (!chosen) {
    report.counterexamples.push_back(t);
    report.data["error"] = "no node with this truant";
    finish(report, start);
    return report;
  }
  std::vector<Term> terms = chosen->sum.terms();
  for (int i = 0; i < 3; ++i) terms.push_back({t + 1, 3});
  terms.push_back({2 * t + 1, 3});
  const PolygonalSum h(terms);
  const RepresentedSet set = represented_set(h, bound);
  const std::vector<Integer> missed = set.missing(1);
  if (missed != std::vector<Integer>{t}) {
    report.counterexamples = missed.empty() ? std::vector<Integer>{t} : missed;
    std::erase(report.counterexamples, t);
    if (report.counterexamples.empty()) report.counterexamples.push_back(t);
  }
  report.data["F"] = chosen->sum.to_string();
  report.data["F_depth"] = chosen->depth;
  report.data["H"] = h.to_string();
  report.data["missed"] = head(missed);
  finish(report, start);
  return report;
}

VerificationReport verify_critical_set(const EscalatorNode& tree) {
  const auto start = Clock::now();
  VerificationReport report;
  report.claim = "critical-set";
  report.mode = "exact";
  const std::vector<Integer> truants = truant_set(tree);
  const auto& expected = critical_integers();
  for (Integer t : truants)
    if (!std::binary_search(expected.begin(), expected.end(), t)) report.counterexamples.push_back(t);
  for (Integer t : expected)
    if (!std::binary_search(truants.begin(), truants.end(), t)) report.counterexamples.push_back(t);

  std::map<int, Integer> per_depth;
  int deepest = 0;
  Integer certified = 0, uncertified = 0, cap = 0;
  std::vector<std::string> deepest_nodes;
  for_each_node(tree, [&](const EscalatorNode& n) {
    if (n.status == NodeStatus::non_universal) {
      ++per_depth[n.depth];
      if (n.depth > deepest) {
        deepest = n.depth;
        deepest_nodes.clear();
      }
      if (n.depth == deepest) deepest_nodes.push_back(n.sum.to_string() + ":" + std::to_string(n.truant));
    } else if (n.status == NodeStatus::universal) {
      if (n.certificate && n.certificate->checked_bound >= kMinClassifyCap) {
        ++certified;
        cap = std::max(cap, n.certificate->checked_bound);
      } else {
        ++uncertified;
      }
      // A universal leaf represents every critical integer.
      const auto missing = truant(n.sum, expected.back());
      if (missing) report.counterexamples.push_back(*missing);
    }
  });
  const std::vector<std::string> expected_deepest = {"P3+P4+7P4+7P4+21P3:48", "P3+P4+7P4+7P4+21P4:48"};
  if (deepest != 5 || deepest_nodes != expected_deepest) report.counterexamples.push_back(48);
  if (uncertified != 0) report.counterexamples.push_back(uncertified);
  report.bound = cap;
  nlohmann::json depth_counts = nlohmann::json::object();
  for (const auto& [d, c] : per_depth) depth_counts[std::to_string(d)] = c;
  report.data["truants"] = truants;
  report.data["non_universal_per_depth"] = depth_counts;
  report.data["deepest_depth"] = deepest;
  report.data["deepest_nodes"] = deepest_nodes;
  report.data["certified_universal_leaves"] = certified;
  finish(report, start);
  return report;
}

}  // namespace trisq
