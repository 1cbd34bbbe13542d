#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "trisq/analytic.hpp"
#include "trisq/escalator.hpp"

namespace trisq {

/// Targets c * g^a for a >= 0.
struct GeometricFamily {
  Integer c = 1;
  Integer g = 1;
  bool contains(Integer target) const;
};

/// n with n = residue (mod modulus).
struct ResidueClass {
  Integer residue = 0;
  Integer modulus = 1;
};

/// Integers n a sum may fail to represent: explicit values of n, residue classes of n,
/// and geometric families of targets mu n + rho.
struct ExceptionalFamily {
  Integer mu = 1;
  Integer rho = 0;
  std::vector<Integer> values;
  std::vector<ResidueClass> classes;
  std::vector<GeometricFamily> geometric;

  bool contains(Integer n) const;
  bool empty() const { return values.empty() && classes.empty() && geometric.empty(); }
  /// Throws std::invalid_argument unless every c is = rho (mod mu) and every g is a prime square.
  void validate() const;
  std::string to_string() const;
};

enum class CheckMode { exact, containment };
std::string to_string(CheckMode m);

struct VerificationReport {
  std::string claim;
  bool passed = false;
  Integer bound = 0;
  std::string mode;
  std::vector<Integer> counterexamples;  // nonempty when !passed
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0.0;

  /// {claim, status, bound, data}; wall time only when requested.
  nlohmann::json to_json(bool with_time = false) const;
};

/// Unknown id passed to run_claim.
class UnknownClaimError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct VerifyConfig {
  Integer tree_cap = kDefaultClassifyCap;
  Integer quaternary_bound = 100'000;
  Integer ternary_bound = 1'000'000;
  Integer construction_bound = 5'000;
  double epsilon = 0.25;
  /// Externally supplied cusp constants per node (canonical text).
  std::map<std::string, double> cusp_constants{{"P3+P3+5P4+19P3", 12.645}};
  unsigned threads = 1;
  std::uint64_t seed = 20240601;
};

/// Shared state across claims (the escalator tree is built once per cap).
class Verifier {
 public:
  explicit Verifier(VerifyConfig config = {});

  const VerifyConfig& config() const { return config_; }
  const EscalatorNode& tree();

 private:
  VerifyConfig config_;
  std::once_flag tree_once_;
  std::unique_ptr<EscalatorNode> tree_;
};

// Published truant tables and the critical set.
struct PrintedTruant {
  int table;  // 1, 2, 3 for depths 2, 3, 4
  const char* sum;
  Integer truant;
  bool arithmetic;  // depth-3 rows routed to arithmetic methods
};
const std::vector<PrintedTruant>& printed_truants();
const std::vector<Integer>& critical_integers();

struct ExceptionalClaim {
  std::string id;
  PolygonalSum sum;
  ExceptionalFamily family;
  CheckMode mode;
};
/// The printed characterizations of non-universal depth-4 nodes (exact or containment).
const std::vector<ExceptionalClaim>& exceptional_claims();
/// Family a depth-4 non-universal node may miss (its weakest printed characterization).
std::optional<ExceptionalFamily> family_of(const PolygonalSum& sum);

// Individual checks.
VerificationReport verify_truant_tables(const EscalatorNode& tree);
VerificationReport verify_truant_tables(Integer cap, unsigned threads = 1);
VerificationReport verify_exceptional_set(const PolygonalSum& sum, const ExceptionalFamily& family, CheckMode mode,
                                          Integer bound, unsigned threads = 1);
/// Child parent + term is certified at n when mu n + rho escapes the family (v = 0), or some
/// v != 0 gives n - a P_m(v) >= 0 outside the family.
VerificationReport verify_family_escape(const PolygonalSum& parent, const ExceptionalFamily& family, Term added,
                                        Integer bound);
VerificationReport verify_descent(Integer bound, unsigned threads = 1);
VerificationReport verify_sliding_identities(Integer bound, std::uint64_t seed = 1, unsigned threads = 1);
VerificationReport verify_mod5_children(Integer bound, unsigned threads = 1);
VerificationReport verify_euler(Integer bound, unsigned threads = 1);
/// H = F + (t+1)(P3+P3+P3) + (2t+1)P3 with F the shallowest, canonically first node of truant t.
VerificationReport verify_critical_construction(Integer t, const EscalatorNode& tree, Integer bound);
VerificationReport verify_critical_set(const EscalatorNode& tree);

/// All registered claim ids, in report order.
std::vector<std::string> claim_ids();
/// Runs one claim; `bound` overrides the claim's default bound where it has one.
VerificationReport run_claim(const std::string& id, Verifier& verifier, std::optional<Integer> bound = std::nullopt);

}  // namespace trisq
