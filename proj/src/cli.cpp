#include "trisq/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "trisq/expression.hpp"

namespace trisq {

namespace {

constexpr std::size_t kListLimit = 64;

nlohmann::json record(const std::string& claim, bool passed, Integer bound, nlohmann::json data) {
  return {{"claim", claim}, {"status", passed ? "pass" : "fail"}, {"bound", bound}, {"data", std::move(data)}};
}

nlohmann::json head(const std::vector<Integer>& values) {
  auto out = nlohmann::json::array();
  for (std::size_t i = 0; i < values.size() && i < kListLimit; ++i) out.push_back(values[i]);
  return out;
}

nlohmann::json terms_json(const PolygonalSum& sum) {
  auto out = nlohmann::json::array();
  for (const Term& t : sum.terms()) out.push_back({t.coefficient, t.order});
  return out;
}

void require_tree_orders(const PolygonalSum& sum) {
  if (!sum.is_triangular_square()) throw std::invalid_argument("only orders 3 and 4 are supported here");
}

std::string rational_text(const Rational& r) { return r.str(); }

/// Runs a command body, mapping exceptions to exit codes.
class Session {
 public:
  Session(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void emit(const nlohmann::json& j) {
    out_ << j.dump() << '\n';
    const bool pass = j.value("status", "pass") == "pass";
    ++(pass ? passed_ : failed_);
    if (!pass) failed_ids_.push_back(j.value("claim", ""));
  }

  int finish() {
    err_ << "summary: " << passed_ << " pass, " << failed_ << " fail";
    for (const auto& id : failed_ids_) err_ << "\n  failed: " << id;
    err_ << '\n';
    return failed_ == 0 ? kExitPass : kExitFail;
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  int passed_ = 0;
  int failed_ = 0;
  std::vector<std::string> failed_ids_;
};

void write_checkpoint(const std::filesystem::path& path, const std::string& claim, Integer bound, Integer cursor,
                      const BitTable& table, std::size_t words) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    f << claim << ' ' << bound << ' ' << cursor << '\n';
    f.write(reinterpret_cast<const char*>(table.words().data()),
            static_cast<std::streamsize>(words * sizeof(BitTable::Word)));
    if (!f) throw std::runtime_error("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Cursor restored from a matching checkpoint, or 0.
Integer read_checkpoint(const std::filesystem::path& path, const std::string& claim, Integer bound, BitTable& table) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return 0;
  std::string header;
  std::getline(f, header);
  std::istringstream in(header);
  std::string c;
  Integer b = 0, cursor = 0;
  if (!(in >> c >> b >> cursor) || c != claim || b != bound) return 0;
  if (cursor < 0 || cursor > bound + 1 || cursor % static_cast<Integer>(BitTable::kWordBits) != 0) {
    if (cursor != bound + 1) return 0;
  }
  const std::size_t words = (static_cast<std::size_t>(cursor) + BitTable::kWordBits - 1) / BitTable::kWordBits;
  f.read(reinterpret_cast<char*>(table.words().data()), static_cast<std::streamsize>(words * sizeof(BitTable::Word)));
  if (static_cast<std::size_t>(f.gcount()) != words * sizeof(BitTable::Word)) {
    std::fill(table.words().begin(), table.words().end(), 0);
    return 0;
  }
  return cursor;
}

int cmd_truant(const std::string& text, Integer cap, Session& s) {
  const PolygonalSum sum = parse_sum(text);
  const auto t = truant(sum, cap);
  nlohmann::json data{{"sum", sum.to_string()}, {"cap", cap}};
  if (t) data["truant"] = *t;
  else data["universal_to_cap"] = true;
  s.emit(record("truant", true, cap, data));
  return s.finish();
}

int cmd_represents(const std::string& text, Integer n, Session& s) {
  const PolygonalSum sum = parse_sum(text);
  if (n < 0) throw std::invalid_argument("n must be nonnegative");
  const auto w = represents(sum, n);
  nlohmann::json data{{"sum", sum.to_string()}, {"n", n}, {"represented", w.has_value()}};
  if (w) data["witness"] = w->assignment;
  s.emit(record("represents", w.has_value(), n, data));
  return s.finish();
}

int cmd_sieve(const std::string& text, Integer bound, bool unbounded_ok, const std::string& checkpoint,
              unsigned threads, Session& s, std::ostream& err) {
  const PolygonalSum sum = parse_sum(text);
  if (bound > kUncheckedSieveLimit && !unbounded_ok) {
    err << "error: sieve bound " << bound << " exceeds " << kUncheckedSieveLimit << "; pass --unbounded-ok\n";
    return kExitBudget;
  }
  const RepresentedSet set = checkpoint.empty() && bound <= kCheckpointWindow
                                 ? represented_set(sum, bound, threads)
                                 : checkpointed_sieve(sum, bound, checkpoint, kCheckpointWindow, threads);
  const std::vector<Integer> missed = set.missing(1);
  nlohmann::json data{{"sum", sum.to_string()}, {"missing_count", missed.size()}, {"missing", head(missed)}};
  if (!missed.empty()) data["first_missing"] = missed.front();
  s.emit(record("sieve", missed.empty(), bound, data));
  return s.finish();
}

int cmd_tree(Integer cap, bool prune, unsigned threads, Session& s) {
  const EscalatorNode tree = build_tree(cap, prune, threads);
  Integer universal = 0, pruned = 0, non_universal = 0;
  for_each_node(tree, [&](const EscalatorNode& n) {
    switch (n.status) {
      case NodeStatus::universal: ++universal; break;
      case NodeStatus::pruned: ++pruned; break;
      case NodeStatus::non_universal:
        ++non_universal;
        s.emit(record("tree/" + n.sum.to_string(), true, cap,
                      {{"depth", n.depth}, {"status", to_string(n.status)}, {"truant", n.truant}}));
        break;
    }
  });
  s.emit(record("tree", true, cap,
                {{"prune_euler", prune}, {"truants", truant_set(tree)}, {"universal_leaves", universal},
                 {"non_universal", non_universal}, {"pruned", pruned}}));
  return s.finish();
}

int cmd_reduce(const std::string& text, Session& s) {
  const PolygonalSum sum = parse_sum(text);
  require_tree_orders(sum);
  const CongruenceForm form = complete_squares(sum);
  const FormGeometry g = geometry(form);
  auto terms = nlohmann::json::array();
  for (const auto& t : form.terms)
    terms.push_back({{"coefficient", t.coefficient}, {"modulus", t.modulus}, {"residue", t.residue}});
  s.emit(record("reduce", true, 0,
                {{"sum", sum.to_string()}, {"sum_terms", terms_json(sum)}, {"Q", form.to_string()}, {"terms", terms}, {"mu", form.mu},
                 {"rho", form.rho}, {"D", g.discriminant}, {"N", g.level}}));
  return s.finish();
}

int cmd_local(const std::string& text, Integer n, std::optional<Integer> prime, Session& s) {
  const PolygonalSum sum = parse_sum(text);
  require_tree_orders(sum);
  if (n < 0) throw std::invalid_argument("n must be nonnegative");
  LocalDensityEngine engine(complete_squares(sum));
  const Integer target = engine.form().target(n);
  std::vector<Integer> primes;
  if (prime) {
    if (!is_prime(*prime)) throw std::invalid_argument("--prime must be prime");
    primes.push_back(*prime);
  } else {
    primes = engine.bad_primes();
    for (Integer p : prime_divisors(target))
      if (!std::ranges::binary_search(engine.bad_primes(), p)) primes.push_back(p);
    std::ranges::sort(primes);
  }
  auto rows = nlohmann::json::array();
  bool positive = true;
  for (Integer p : primes) {
    const LocalDensity d = engine.density(target, p);
    positive &= d.value > 0;
    const char* method = d.method == DensityMethod::closed_form ? "closed_form"
                         : d.method == DensityMethod::reduction ? "reduction"
                                                                 : "counting";
    rows.push_back({{"p", p}, {"beta", rational_text(d.value)}, {"approx", to_double(d.value)},
                    {"method", method}, {"stabilized_at", d.stabilized_at}});
  }
  s.emit(record("local", positive, n,
                {{"sum", sum.to_string()}, {"Q", engine.form().to_string()}, {"target", target}, {"densities", rows}}));
  return s.finish();
}

int cmd_constants(const std::string& text, double eps, std::optional<double> cg, const VerifyConfig& config,
                  Session& s) {
  const PolygonalSum sum = parse_sum(text);
  require_tree_orders(sum);
  if (!cg) {
    const auto it = config.cusp_constants.find(sum.to_string());
    if (it != config.cusp_constants.end()) cg = it->second;
  }
  const AnalyticProfile p = analytic_profile(complete_squares(sum), eps, cg);
  auto floors = nlohmann::json::object();
  for (const auto& [prime, f] : p.floors)
    floors[std::to_string(prime)] = {{"b_p", rational_text(f.value)},
                                     {"beta_min", rational_text(f.beta_min)},
                                     {"class_modulus", f.class_modulus},
                                     {"attained_at", f.attained_at},
                                     {"zero_classes", f.zero_classes}};
  nlohmann::json data{{"sum", sum.to_string()}, {"Q", p.form.to_string()}, {"D", p.geometry.discriminant},
                      {"N", p.geometry.level}, {"chi", p.character}, {"L2", p.l2.value},
                      {"L2_error", p.l2.error}, {"floors", floors}, {"C_E", p.c_e},
                      {"epsilon", p.epsilon}, {"C_eps", p.c_eps}};
  if (p.c_g) data["C_G"] = *p.c_g;
  if (p.crossover) data["crossover"] = *p.crossover;
  s.emit(record("constants", p.c_e > 0, p.crossover.value_or(0), data));
  return s.finish();
}

int cmd_crossover(double ce, double cg, double ceps, double eps, Session& s) {
  const Integer n0 = crossover_bound(ce, cg, ceps, eps);
  s.emit(record("crossover", true, n0, {{"C_E", ce}, {"C_G", cg}, {"C_eps", ceps}, {"epsilon", eps}, {"N0", n0}}));
  return s.finish();
}

int cmd_verify(const std::string& which, std::optional<Integer> bound, bool timing, const VerifyConfig& config,
               unsigned jobs, Session& s, std::ostream& err) {
  std::vector<std::string> ids;
  if (which == "all") {
    ids = claim_ids();
  } else {
    const auto all = claim_ids();
    // A prefix such as "exceptional" selects every claim under it.
    for (const auto& id : all)
      if (id == which || id.starts_with(which + "/")) ids.push_back(id);
    if (ids.empty()) throw UnknownClaimError("unknown claim id: " + which);
  }
  Verifier verifier(config);
  std::vector<std::optional<VerificationReport>> reports(ids.size());
  std::vector<std::exception_ptr> errors(ids.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      try {
        reports[i] = run_claim(ids[i], verifier, bound);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned j = 1; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    s.emit(reports[i]->to_json(timing));
    if (timing) err << ids[i] << ": " << (reports[i]->passed ? "pass" : "FAIL") << " in " << reports[i]->seconds << " s\n";
  }
  return s.finish();
}

}  // namespace

VerifyConfig load_config(const std::filesystem::path& path, VerifyConfig base) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "tree_cap") base.tree_cap = value.get<Integer>();
    else if (key == "quaternary_bound") base.quaternary_bound = value.get<Integer>();
    else if (key == "ternary_bound") base.ternary_bound = value.get<Integer>();
    else if (key == "construction_bound") base.construction_bound = value.get<Integer>();
    else if (key == "epsilon") base.epsilon = value.get<double>();
    else if (key == "threads") base.threads = value.get<unsigned>();
    else if (key == "seed") base.seed = value.get<std::uint64_t>();
    else if (key == "cusp_constants") {
      for (const auto& [sum, c] : value.items()) base.cusp_constants[parse_sum(sum).to_string()] = c.get<double>();
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  return base;
}

RepresentedSet checkpointed_sieve(const PolygonalSum& sum, Integer bound, const std::filesystem::path& checkpoint,
                                  Integer window, unsigned threads) {
  if (sum.size() < 2) return represented_set(sum, bound, threads);
  if (bound < 1 || window < 1) throw std::invalid_argument("bound and window must be positive");
  // Apply the term with the fewest values last, in windows.
  std::vector<Term> rest = sum.terms();
  const auto last = std::ranges::max_element(rest, {}, [](const Term& t) { return t.coefficient; });
  const Term final_term = *last;
  rest.erase(last);
  const RepresentedSet prefix = represented_set(PolygonalSum(rest), bound, threads);
  const std::vector<Integer> values = term_values(final_term, bound);

  const std::string claim = "sieve/" + sum.to_string();
  BitTable table(static_cast<std::size_t>(bound) + 1);
  Integer cursor = checkpoint.empty() ? 0 : read_checkpoint(checkpoint, claim, bound, table);
  const Integer step = std::max<Integer>(BitTable::kWordBits, window / BitTable::kWordBits * BitTable::kWordBits);
  while (cursor <= bound) {
    const Integer end = std::min(bound + 1, cursor + step);
    const std::size_t wlo = static_cast<std::size_t>(cursor) / BitTable::kWordBits;
    const std::size_t whi = (static_cast<std::size_t>(end) + BitTable::kWordBits - 1) / BitTable::kWordBits;
    for (Integer v : values) {
      if (v > end) break;
      table.or_shifted(prefix.table(), static_cast<std::size_t>(v), wlo, whi);
    }
    cursor = end;
    table.trim();
    if (!checkpoint.empty()) write_checkpoint(checkpoint, claim, bound, cursor, table, whi);
  }
  return RepresentedSet(sum, std::move(table));
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Escalator trees, quadratic-form reductions and verification for sums of triangular numbers and squares"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  unsigned threads = 0;
  app.add_option("--config", config_path, "JSON config with default bounds, epsilon and cusp constants");
  app.add_option("--threads", threads, "Worker threads (overrides the config)");

  std::string sum_text;
  Integer number = 0;
  Integer cap = 0;

  auto* truant_cmd = app.add_subcommand("truant", "Least positive integer a sum misses");
  truant_cmd->add_option("sum", sum_text)->required();
  truant_cmd->add_option("--cap", cap, "Search cap (default: config tree_cap)");

  auto* represents_cmd = app.add_subcommand("represents", "Witness that a sum takes a value");
  represents_cmd->add_option("sum", sum_text)->required();
  represents_cmd->add_option("n", number)->required();

  Integer bound = 0;
  bool unbounded_ok = false;
  std::string checkpoint;
  auto* sieve_cmd = app.add_subcommand("sieve", "Integers in [1, B] a sum misses");
  sieve_cmd->add_option("sum", sum_text)->required();
  sieve_cmd->add_option("--bound", bound)->required()->check(CLI::PositiveNumber);
  sieve_cmd->add_flag("--unbounded-ok", unbounded_ok, "Allow bounds above 10^6");
  sieve_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file, written every 10^7 integers and resumed");

  bool no_prune = false;
  auto* tree_cmd = app.add_subcommand("tree", "Build the escalator tree");
  tree_cmd->add_option("--cap", cap, "Classification cap (default: config tree_cap)");
  tree_cmd->add_flag("--no-prune-euler", no_prune, "Keep the P4+2P3 subtree");

  auto* reduce_cmd = app.add_subcommand("reduce", "Quadratic form with congruence conditions");
  reduce_cmd->add_option("sum", sum_text)->required();

  std::optional<Integer> prime;
  auto* local_cmd = app.add_subcommand("local", "Local densities at the target of n");
  local_cmd->add_option("sum", sum_text)->required();
  local_cmd->add_option("n", number)->required();
  local_cmd->add_option("--prime", prime);

  std::optional<double> eps;
  std::optional<double> cg;
  auto* constants_cmd = app.add_subcommand("constants", "Eisenstein and divisor-quotient constants");
  constants_cmd->add_option("sum", sum_text)->required();
  constants_cmd->add_option("--eps", eps);
  constants_cmd->add_option("--cg", cg, "Cusp constant (default: config cusp_constants)");

  double ce = 0, ceps = 0, cross_cg = 0, cross_eps = 0;
  auto* crossover_cmd = app.add_subcommand("crossover", "Least N0 past which the Eisenstein bound wins");
  crossover_cmd->add_option("--ce", ce)->required();
  crossover_cmd->add_option("--cg", cross_cg)->required();
  crossover_cmd->add_option("--ceps", ceps)->required();
  crossover_cmd->add_option("--eps", cross_eps)->required();

  std::string claim = "all";
  std::optional<Integer> verify_bound;
  bool timing = false;
  unsigned jobs = 1;
  bool list = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run registered claims");
  verify_cmd->add_option("claim", claim, "Claim id, id prefix, or all");
  verify_cmd->add_option("--bound", verify_bound, "Override the claim's default bound");
  verify_cmd->add_option("--jobs", jobs, "Claims run concurrently");
  verify_cmd->add_flag("--timing", timing, "Include wall time in records");
  verify_cmd->add_flag("--list", list, "Print claim ids and exit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  Session session(out, err);
  try {
    VerifyConfig config;
    if (!config_path.empty()) config = load_config(config_path, config);
    if (threads > 0) config.threads = threads;
    if (config.threads == 0) config.threads = 1;

    if (*truant_cmd) return cmd_truant(sum_text, cap > 0 ? cap : config.tree_cap, session);
    if (*represents_cmd) return cmd_represents(sum_text, number, session);
    if (*sieve_cmd) return cmd_sieve(sum_text, bound, unbounded_ok, checkpoint, config.threads, session, err);
    if (*tree_cmd) return cmd_tree(cap > 0 ? cap : config.tree_cap, !no_prune, config.threads, session);
    if (*reduce_cmd) return cmd_reduce(sum_text, session);
    if (*local_cmd) return cmd_local(sum_text, number, prime, session);
    if (*constants_cmd) return cmd_constants(sum_text, eps.value_or(config.epsilon), cg, config, session);
    if (*crossover_cmd) return cmd_crossover(ce, cross_cg, ceps, cross_eps, session);
    if (*verify_cmd) {
      if (list) {
        for (const auto& id : claim_ids()) out << id << '\n';
        return kExitPass;
      }
      return cmd_verify(claim, verify_bound, timing, config, jobs, session, err);
    }
  } catch (const ResourceLimitError& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}

}  // namespace trisq
