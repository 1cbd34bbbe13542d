#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "trisq/cli.hpp"
#include "trisq/expression.hpp"

using namespace trisq;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  std::vector<nlohmann::json> records() const {
    std::vector<nlohmann::json> r;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) r.push_back(nlohmann::json::parse(line));
    return r;
  }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "trisq-cli-test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"truant", "P3+P3"}).code == kExitPass);
  CHECK(run({"represents", "P4+P4", "3"}).code == kExitFail);
  CHECK(run({"represents", "P4+P4", "5"}).code == kExitPass);
  CHECK(run({"sieve", "P4+P4", "--bound", "10"}).code == kExitFail);
  CHECK(run({"sieve", "P3+P3+P3", "--bound", "1000"}).code == kExitPass);
  CHECK(run({"truant", "P2+P3"}).code == kExitUsage);
  CHECK(run({"bogus"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"verify", "no-such-claim"}).code == kExitUsage);
  CHECK(run({"sieve", "P3+P3", "--bound", "2000000"}).code == kExitBudget);
  CHECK(run({"local", "P3+P3+5P4+19P3", "1", "--prime", "2"}).code == kExitPass);
}

TEST_CASE("thin wrappers agree with the library") {
  const auto truant_rec = run({"truant", "P3+P3"}).records();
  REQUIRE(truant_rec.size() == 1);
  CHECK(truant_rec[0]["data"]["truant"] == *truant(parse_sum("P3+P3"), 1000));
  CHECK(truant_rec[0]["claim"] == "truant");

  const auto sieve_rec = run({"sieve", "P4+P4", "--bound", "10"}).records();
  CHECK(sieve_rec[0]["data"]["missing"] == nlohmann::json(represented_set(parse_sum("P4+P4"), 10).missing(1)));
  CHECK(sieve_rec[0]["status"] == "fail");

  const auto reduce_rec = run({"reduce", "P3+P3+5P4+19P3"}).records();
  CHECK(reduce_rec[0]["data"]["D"] == 3040);
  CHECK(reduce_rec[0]["data"]["N"] == 760);
  CHECK(reduce_rec[0]["data"]["mu"] == 8);
  CHECK(reduce_rec[0]["data"]["rho"] == 21);

  const auto cross = run({"crossover", "--ce", "0.236", "--cg", "12.645", "--ceps", "0.482", "--eps", "0.25"});
  CHECK(cross.records()[0]["data"]["N0"] == 152'700'047);

  const auto tree = run({"tree", "--cap", "1000"}).records();
  CHECK(tree.back()["claim"] == "tree");
  CHECK(tree.size() > 1);

  const auto rep = run({"represents", "P3+P4+6P4", "28"}).records();
  CHECK(rep[0]["data"]["represented"] == true);
  CHECK(rep[0]["data"]["witness"].size() == 3);
}

TEST_CASE("options are accepted after the subcommand") {
  const auto a = run({"--threads", "2", "sieve", "P3+P3", "--bound", "100"});
  const auto b = run({"sieve", "P3+P3", "--bound", "100", "--threads", "2"});
  CHECK(a.code == b.code);
  CHECK(a.out == b.out);
}

TEST_CASE("config files") {
  const fs::path good = scratch("good.json");
  write_file(good, R"({"tree_cap": 500, "epsilon": 0.3, "cusp_constants": {"19P3 + P3+P3+5P4": 10.0}})");
  const VerifyConfig c = load_config(good);
  CHECK(c.tree_cap == 500);
  CHECK(c.epsilon == doctest::Approx(0.3));
  CHECK(c.cusp_constants.at("P3+P3+5P4+19P3") == doctest::Approx(10.0));
  CHECK(c.quaternary_bound == VerifyConfig{}.quaternary_bound);

  const fs::path bad = scratch("bad.json");
  write_file(bad, R"({"tree_cap": 500, "colour": "blue"})");
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains("unknown config key: colour"), std::invalid_argument);
  CHECK(run({"--config", bad.string(), "truant", "P3+P3"}).code == kExitUsage);
  CHECK(run({"--config", (fs::temp_directory_path() / "trisq-missing.json").string(), "truant", "P3"}).code ==
        kExitUsage);

  const auto with_cap = run({"--config", good.string(), "truant", "P3+P3+P3"}).records();
  CHECK(with_cap[0]["bound"] == 500);
}

TEST_CASE("checkpointed sieve matches the direct sieve and resumes") {
  const PolygonalSum sum = parse_sum("P3+P4+7P4+7P4+21P3");
  const Integer bound = 20'000;
  const RepresentedSet direct = represented_set(sum, bound);
  const fs::path ckpt = scratch("sieve.ckpt");

  const RepresentedSet windowed = checkpointed_sieve(sum, bound, ckpt, 1000, 2);
  CHECK(windowed.missing(0) == direct.missing(0));
  CHECK(windowed.count() == direct.count());
  REQUIRE(fs::exists(ckpt));

  // A completed checkpoint is reused as is.
  CHECK(checkpointed_sieve(sum, bound, ckpt, 1000).missing(0) == direct.missing(0));

  // Roll the cursor back and keep only the words before it: the rest is recomputed.
  {
    std::ifstream in(ckpt, std::ios::binary);
    std::string header;
    std::getline(in, header);
    std::vector<char> words((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t cursor = 64 * 100;
    words.resize(cursor / 8);
    std::ofstream out(ckpt, std::ios::binary | std::ios::trunc);
    out << "sieve/" << sum.to_string() << ' ' << bound << ' ' << cursor << '\n';
    out.write(words.data(), static_cast<std::streamsize>(words.size()));
  }
  CHECK(checkpointed_sieve(sum, bound, ckpt, 1000).missing(0) == direct.missing(0));

  // A checkpoint for another bound is ignored.
  CHECK(checkpointed_sieve(sum, 5000, ckpt, 700).missing(0) == represented_set(sum, 5000).missing(0));

  // The CLI path through a checkpoint reports the same set.
  const fs::path cli_ckpt = scratch("cli.ckpt");
  const auto rec = run({"sieve", sum.to_string(), "--bound", "20000", "--checkpoint", cli_ckpt.string()}).records();
  CHECK(rec[0]["data"]["missing"] == nlohmann::json(direct.missing(1)));
}

TEST_CASE("verify output is identical across job counts") {
  const std::vector<std::string> base{"verify", "exceptional", "--bound", "5000"};
  auto one = base, four = base;
  one.insert(one.end(), {"--jobs", "1"});
  four.insert(four.end(), {"--jobs", "4", "--threads", "2"});
  const Run a = run(one), b = run(four);
  CHECK(a.code == kExitPass);
  CHECK(a.out == b.out);
  CHECK(a.records().size() == 14);
  CHECK(a.err.find("summary: 14 pass, 0 fail") != std::string::npos);

  const Run list = run({"verify", "--list"});
  CHECK(list.code == kExitPass);
  std::size_t lines = 0;
  for (char ch : list.out) lines += ch == '\n';
  CHECK(lines == claim_ids().size());

  const Run timed = run({"verify", "exceptional/P3+P4+5P4+5P4", "--bound", "2000", "--timing"});
  CHECK(timed.records()[0].contains("seconds"));
}
