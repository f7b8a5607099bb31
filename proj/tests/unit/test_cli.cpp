#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "synthetic_corpus.hpp"
#include "temp_dir.hpp"

namespace gt = gradrules::testing;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const gt::TempDir& dir, const std::string& args) {
  const auto log = dir / "cli.out";
  const std::string cmd = std::string("\"") + GRADRULES_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  gt::TempDir dir("gradrules-cli");
  CHECK(run(dir, "").code == 1);
  CHECK(run(dir, "explain --bogus").code == 1);
  CHECK(run(dir, "explain --selector bogus --out x").code == 1);
  CHECK(run(dir, "explain --corpus c").code == 1);
  CHECK(run(dir, "explain --k 0 --out x").code == 1);
  CHECK(run(dir, "--help").code == 0);
}

TEST_CASE("runtime errors exit with 2") {
  gt::TempDir dir("gradrules-cli");
  const auto r = run(dir, "featurize --corpus " + (dir / "absent").string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(run(dir, "render " + (dir / "missing.json").string()).code == 2);
}

TEST_CASE("explain, render, induce and consistency on a synthetic corpus") {
  gt::TempDir dir("gradrules-cli");
  gt::SyntheticCorpusOptions o;
  o.docs_per_class = 40;
  const auto classes = gt::write_synthetic_corpus(dir / "corpus", o);
  std::ofstream(dir / "run.cfg") << "hidden_layers=32,32\nlearning_rate=0.01\nepochs=30\n";
  const auto out = dir / "out";
  const std::string common =
      " --config " + (dir / "run.cfg").string() + " --corpus " + (dir / "corpus").string() + " --out " + out.string();

  const auto e = run(dir, "explain --seeds 2 --selector sa" + common);
  REQUIRE_MESSAGE(e.code == 0, e.out);
  CHECK(e.out.find("fidelity of the best rule-sets:") != std::string::npos);
  CHECK(e.out.find("rule match") != std::string::npos);

  const auto rules = out / "rules" / (classes[0] + ".json");
  const auto r = run(dir, "render " + rules.string());
  REQUIRE(r.code == 0);
  CHECK((r.out.rfind("if (", 0) == 0 || r.out.rfind("else:", 0) == 0));

  const auto c = run(dir, "consistency" + common + " " + rules.string() + " " + rules.string());
  REQUIRE_MESSAGE(c.code == 0, c.out);
  CHECK(c.out.find("rule match 100%") != std::string::npos);
  CHECK(c.out.find("classification overlap 100%") != std::string::npos);

  const auto i = run(dir, "induce --min-cover 3 --selector sa" + common);
  REQUIRE_MESSAGE(i.code == 0, i.out);
  CHECK(i.out.find("fidelity:") != std::string::npos);
}
