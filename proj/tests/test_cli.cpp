#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fmt/format.h>

#include "support.hpp"

using testing::quoted;
using testing::run_cli;
using testing::slurp;
using testing::spit;

namespace {

const char* kHeader = "patient_id,note_id,subsequence_index,task_id,split,probability,label,gender,language,ethnicity,insurance\n";

// Probe inputs: two templates, one attribute, a table where he doubles and
// she halves the prior.
void write_probe_inputs(const testing::TempDir& dir) {
  spit(dir / "t.json",
       R"({"topic":"HIV","templates":["[TGT] has [ATTR]","pt [TGT] with [ATTR]"],)"
       R"("attributes":["hiv"],"male_words":["he"],"female_words":["she"]})");
  fairaudit::TableOracle table;
  for (const std::string text : {"[MASK] has hiv", "pt [MASK] with hiv"}) {
    for (const std::string word : {"he", "she"}) {
      table.set(fairaudit::ScoringMode::Masked, 0, text, word, 0.2);
      table.set(fairaudit::ScoringMode::PseudoLikelihood, 0, text, word, word == "he" ? 0.4 : 0.1);
    }
  }
  table.set(fairaudit::ScoringMode::Masked, 0, "pt is [MASK]", "a", 0.5);
  table.set(fairaudit::ScoringMode::Masked, 0, "pt is [MASK]", "b", 0.3);
  table.set(fairaudit::ScoringMode::Masked, 0, "pt is [MASK]", "c", 0.2);
  table.save(dir / "tab.json");
}

}  // namespace

TEST_CASE("missing input file exits 2 and names the path") {
  testing::TempDir dir("cli_missing");
  const auto r = run_cli("audit --predictions " + quoted(dir / "nope.csv") + " --out " + quoted(dir / "out"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("nope.csv") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("malformed rows exit 2 with the row number") {
  testing::TempDir dir("cli_malformed");
  spit(dir / "p.csv", std::string(kHeader) + "P1,N1,0,T,test,banana,1,M,English,White,Medicare\n");
  const auto r = run_cli("audit --predictions " + quoted(dir / "p.csv") + " --out " + quoted(dir / "out"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("row 1") != std::string::npos);
}

TEST_CASE("bad configuration exits 1 without outputs") {
  testing::TempDir dir("cli_config");
  const auto cohort = quoted(testing::source_dir() / "data/cohort/cohort.csv");
  spit(dir / "bad.json", "{bad");
  auto r = run_cli("audit --config " + quoted(dir / "bad.json") + " --predictions " + cohort + " --out " +
                   quoted(dir / "out"));
  CHECK(r.exit_code == 1);
  r = run_cli("audit --predictions " + cohort + " --bootstrap-b 0 --out " + quoted(dir / "out"));
  CHECK(r.exit_code == 1);
  r = run_cli("audit --predictions " + cohort + " --gaps fairness --out " + quoted(dir / "out"));
  CHECK(r.exit_code == 1);
  r = run_cli("probe --templates " + quoted(dir / "bad.json") + " --mode sideways --out " + quoted(dir / "out"));
  CHECK(r.exit_code == 1);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("oracle death exits 3 and writes nothing") {
  testing::TempDir dir("cli_oracle");
  write_probe_inputs(dir);
  const auto server = testing::cli_path().string() + " serve-table --fail-after 1 --table " + (dir / "tab.json").string();
  const auto r = run_cli("probe --templates " + quoted(dir / "t.json") + " --oracle-cmd " + testing::quoted(server) +
                         " --out " + quoted(dir / "out"));
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("OracleFailure") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("probe writes table-shaped reports and is byte-stable") {
  testing::TempDir dir("cli_probe");
  write_probe_inputs(dir);
  const auto args = "probe --templates " + quoted(dir / "t.json") + " --oracle-table " + quoted(dir / "tab.json");
  REQUIRE(run_cli(args + " --out " + quoted(dir / "a")).exit_code == 0);
  REQUIRE(run_cli(args + " --out " + quoted(dir / "b")).exit_code == 0);
  const auto md = slurp(dir / "a/probe.md");
  CHECK(md == slurp(dir / "b/probe.md"));
  CHECK(slurp(dir / "a/probe.csv") == slurp(dir / "b/probe.csv"));
  CHECK(md.find("| HIV | 0.693 | -0.693 | 4 | n/a | [GEND] has hiv |") != std::string::npos);

  // The same table served by a child process gives the same bytes.
  const auto server = testing::cli_path().string() + " serve-table --table " + (dir / "tab.json").string();
  REQUIRE(run_cli("probe --templates " + quoted(dir / "t.json") + " --oracle-cmd " + testing::quoted(server) + " --out " +
                  quoted(dir / "c"))
              .exit_code == 0);
  CHECK(slurp(dir / "c/probe.md") == md);
}

TEST_CASE("fill ranks completions") {
  testing::TempDir dir("cli_fill");
  write_probe_inputs(dir);
  const auto r = run_cli("fill --text 'pt is [MASK]' --k 2 --candidates a b c --oracle-table " +
                         quoted(dir / "tab.json") + " --out " + quoted(dir / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(dir / "out/fill.txt") == "a\t-0.693147\nb\t-1.203973\n");
}

TEST_CASE("merge with a fixed scaling factor") {
  testing::TempDir dir("cli_merge");
  spit(dir / "s.csv", std::string(kHeader) +
                          "P1,N1,0,T,test,0.5,1,M,English,White,Medicare\n"
                          "P1,N1,1,T,test,0.7,1,M,English,White,Medicare\n"
                          "P2,N2,0,T,test,0.2,0,F,English,White,Medicare\n");
  const auto r = run_cli("merge --predictions " + quoted(dir / "s.csv") + " --c 2 --out " + quoted(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const auto notes = slurp(dir / "out/notes.csv");
  CHECK(notes.find("P1,N1,0,T,test,0.6499999999999999,1") != std::string::npos);
  CHECK(notes.find("P2,N2,0,T,test,0.2,0") != std::string::npos);
  const auto scaling = nlohmann::json::parse(slurp(dir / "out/scaling.json"));
  CHECK(scaling["T"] == 2.0);
}

TEST_CASE("merge tunes the scaling factor on validation notes") {
  testing::TempDir dir("cli_tune");
  // Validation notes where only c = 4 separates the classes perfectly.
  const std::vector<std::pair<std::vector<double>, int>> notes{
      {{0.71, 0.15}, 1}, {{0.71, 0.15}, 1}, {{0.59}, 0}, {{0.94, 0.07, 0.07, 0.07}, 0}, {{0.3}, 0}, {{0.2, 0.1}, 0}};
  std::string csv = kHeader;
  for (std::size_t i = 0; i < notes.size(); ++i) {
    for (std::size_t j = 0; j < notes[i].first.size(); ++j) {
      csv += fmt::format("V{0},V{0}-n,{1},T,validation,{2},{3},M,English,White,Medicare\n", i, j, notes[i].first[j],
                         notes[i].second);
    }
  }
  spit(dir / "s.csv", csv);
  const auto r = run_cli("merge --predictions " + quoted(dir / "s.csv") + " --tune --out " + quoted(dir / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "out/scaling.json"))["T"] == 4.0);
}

TEST_CASE("report over no estimates still writes headers") {
  testing::TempDir dir("cli_report");
  spit(dir / "gaps.csv", "task,attribute,subgroup,gap_kind,value,ci_low,ci_high,significant,favored,p_value,significant_bh\n");
  const auto r = run_cli("report --inputs " + quoted(dir / "gaps.csv") + " --out " + quoted(dir / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(dir / "out/report.md").find("| Task | Attribute |") != std::string::npos);
}

TEST_CASE("audit is byte-stable across runs and thread counts") {
  testing::TempDir dir("cli_audit");
  const auto base = "audit --predictions " + quoted(testing::source_dir() / "data/cohort/cohort.csv") +
                    " --bootstrap-b 200 --seed 7";
  REQUIRE(run_cli(base + " --out " + quoted(dir / "a")).exit_code == 0);
  REQUIRE(run_cli(base + " --threads 3 --out " + quoted(dir / "b")).exit_code == 0);
  for (const auto* file : {"gaps.csv", "gaps.md", "summary.csv", "summary.md", "summary_bh.csv"}) {
    CAPTURE(file);
    CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
  }
  // Rerunning into an existing directory replaces its contents.
  REQUIRE(run_cli(base + " --out " + quoted(dir / "a")).exit_code == 0);
  CHECK(slurp(dir / "a/gaps.csv") == slurp(dir / "b/gaps.csv"));
}

TEST_CASE("bundled cohort matches the generator") {
  testing::TempDir dir("cli_cohort");
  REQUIRE(run_cli("synth-cohort --out " + quoted(dir.path())).exit_code == 0);
  CHECK(slurp(dir / "cohort.csv") == slurp(testing::source_dir() / "data/cohort/cohort.csv"));
}
