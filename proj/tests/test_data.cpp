#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fairaudit/csv.hpp"
#include "fairaudit/groups.hpp"
#include "fairaudit/preprocess.hpp"
#include "fairaudit/records.hpp"
#include "support.hpp"

using namespace fairaudit;

namespace {

const char* kHeader =
    "patient_id,note_id,subsequence_index,task_id,split,probability,label,gender,language,"
    "ethnicity,insurance\n";

std::vector<PredictionRecord> parse_csv(const std::string& body) {
  std::istringstream in(kHeader + body);
  return parse_predictions(in, FileFormat::Csv);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

Tokens make_tokens(std::size_t n, std::size_t start = 0) {
  Tokens t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(start + i));
  return t;
}

}  // namespace

TEST_CASE("load_predictions keeps row order") {
  const auto rows = parse_csv(
      "p1,n1,0,PA-Mortality,test,0.25,1,M,English,White,Medicare\n"
      "p2,n2,0,PA-Mortality,test,0.75,0,F,Spanish,Black,Private\n"
      "p3,n3,1,PA-Mortality,validation,0.5,1,F,,Asian,Medicaid\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].patient_id == "p1");
  CHECK(rows[1].patient_id == "p2");
  CHECK(rows[2].patient_id == "p3");
  CHECK(rows[2].subsequence_index == 1);
  CHECK(rows[2].split == Split::Validation);
  CHECK(rows[1].probability == 0.75);
  CHECK(rows[2].attribute("language") == "UNKNOWN");
}

TEST_CASE("probability out of range is a malformed row naming row and field") {
  try {
    parse_csv("p1,n1,0,T,test,0.5,1,M,English,White,Medicare\n"
              "p2,n2,0,T,test,1.2,1,M,English,White,Medicare\n");
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRow);
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("probability") != std::string::npos);
  }
}

TEST_CASE("bad labels and splits are malformed rows") {
  CHECK(code_of([] { parse_csv("p1,n1,0,T,test,0.5,2,M,English,White,Medicare\n"); }) ==
        ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_csv("p1,n1,0,T,holdout,0.5,1,M,English,White,Medicare\n"); }) ==
        ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_csv("p1,n1,-1,T,test,0.5,1,M,English,White,Medicare\n"); }) ==
        ErrorCode::MalformedRow);
}

TEST_CASE("a patient in two splits is a split leak") {
  CHECK(code_of([] {
          parse_csv("p1,n1,0,T,validation,0.5,1,M,English,White,Medicare\n"
                    "p1,n2,0,T,test,0.5,1,M,English,White,Medicare\n");
        }) == ErrorCode::SplitLeak);
}

TEST_CASE("repeated key is a duplicate") {
  CHECK(code_of([] {
          parse_csv("p1,n1,0,T,test,0.5,1,M,English,White,Medicare\n"
                    "p1,n1,0,T,test,0.4,1,M,English,White,Medicare\n");
        }) == ErrorCode::DuplicateKey);
}

TEST_CASE("missing file reports the path") {
  try {
    load_predictions("/nonexistent/preds.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find("/nonexistent/preds.csv") != std::string::npos);
  }
}

TEST_CASE("csv and jsonl round trip") {
  CohortSpec spec;
  spec.tasks = 2;
  spec.planted = {1};
  spec.validation_patients = 20;
  spec.cell_positives = 1;
  spec.cell_negatives = 1;
  const auto records = synthesize_cohort(spec);
  for (auto format : {FileFormat::Csv, FileFormat::Jsonl}) {
    std::stringstream buf;
    write_predictions(buf, records, format);
    const auto back = parse_predictions(buf, format);
    CHECK(back == records);
    std::stringstream again;
    write_predictions(again, back, format);
    CHECK(again.str() == buf.str());
  }
}

TEST_CASE("csv quoting round trips embedded commas, quotes and newlines") {
  const csv::Row row{"plain", "a,b", "say \"hi\"", "two\nlines", ""};
  std::stringstream buf;
  csv::write_row(buf, row);
  csv::Reader reader(buf);
  const auto back = reader.next();
  REQUIRE(back);
  CHECK(*back == row);
  CHECK_FALSE(reader.next());
}

TEST_CASE("normalize_phi examples") {
  CHECK(normalize_phi("seen on [**2126-9-19**]") == "seen on [DEID_DATE]");
  CHECK(normalize_phi("no spans here") == "no spans here");
  CHECK(normalize_phi("[**Hospital1 23**] and [**2126-9-19**]") == "[DEID_OTHER] and [DEID_DATE]");
  CHECK(normalize_phi("Dr. [**Last Name (NamePattern1) 123**]") == "Dr. [DEID_NAME]");
  CHECK(normalize_phi("at [**Hospital 12**]") == "at [DEID_LOC]");
  CHECK(normalize_phi("call [**Telephone/Fax (1) 555**]") == "call [DEID_CONTACT]");
  CHECK(normalize_phi("mrn [**12345**]") == "mrn [DEID_CONTACT]");
}

TEST_CASE("normalize_phi is idempotent") {
  std::mt19937_64 engine(11);
  const std::vector<std::string> pieces{"pt ", "[**2126-9-19**]", " seen ", "[**Name 3**]",
                                        "[**", "**]", "[**Hospital 4**]", "x", "[**42**]",
                                        "[** unterminated", " ** ]"};
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const auto parts = engine() % 8;
    for (std::uint64_t k = 0; k < parts; ++k) text += pieces[engine() % pieces.size()];
    const auto once = normalize_phi(text);
    CHECK(normalize_phi(once) == once);
  }
}

TEST_CASE("aggregate_sentences examples") {
  auto lengths = [](const std::vector<Tokens>& groups) {
    std::vector<std::size_t> out;
    for (const auto& g : groups) out.push_back(g.size());
    return out;
  };
  std::vector<Tokens> s{make_tokens(5), make_tokens(8), make_tokens(9), make_tokens(30)};
  CHECK(lengths(aggregate_sentences(s, 20)) == std::vector<std::size_t>{22, 30});
  std::vector<Tokens> one{make_tokens(25)};
  CHECK(aggregate_sentences(one, 20) == one);
  std::vector<Tokens> tail{make_tokens(3), make_tokens(4)};
  CHECK(lengths(aggregate_sentences(tail, 20)) == std::vector<std::size_t>{7});
  CHECK(aggregate_sentences(std::vector<Tokens>{}, 20).empty());
}

TEST_CASE("aggregate_sentences preserves tokens and the length floor") {
  std::mt19937_64 engine(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Tokens> sentences;
    std::size_t next = 0;
    const auto count = engine() % 12;
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto len = 1 + engine() % 25;
      sentences.push_back(make_tokens(len, next));
      next += len;
    }
    const std::size_t floor = 1 + engine() % 30;
    const auto groups = aggregate_sentences(sentences, floor);
    Tokens flat_in, flat_out;
    for (const auto& s : sentences) flat_in.insert(flat_in.end(), s.begin(), s.end());
    for (const auto& g : groups) flat_out.insert(flat_out.end(), g.begin(), g.end());
    REQUIRE(flat_out == flat_in);
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) REQUIRE(groups[g].size() >= floor);
  }
}

TEST_CASE("window_note examples") {
  const auto t1024 = make_tokens(1024);
  auto w = window_note(t1024, {512, 512, 10});
  REQUIRE(w.size() == 2);
  CHECK(w[0].size() == 512);
  CHECK(w[1].size() == 512);

  const auto t100 = make_tokens(100);
  w = window_note(t100, {512, 512, 10});
  REQUIRE(w.size() == 1);
  CHECK(w[0].size() == 100);

  const auto t10k = make_tokens(10000);
  w = window_note(t10k, {512, 512, 10});
  REQUIRE(w.size() == 10);
  CHECK(w.back().back() == "w5119");
}

TEST_CASE("window_note matches a direct index-set oracle") {
  std::mt19937_64 engine(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = engine() % 400;
    const std::size_t window = 1 + engine() % 64;
    const std::size_t stride = 1 + engine() % window;
    const std::size_t max_windows = 1 + engine() % 12;
    const auto tokens = make_tokens(n);
    const auto windows = window_note(tokens, {window, stride, max_windows});

    // Oracle: starts 0, stride, ... while the previous window did not reach
    // the end, capped at max_windows.
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; starts.size() < max_windows; s += stride) {
      if (s >= n && !starts.empty()) break;
      starts.push_back(s);
      if (s + window >= n) break;
    }
    if (n == 0) starts.clear();
    REQUIRE(windows.size() == starts.size());
    std::set<std::size_t> covered;
    for (std::size_t k = 0; k < windows.size(); ++k) {
      const auto end = std::min(n, starts[k] + window);
      REQUIRE(windows[k] == Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(starts[k]),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(end)));
      for (auto i = starts[k]; i < end; ++i) covered.insert(i);
    }
    const auto reach = std::min(n, (max_windows - 1) * stride + window);
    for (std::size_t i = 0; i < reach; ++i) REQUIRE(covered.contains(i));
  }
}

TEST_CASE("select_backward") {
  std::vector<int> forty(40);
  std::iota(forty.begin(), forty.end(), 0);
  const auto last30 = select_backward<int>(forty, 30);
  REQUIRE(last30.size() == 30);
  CHECK(last30.front() == 10);
  CHECK(last30.back() == 39);
  std::vector<int> five{1, 2, 3, 4, 5};
  CHECK(select_backward<int>(five, 30) == five);
  CHECK(select_backward<int>(five, 1) == std::vector<int>{5});

  std::mt19937_64 engine(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> x(engine() % 50);
    std::iota(x.begin(), x.end(), 0);
    const std::size_t limit = 1 + engine() % 60;
    const auto got = select_backward<int>(x, limit);
    const auto take = std::min(limit, x.size());
    REQUIRE(got == std::vector<int>(x.end() - static_cast<std::ptrdiff_t>(take), x.end()));
  }
}

TEST_CASE("patient_subsequences orders notes by chart time and keeps the tail") {
  std::vector<NoteDocument> notes;
  for (int i = 0; i < 5; ++i) {
    NoteDocument n;
    n.note_id = "n" + std::to_string(i);
    n.chart_order = 4 - i;  // reverse chronological input
    n.tokens = make_tokens(10, static_cast<std::size_t>(100 * (4 - i)));
    notes.push_back(n);
  }
  const auto subs = patient_subsequences(notes, {4, 4, 10}, 7);
  REQUIRE(subs.size() == 7);
  CHECK(subs.back().back() == "w409");
  CHECK(subs.front().front() == "w208");
}

TEST_CASE("filter_groups") {
  std::vector<PredictionRecord> rows(10);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].patient_id = "p" + std::to_string(i);
    rows[i].attributes = {{"ethnicity", i < 2 ? "UNKNOWN" : "White"},
                          {"insurance", std::vector<std::string>{"Medicare", "Medicaid", "Private",
                                                                 "Self Pay", "Government"}[i % 5]}};
  }
  GroupPolicy eth;
  eth.attribute = "ethnicity";
  eth.drop_values = {"UNKNOWN"};
  CHECK(filter_groups(rows, eth).size() == 8);

  GroupPolicy empty;
  empty.attribute = "ethnicity";
  CHECK(filter_groups(rows, empty) == rows);

  GroupPolicy ins;
  ins.attribute = "insurance";
  ins.drop_values = {"Self Pay", "Government"};
  const auto kept = filter_groups(rows, ins);
  CHECK(kept.size() == 6);
  for (const auto& r : kept) {
    const auto& v = r.attribute("insurance");
    CHECK((v == "Medicare" || v == "Medicaid" || v == "Private"));
    CHECK(r.attributes.at("ethnicity") == rows[std::stoul(r.patient_id.substr(1))].attributes.at("ethnicity"));
  }

  GroupPolicy lang;
  lang.attribute = "language";
  CHECK(code_of([&] { filter_groups(rows, lang); }) == ErrorCode::UnknownAttribute);

  GroupPolicy overlap;
  overlap.attribute = "ethnicity";
  overlap.drop_values = {"UNKNOWN"};
  overlap.collapse_map = {{"UNKNOWN", "Other"}};
  CHECK(code_of([&] { validate_policy(overlap); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("collapse map recodes values") {
  std::vector<PredictionRecord> rows(3);
  const char* langs[] = {"English", "Spanish", "Portuguese"};
  for (int i = 0; i < 3; ++i) rows[i].attributes = {{"language", langs[i]}};
  const auto out = filter_groups(rows, default_policy("language"));
  REQUIRE(out.size() == 3);
  CHECK(out[0].attribute("language") == "English");
  CHECK(out[1].attribute("language") == "Other");
  CHECK(out[2].attribute("language") == "Other");
}
