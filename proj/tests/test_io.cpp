#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "stpca/error.hpp"
#include "stpca/io.hpp"

using namespace stpca;
namespace fs = std::filesystem;

namespace {

std::string patient_rows(const std::string& id, int hours, int indicators, int firstHour = 0) {
  std::ostringstream os;
  for (int h = 0; h < hours; ++h)
    for (int i = 0; i < indicators; ++i) os << id << "," << firstHour + h << ",ind" << i << "," << (h + 1) * (i + 1) << "\n";
  return os.str();
}

std::string bounds_rows(int indicators) {
  std::ostringstream os("indicator,lb,ub\n", std::ios::ate);
  for (int i = 0; i < indicators; ++i) os << "ind" << i << ",0,100\n";
  return os.str();
}

PatientLoadResult load(const std::string& obs, const std::string& bounds, const std::string& events) {
  std::istringstream o("subject_id,hour,indicator,value\n" + obs), b(bounds), e("subject_id,discharge_hour,outcome\n" + events);
  return read_patient_records(o, b, e);
}

}  // namespace

TEST_CASE("double formatting round-trips bit-exactly") {
  std::mt19937_64 rng(83);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int k = 0; k < 2000; ++k) {
    double v;
    const std::uint64_t b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(*parse_double(format_double(v)) == v);
  }
  CHECK_FALSE(parse_double("abc").has_value());
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK_FALSE(parse_double("").has_value());
}

TEST_CASE("series CSV round trip and errors") {
  std::istringstream in("var,t1,t2,t3\na,1,2,3\nb,4,5,6\n");
  SeriesMatrix X = read_series_csv(in);
  CHECK(X.values() == Eigen::MatrixXd{{1, 2, 3}, {4, 5, 6}});
  CHECK(X.variableNames() == std::vector<std::string>{"a", "b"});

  std::mt19937_64 rng(89);
  SeriesMatrix R(oracle::random_matrix(rng, 4, 9) * 1e3, {"w", "x", "y", "z"}, {0.5, 1, 2, 3, 5, 8, 13, 21, 34});
  std::stringstream buf;
  write_series_csv(buf, R);
  SeriesMatrix back = read_series_csv(buf);
  CHECK(back.values() == R.values());
  CHECK(back.timeIndex() == R.timeIndex());
  CHECK(back.variableNames() == R.variableNames());

  std::istringstream bad("var,t1,t2\nx,1,abc\n");
  try {
    read_series_csv(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == 3);
  }
  std::istringstream ragged("var,t1,t2\nx,1,2\ny,3\n");
  CHECK_THROWS_AS(read_series_csv(ragged), ParseError);
  std::istringstream empty("var,t1,t2\n");
  CHECK_THROWS_AS(read_series_csv(empty), InsufficientSamplesError);
  CHECK_THROWS_AS(load_series_csv("/nonexistent/x.csv"), IoError);
}

TEST_CASE("matrix and sweep CSV round trips") {
  std::mt19937_64 rng(97);
  Eigen::MatrixXd M = oracle::random_matrix(rng, 7, 3);
  std::stringstream buf;
  write_matrix_csv(buf, M, {"a", "b", "c"});
  CHECK(read_matrix_csv(buf) == M);

  FluctuationSweep s;
  s.positions = {0, 3, 6};
  s.fl = {0.1, 1.0 / 3.0, 2.5e-17};
  std::stringstream sb;
  write_sweep_csv(sb, s);
  CHECK(sb.str().rfind("position,fl\n", 0) == 0);
  FluctuationSweep t = read_sweep_csv(sb);
  CHECK(t.positions == s.positions);
  CHECK(t.fl == s.fl);

  const fs::path dir = fs::temp_directory_path() / "stpca_io_test";
  fs::create_directories(dir);
  write_series_csv(dir / "s.csv", SeriesMatrix(M.transpose()));
  CHECK(load_series_csv(dir / "s.csv").values() == M.transpose());
  {
    std::ofstream f(dir / "c.csv");
    write_matrix_csv(f, M);
  }
  CHECK(load_curve_csv(dir / "c.csv").points() == M);
  fs::remove_all(dir);
}

TEST_CASE("patient records: pivot, inclusion rule, fill policy") {
  std::string obs = patient_rows("a", 12, 6) + patient_rows("b", 8, 6) + patient_rows("c", 12, 4);
  PatientLoadResult r = load(obs, bounds_rows(6), "a,9,survived\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].subjectId == "a");
  CHECK(r.records[0].indicators.variables() == 6);
  CHECK(r.records[0].indicators.timePoints() == 12);
  CHECK(r.records[0].dischargeHour == 9);
  CHECK(r.records[0].outcome == Outcome::kSurvived);
  REQUIRE(r.dropped.size() == 2);
  CHECK(r.dropped[0].subjectId == "b");
  CHECK(r.dropped[0].reason == "min time points");
  CHECK(r.dropped[1].reason == "min indicators");

  // ind0 missing at hours 0 and 5: back-filled from hour 1, forward-filled from hour 4.
  std::string gappy;
  for (int h = 0; h < 12; ++h)
    for (int i = 0; i < 5; ++i) {
      if (i == 0 && (h == 0 || h == 5)) continue;
      gappy += "g," + std::to_string(h) + ",ind" + std::to_string(i) + "," + std::to_string(10 * h + i) + "\n";
    }
  PatientLoadResult gr = load(gappy, bounds_rows(5), "");
  REQUIRE(gr.records.size() == 1);
  const auto& rec = gr.records[0];
  const Eigen::Index row = rec.indicatorRow("ind0");
  CHECK(rec.indicators.values()(row, 0) == 10.0);
  CHECK(rec.indicators.values()(row, 5) == 40.0);
  CHECK_FALSE(rec.dischargeHour.has_value());
}

TEST_CASE("patient records: hard errors") {
  std::string obs = patient_rows("a", 12, 6);
  CHECK_THROWS_AS(load(obs + "a,3,ind2,7\n", bounds_rows(6), ""), InvalidDataError);
  try {
    load(obs + "a,3,ind2,7\n", bounds_rows(6), "");
  } catch (const InvalidDataError& e) {
    CHECK(std::string(e.what()).find("(a, 3, ind2)") != std::string::npos);
  }
  CHECK_THROWS_AS(load(obs, bounds_rows(6) + "mystery,0,1\n", ""), InvalidDataError);
  CHECK_THROWS_AS(load(obs, "indicator,lb,ub\nind0,5,1\n", ""), InvalidDataError);
  CHECK_THROWS_AS(load(obs, bounds_rows(6), "a,4,maybe\n"), ParseError);
}

TEST_CASE("decision and metric CSV output") {
  PatientEvaluation e;
  e.subjectId = "p1";
  DecisionOutcome o;
  o.t = 7;
  o.decision = 1;
  o.idx = 2.5;
  o.itmFlg = 2;
  o.label = Label::kTP;
  e.outcomes = {o};
  e.metrics = metrics_from_counts(1, 0, 0, 0);
  PatientEvaluation skipped;
  skipped.subjectId = "p2";
  skipped.skipReason = "too short";
  std::ostringstream d, m;
  write_decisions_csv(d, {e, skipped});
  CHECK(d.str() == "subject_id,hour,idx,itm_flg,decision,label\np1,7,2.5,2,1,TP\n");
  write_metrics_csv(m, {e, skipped});
  CHECK(m.str().find("p1,1,0,0,0,1,1,1,1,NaN,") != std::string::npos);
  CHECK(m.str().find("p2,0,0,0,0,NaN,NaN,NaN,NaN,NaN,too short") != std::string::npos);
  CHECK(m.str().find("ALL,1,0,0,0,") != std::string::npos);
}

TEST_CASE("run config validation") {
  RunConfig c;
  c.inputs = {"x.csv"};
  CHECK_NOTHROW(c.validate());
  c.window.width = 10;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.window.width = 50;
  c.rule = RuleKind::kFoldChange;
  c.foldChange.factor = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.foldChange.factor = 3.0;
  CHECK(std::holds_alternative<FoldChange>(c.tippingRule()));
  c.inputs = {""};
  CHECK_THROWS_AS(c.validate(), ParameterError);
}
