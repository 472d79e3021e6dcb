#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fglht/harness.hpp"

using namespace fglht;
using Catch::Approx;

namespace {

Experiment tiny_experiment(std::uint64_t seed) {
  FourierDesign d;
  d.sizes = {10, 12, 12};
  d.points = 10;
  d.rho = 0.5;
  Experiment e;
  e.design = d;
  e.contrast = equal_means_contrast(3);
  e.reps = 30;
  e.seed = seed;
  return e;
}

}  // namespace

TEST_CASE("average relative error from its definition") {
  REQUIRE(average_relative_error({5.0, 5.0, 5.0}) == 0.0);
  REQUIRE(average_relative_error({4.0, 6.0}) == Approx(20.0));
  REQUIRE(average_relative_error({10.0}) == Approx(100.0));
  REQUIRE_THROWS_AS(average_relative_error({}), DimensionError);
}

TEST_CASE("experiments are deterministic across thread counts") {
  const Experiment e = tiny_experiment(404);
  const ExperimentResult one = run_experiment(e, 1);
  const ExperimentResult two = run_experiment(e, 2);
  REQUIRE(one.rejection_pct.at(TestMethod::adjusted) ==
          two.rejection_pct.at(TestMethod::adjusted));
  REQUIRE(one.reps == 30);
}

TEST_CASE("null rejection rates stay in a loose binomial band") {
  Experiment e = tiny_experiment(11);
  e.reps = 200;
  const double pct = run_experiment(e, 2).rejection_pct.at(TestMethod::adjusted);
  REQUIRE(pct >= 0.0);
  REQUIRE(pct <= 15.0);
}

TEST_CASE("multiple methods are scored on the same draws") {
  Experiment e = tiny_experiment(12);
  e.methods = {TestMethod::adjusted, TestMethod::unadjusted};
  const ExperimentResult res = run_experiment(e, 2);
  // the unadjusted variant never rejects less often (same draws, smaller cut)
  REQUIRE(res.rejection_pct.at(TestMethod::unadjusted) >=
          res.rejection_pct.at(TestMethod::adjusted));
}

TEST_CASE("run log resumes and refuses foreign experiments") {
  namespace fs = std::filesystem;
  const std::string log = (fs::temp_directory_path() / "fglht_runlog.csv").string();
  std::error_code ec;
  fs::remove(log, ec);

  const Experiment e = tiny_experiment(909);
  const ExperimentResult first = run_experiment(e, 2, log);

  // the log now carries every replication; a rerun reads it all back
  std::ifstream in(log);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  REQUIRE(lines == e.reps + 1);  // header + one line per replication
  in.close();

  const ExperimentResult second = run_experiment(e, 1, log);
  REQUIRE(first.rejection_pct.at(TestMethod::adjusted) ==
          second.rejection_pct.at(TestMethod::adjusted));

  Experiment other = tiny_experiment(910);
  REQUIRE_THROWS_AS(run_experiment(other, 1, log), DimensionError);
  fs::remove(log, ec);
}

TEST_CASE("a truncated run log is completed, not recomputed from scratch") {
  namespace fs = std::filesystem;
  const std::string log = (fs::temp_directory_path() / "fglht_partial.csv").string();
  std::error_code ec;
  fs::remove(log, ec);

  const Experiment e = tiny_experiment(55);
  run_experiment(e, 1, log);

  // keep the header and the first 10 replications only
  std::ifstream in(log);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  in.close();
  std::ofstream out(log);
  for (std::size_t i = 0; i < 11 && i < lines.size(); ++i) out << lines[i] << "\n";
  out.close();

  const ExperimentResult resumed = run_experiment(e, 2, log);
  const ExperimentResult fresh = run_experiment(e, 1);
  REQUIRE(resumed.rejection_pct.at(TestMethod::adjusted) ==
          fresh.rejection_pct.at(TestMethod::adjusted));
  fs::remove(log, ec);
}

TEST_CASE("replication failures carry their index") {
  FourierDesign d;
  d.sizes = {3, 3, 3};  // too small for the adjusted test
  d.points = 6;
  Experiment e;
  e.design = d;
  e.contrast = equal_means_contrast(3);
  e.reps = 4;
  try {
    run_experiment(e, 1);
    FAIL("expected a size error");
  } catch (const Error& err) {
    REQUIRE(std::string(err.what()).find("replication") != std::string::npos);
  }
}

TEST_CASE("result tables render CSV with an ARE summary") {
  ResultTable table;
  table.methods = {"new"};
  ResultRow r1{"gaussian", "n1", 50, "0.5", 0.0, {{"new", 4.0}}};
  ResultRow r2{"gaussian", "n1", 50, "0.9", 0.0, {{"new", 6.0}}};
  table.rows = {r1, r2};
  table.finalize();
  REQUIRE(table.are.at("new") == Approx(20.0));
  const std::string csv = table.to_csv();
  REQUIRE(csv.find("dist,sizes,M,knob,delta,new") != std::string::npos);
  REQUIRE(csv.find("gaussian,n1,50,0.5,0,4") != std::string::npos);
  REQUIRE(csv.find("ARE") != std::string::npos);
  const std::string text = table.to_text();
  REQUIRE(text.find("new") != std::string::npos);
}
