// Command-line front end: run the global test or the bootstrap on CSV data,
// reproduce the simulation studies, evaluate asymptotic power, and put raw
// observations onto a common grid.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fglht/fglht.hpp"
#include "fglht/oracle.hpp"
#include "fglht/report_json.hpp"

namespace {

using namespace fglht;

Eigen::MatrixXd parse_contrast_text(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::vector<double> vals;
    std::stringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      if (cell.empty()) continue;
      vals.push_back(std::stod(cell));
    }
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw DimensionError("empty contrast matrix");
  Eigen::MatrixXd g(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw DimensionError("ragged contrast matrix");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return g;
}

// The named coefficient matrices: G1 = [I_{k-1}, -1] (all means equal) for
// any k; G2..G5 are the usual three-group contrasts.
Eigen::MatrixXd contrast_by_tag(const std::string& tag, int k) {
  if (tag == "G1" || tag == "g1") return equal_means_contrast(k);
  Eigen::MatrixXd g(1, 3);
  if (tag == "G2" || tag == "g2") {
    g << 1, -1, 0;
  } else if (tag == "G3" || tag == "g3") {
    g << 1, 0, -1;
  } else if (tag == "G4" || tag == "g4") {
    g << 0, 1, -1;
  } else if (tag == "G5" || tag == "g5") {
    g << 1, -2, 1;
  } else {
    throw DimensionError("unknown hypothesis tag '" + tag + "'");
  }
  if (k != 3) {
    throw DimensionError("hypothesis tag " + tag + " needs k = 3 groups, have " +
                         std::to_string(k));
  }
  return g;
}

Grid parse_grid_text(const std::string& text) {
  double a = 0.0, b = 0.0;
  int m = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf,%d", &a, &b, &m) != 3) {
    throw DimensionError("--grid expects 'a,b,M'");
  }
  return Grid(a, b, m);
}

SampleSet load_samples(const std::string& path, const std::string& grid_text,
                       const std::string& method) {
  const auto obs = ingest_long_csv(path);
  std::optional<Grid> grid;
  if (!grid_text.empty()) {
    grid = parse_grid_text(grid_text);
  } else {
    if (obs.empty()) throw SchemaError("'" + path + "' has no data rows");
    double lo = obs.front().time, hi = obs.front().time;
    for (const auto& o : obs) {
      lo = std::min(lo, o.time);
      hi = std::max(hi, o.time);
    }
    grid = Grid(lo, hi, 50);
  }
  const ReconstructMethod rm = method == "spline"
                                   ? ReconstructMethod::smoothing_spline
                                   : ReconstructMethod::linear;
  ReconstructInfo info;
  SampleSet set = reconstruct(obs, *grid, rm, &info);
  if (info.extrapolated_values > 0 || info.linear_fallbacks > 0) {
    std::cerr << "note: " << info.extrapolated_values
              << " grid values extrapolated, " << info.linear_fallbacks
              << " series fell back to linear interpolation\n";
  }
  return set;
}

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw SchemaError("cannot write '" + out_path + "'");
  out << payload;
}

std::array<int, 3> sim1_sizes(const std::string& tag) {
  if (tag == "n1") return {50, 70, 70};
  if (tag == "n2") return {75, 105, 105};
  if (tag == "n3") return {100, 140, 140};
  std::array<int, 3> s{};
  if (std::sscanf(tag.c_str(), "%d,%d,%d", &s[0], &s[1], &s[2]) != 3) {
    throw DimensionError("--sizes expects n1|n2|n3 or three comma-separated counts");
  }
  return s;
}

std::array<int, 4> sim2_sizes(const std::string& tag) {
  if (tag == "n1") return {15, 30, 50, 70};
  if (tag == "n2") return {18, 36, 60, 84};
  if (tag == "n3") return {24, 48, 80, 112};
  std::array<int, 4> s{};
  if (std::sscanf(tag.c_str(), "%d,%d,%d,%d", &s[0], &s[1], &s[2], &s[3]) != 4) {
    throw DimensionError("--sizes expects n1|n2|n3 or four comma-separated counts");
  }
  return s;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct CommonTestArgs {
  std::string data;
  std::string grid;
  std::string contrast;
  std::string hypothesis = "G1";
  std::string method = "linear";
  std::string out;
};

Eigen::MatrixXd resolve_contrast(const CommonTestArgs& args, int k) {
  if (!args.contrast.empty()) return parse_contrast_text(args.contrast);
  return contrast_by_tag(args.hypothesis, k);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Global tests of linear hypotheses on mean curves of "
               "multivariate functional samples"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.set_version_flag("--version", "fglht 0.1.0");

  unsigned threads_default = std::max(1u, std::thread::hardware_concurrency());

  // ---- test ----
  auto* t = app.add_subcommand("test", "Run the global test on long-format CSV data");
  CommonTestArgs ta;
  std::vector<double> t_alphas{0.05};
  bool t_no_adjust = false;
  t->add_option("--data", ta.data, "long-format CSV: group,subject,component,time,value")
      ->required();
  t->add_option("--grid", ta.grid, "common grid as 'a,b,M' (default: data range, M=50)");
  t->add_option("--contrast", ta.contrast, "coefficient matrix, rows ';'-separated: '1,-1,0'");
  t->add_option("--hypothesis", ta.hypothesis, "named matrix G1..G5 (default G1)");
  t->add_option("--alpha", t_alphas, "significance levels (default 0.05)");
  t->add_flag("--no-adjust", t_no_adjust, "skip the finite-sample adjustment");
  t->add_option("--method", ta.method, "reconstruction: linear|spline (default linear)");
  t->add_option("--out", ta.out, "write JSON here instead of stdout");

  // ---- bootstrap ----
  auto* b = app.add_subcommand("bootstrap", "Residual bootstrap test on CSV data");
  CommonTestArgs ba;
  int b_draws = 300;
  std::uint64_t b_seed = 0;
  bool b_no_replicates = false;
  unsigned b_threads = threads_default;
  b->add_option("--data", ba.data, "long-format CSV")->required();
  b->add_option("--grid", ba.grid, "common grid as 'a,b,M'");
  b->add_option("--contrast", ba.contrast, "coefficient matrix text");
  b->add_option("--hypothesis", ba.hypothesis, "named matrix G1..G5");
  b->add_option("--B", b_draws, "bootstrap replicates (default 300)");
  b->add_option("--seed", b_seed, "master seed (default 0)");
  b->add_option("--method", ba.method, "reconstruction: linear|spline");
  b->add_flag("--no-replicates", b_no_replicates, "omit replicate values from the JSON");
  b->add_option("--threads", b_threads, "worker threads");
  b->add_option("--out", ba.out, "write JSON here instead of stdout");

  // ---- simulate ----
  auto* s = app.add_subcommand("simulate", "Monte Carlo size/power cells");
  std::string s_design = "sim1";
  std::string s_hyp = "G1";
  std::string s_contrast;
  std::string s_sizes = "n1";
  std::string s_scenario = "s1";
  std::vector<std::string> s_methods{"new"};
  std::vector<std::string> s_dists{"gaussian"};
  std::vector<int> s_points{50};
  std::vector<double> s_rhos{0.5};
  std::vector<double> s_deltas{0.0};
  std::vector<double> s_sigmas{0.1};
  std::vector<double> s_keeps{0.5};
  int s_reps = 1000;
  double s_alpha = 0.05;
  std::uint64_t s_seed = 0;
  int s_draws = 300;
  unsigned s_threads = threads_default;
  std::string s_out, s_runlog;
  s->add_option("--design", s_design, "sim1 (3-group Fourier) | sim2 (4-group Brownian)");
  s->add_option("--hypothesis", s_hyp, "named matrix G1..G5 (default G1)");
  s->add_option("--contrast", s_contrast, "custom coefficient matrix text");
  s->add_option("--sizes", s_sizes, "n1|n2|n3 or comma list (default n1)");
  s->add_option("--method", s_methods, "new | new-unadjusted | bootstrap (repeatable)");
  s->add_option("--dist", s_dists, "sim1 noise: gaussian|t4|chisq4 (repeatable)");
  s->add_option("--M", s_points, "grid resolutions (repeatable, default 50)");
  s->add_option("--rho", s_rhos, "sim1 correlation decay values (repeatable)");
  s->add_option("--delta", s_deltas, "sim1 mean shifts (repeatable, default 0)");
  s->add_option("--scenario", s_scenario, "sim2: plain|s1|s2 (default s1)");
  s->add_option("--sigma", s_sigmas, "sim2 s1 noise sd values (repeatable)");
  s->add_option("--keep", s_keeps, "sim2 s2 keep fractions (repeatable)");
  s->add_option("--reps", s_reps, "replications per cell (default 1000)");
  s->add_option("--alpha", s_alpha, "significance level (default 0.05)");
  s->add_option("--seed", s_seed, "master seed (default 0)");
  s->add_option("--B", s_draws, "bootstrap replicates per test (default 300)");
  s->add_option("--threads", s_threads, "worker threads");
  s->add_option("--runlog", s_runlog, "append-only per-replication log (resumable)");
  s->add_option("--out", s_out, "write the CSV table here instead of stdout");

  // ---- power ----
  auto* w = app.add_subcommand("power", "Asymptotic power under the sim1 population model");
  std::string w_hyp = "G1";
  std::string w_contrast;
  std::string w_sizes = "n1";
  double w_rho = 0.5, w_delta = 0.0, w_alpha = 0.05;
  int w_points = 50;
  bool w_finite = false;
  std::string w_out;
  w->add_option("--hypothesis", w_hyp, "named matrix G1..G5");
  w->add_option("--contrast", w_contrast, "custom coefficient matrix text");
  w->add_option("--sizes", w_sizes, "n1|n2|n3 or comma list");
  w->add_option("--rho", w_rho, "correlation decay");
  w->add_option("--delta", w_delta, "mean shift");
  w->add_option("--M", w_points, "grid resolution");
  w->add_option("--alpha", w_alpha, "significance level");
  w->add_flag("--finite-df", w_finite, "use the chi-square form instead of the normal limit");
  w->add_option("--out", w_out, "write JSON here instead of stdout");

  // ---- reconstruct ----
  auto* r = app.add_subcommand("reconstruct", "Put raw observations onto a common grid");
  std::string r_data, r_grid, r_method = "spline", r_out;
  r->add_option("--data", r_data, "long-format CSV")->required();
  r->add_option("--grid", r_grid, "common grid as 'a,b,M'");
  r->add_option("--method", r_method, "linear|spline (default spline)");
  r->add_option("--out", r_out, "output directory for per-group gridded CSVs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  if (t->parsed()) {
    const SampleSet data = load_samples(ta.data, ta.grid, ta.method);
    TestOptions opt;
    opt.adjusted = !t_no_adjust;
    opt.alphas = t_alphas;
    const TestReport rep = run_test(data, resolve_contrast(ta, data.group_count()), opt);
    emit(ta.out, json_text(to_json(rep)));
    return 0;
  }

  if (b->parsed()) {
    const SampleSet data = load_samples(ba.data, ba.grid, ba.method);
    const BootstrapReport rep =
        bootstrap_test(data, resolve_contrast(ba, data.group_count()), b_draws,
                       b_seed, static_cast<int>(b_threads));
    emit(ba.out, json_text(to_json(rep, !b_no_replicates)));
    return 0;
  }

  if (s->parsed()) {
    std::vector<TestMethod> methods;
    for (const auto& m : s_methods) methods.push_back(method_from_string(m));
    ResultTable table;
    for (auto m : methods) table.methods.push_back(to_string(m));

    int cell_index = 0;
    auto run_cell = [&](const DesignConfig& design, const Eigen::MatrixXd& g,
                        ResultRow row) {
      Experiment exp;
      exp.design = design;
      exp.contrast = g;
      exp.methods = methods;
      exp.reps = s_reps;
      exp.alpha = s_alpha;
      exp.seed = derive_seed(s_seed, static_cast<std::uint64_t>(cell_index++));
      exp.bootstrap_draws = s_draws;
      std::string log = s_runlog;
      if (!log.empty() && cell_index > 1) log += "." + std::to_string(cell_index);
      const ExperimentResult res =
          run_experiment(exp, static_cast<int>(s_threads), log);
      for (auto m : methods) row.cells[to_string(m)] = res.rejection_pct.at(m);
      table.rows.push_back(std::move(row));
    };

    if (s_design == "sim1") {
      const auto sizes = sim1_sizes(s_sizes);
      for (const auto& dist : s_dists) {
        for (int m : s_points) {
          for (double rho : s_rhos) {
            for (double delta : s_deltas) {
              FourierDesign d;
              d.sizes = sizes;
              d.points = m;
              d.rho = rho;
              d.shift = delta;
              d.dist = noise_dist_from_string(dist);
              const Eigen::MatrixXd g = !s_contrast.empty()
                                            ? parse_contrast_text(s_contrast)
                                            : contrast_by_tag(s_hyp, 3);
              ResultRow row;
              row.dist = dist;
              row.sizes = s_sizes;
              row.points = m;
              char knob[32];
              std::snprintf(knob, sizeof(knob), "%g", rho);
              row.knob = knob;
              row.shift = delta;
              run_cell(d, g, std::move(row));
            }
          }
        }
      }
    } else if (s_design == "sim2") {
      const auto sizes = sim2_sizes(s_sizes);
      const auto knobs = s_scenario == "s2" ? s_keeps
                         : s_scenario == "s1" ? s_sigmas
                                              : std::vector<double>{0.0};
      for (int m : s_points) {
        for (double knob : knobs) {
          BrownianDesign d;
          d.sizes = sizes;
          d.points = m;
          if (s_scenario == "s1") {
            d.variant = BrownianDesign::Variant::noise;
            d.noise_sd = knob;
          } else if (s_scenario == "s2") {
            d.variant = BrownianDesign::Variant::sparse;
            d.keep_fraction = knob;
          } else {
            d.variant = BrownianDesign::Variant::plain;
          }
          const Eigen::MatrixXd g = !s_contrast.empty()
                                        ? parse_contrast_text(s_contrast)
                                        : contrast_by_tag(s_hyp, 4);
          ResultRow row;
          row.dist = "gaussian";
          row.sizes = s_sizes;
          row.points = m;
          char kb[32];
          std::snprintf(kb, sizeof(kb), "%g", knob);
          row.knob = kb;
          row.shift = 0.0;
          run_cell(d, g, std::move(row));
        }
      }
    } else {
      throw DimensionError("--design must be sim1 or sim2");
    }

    table.finalize();
    emit(s_out, table.to_csv());
    std::cerr << table.to_text();
    return 0;
  }

  if (w->parsed()) {
    FourierDesign d;
    d.sizes = sim1_sizes(w_sizes);
    d.points = w_points;
    d.rho = w_rho;
    d.shift = w_delta;
    PowerInput in;
    in.grid = d.grid();
    in.contrast = !w_contrast.empty() ? parse_contrast_text(w_contrast)
                                      : contrast_by_tag(w_hyp, 3);
    in.alpha = w_alpha;
    in.finite_df = w_finite;
    in.total_n = 0.0;
    for (int n : d.sizes) in.total_n += n;
    for (int a = 0; a < 3; ++a) {
      in.mean.push_back(design_mean(d, a));
      in.tau.push_back(static_cast<double>(d.sizes[static_cast<std::size_t>(a)]) /
                       in.total_n);
      in.cov.push_back(population_covariance(d, a));
    }
    const double power = asymptotic_power(in);
    nlohmann::json j;
    j["power"] = power;
    j["alpha"] = w_alpha;
    j["delta"] = w_delta;
    j["rho"] = w_rho;
    j["n"] = in.total_n;
    j["form"] = w_finite ? "chi-square" : "normal";
    emit(w_out, json_text(j));
    return 0;
  }

  if (r->parsed()) {
    const auto obs = ingest_long_csv(r_data);
    Grid grid = [&] {
      if (!r_grid.empty()) return parse_grid_text(r_grid);
      if (obs.empty()) throw SchemaError("'" + r_data + "' has no data rows");
      double lo = obs.front().time, hi = obs.front().time;
      for (const auto& o : obs) {
        lo = std::min(lo, o.time);
        hi = std::max(hi, o.time);
      }
      return Grid(lo, hi, 50);
    }();
    ReconstructInfo info;
    const ReconstructMethod rm = r_method == "linear"
                                     ? ReconstructMethod::linear
                                     : ReconstructMethod::smoothing_spline;
    const SampleSet set = reconstruct(obs, grid, rm, &info);
    const auto paths = export_gridded(set, r_out);
    std::cerr << "wrote " << paths.size() << " group files to " << r_out << " ("
              << info.extrapolated_values << " extrapolated values, "
              << info.linear_fallbacks << " linear fallbacks)\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const fglht::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
