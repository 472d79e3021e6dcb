#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fglht/bootstrap.hpp"
#include "fglht/designs.hpp"
#include "fglht/error.hpp"
#include "fglht/parallel.hpp"
#include "fglht/rng.hpp"
#include "fglht/test.hpp"

namespace fglht {

enum class TestMethod { adjusted, unadjusted, bootstrap };

inline std::string to_string(TestMethod m) {
  switch (m) {
    case TestMethod::adjusted: return "new";
    case TestMethod::unadjusted: return "new-unadjusted";
    default: return "bootstrap";
  }
}

inline TestMethod method_from_string(const std::string& s) {
  if (s == "new" || s == "adjusted") return TestMethod::adjusted;
  if (s == "new-unadjusted" || s == "unadjusted") return TestMethod::unadjusted;
  if (s == "bootstrap") return TestMethod::bootstrap;
  throw DimensionError("unknown method '" + s + "'");
}

using DesignConfig = std::variant<FourierDesign, BrownianDesign>;

/// One Monte Carlo cell: a generator, a contrast, the methods to score on
/// the same draws, and the replication protocol.
struct Experiment {
  DesignConfig design;
  Eigen::MatrixXd contrast;
  std::vector<TestMethod> methods{TestMethod::adjusted};
  int reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int bootstrap_draws = 300;

  void validate() const {
    if (reps < 1) throw DimensionError("Experiment: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DimensionError("Experiment: alpha outside (0,1)");
    if (methods.empty()) throw DimensionError("Experiment: no methods");
  }
};

/// Empirical rejection percentage per method.
struct ExperimentResult {
  std::map<TestMethod, double> rejection_pct;
  int reps = 0;
};

namespace detail {

inline SampleSet generate_any(const DesignConfig& design, std::uint64_t seed) {
  return std::visit([&](const auto& d) { return generate(d, seed); }, design);
}

// Compact fingerprint of an experiment so a run log cannot be replayed
// against a different setup.
inline std::uint64_t experiment_fingerprint(const Experiment& e) {
  std::ostringstream ss;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FourierDesign>) {
          ss << "fourier;" << d.sizes[0] << ',' << d.sizes[1] << ',' << d.sizes[2]
             << ';' << d.points << ';' << d.components << ';' << d.basis_size
             << ';' << d.rho << ';' << d.shift << ';' << to_string(d.dist);
        } else {
          ss << "brownian;" << d.sizes[0] << ',' << d.sizes[1] << ',' << d.sizes[2]
             << ',' << d.sizes[3] << ';' << d.points << ';' << d.dispersion << ';'
             << static_cast<int>(d.variant) << ';' << d.noise_sd << ';'
             << d.keep_fraction;
        }
      },
      e.design);
  ss << "|G=";
  for (Eigen::Index i = 0; i < e.contrast.size(); ++i) ss << e.contrast(i) << ',';
  ss << "|reps=" << e.reps << "|alpha=" << e.alpha << "|seed=" << e.seed
     << "|B=" << e.bootstrap_draws << "|methods=";
  for (auto m : e.methods) ss << to_string(m) << ',';
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : ss.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Append-only per-replication log. Lines are flushed in replication order
// (a reorder buffer absorbs out-of-order completion), so reruns byte-match
// and an interrupted run can resume from what is already on disk.
class RunLog {
 public:
  RunLog(const std::string& path, std::uint64_t fingerprint, int method_count)
      : path_(path), method_count_(method_count) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (in) {
      std::string line;
      if (std::getline(in, line)) {
        const std::string tag = "# fingerprint " + std::to_string(fingerprint);
        if (line != tag) {
          throw DimensionError("run log '" + path_ + "' belongs to a different experiment");
        }
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::istringstream ls(line);
          std::string cell;
          if (!std::getline(ls, cell, ',')) continue;
          const int rep = std::stoi(cell);
          std::vector<int> flags;
          while (std::getline(ls, cell, ',')) flags.push_back(std::stoi(cell));
          if (static_cast<int>(flags.size()) == method_count_) {
            done_[rep] = std::move(flags);
          }
        }
      }
      in.close();
      out_.open(path_, std::ios::app);
    } else {
      out_.open(path_);
      out_ << "# fingerprint " << fingerprint << "\n";
      out_.flush();
    }
    if (!out_) throw SchemaError("cannot write run log '" + path_ + "'");
  }

  bool enabled() const { return !path_.empty(); }

  bool lookup(int rep, std::vector<int>* flags) const {
    const auto it = done_.find(rep);
    if (it == done_.end()) return false;
    *flags = it->second;
    return true;
  }

  void record(int rep, const std::vector<int>& flags) {
    if (path_.empty()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    pending_[rep] = flags;
    while (!pending_.empty() && pending_.begin()->first == next_flush_) {
      const auto& f = pending_.begin()->second;
      out_ << next_flush_;
      for (int v : f) out_ << ',' << v;
      out_ << "\n";
      pending_.erase(pending_.begin());
      ++next_flush_;
    }
    out_.flush();
  }

  void set_flush_start(int first_new_rep) { next_flush_ = first_new_rep; }

 private:
  std::string path_;
  int method_count_;
  std::map<int, std::vector<int>> done_;
  std::map<int, std::vector<int>> pending_;
  std::mutex mutex_;
  std::ofstream out_;
  int next_flush_ = 0;
};

}  // namespace detail

/// Runs the experiment: `reps` independent replications, each generated on
/// a seed derived from (seed, replication index), scored by every method on
/// the same draws. Deterministic for any thread count. An optional run log
/// streams per-replication decisions and lets an interrupted run resume.
inline ExperimentResult run_experiment(const Experiment& exp, int threads = 1,
                                       const std::string& runlog_path = {}) {
  exp.validate();
  const int mcount = static_cast<int>(exp.methods.size());
  detail::RunLog log(runlog_path, detail::experiment_fingerprint(exp), mcount);

  std::vector<std::vector<int>> flags(static_cast<std::size_t>(exp.reps));
  int first_new = 0;
  if (log.enabled()) {
    while (first_new < exp.reps &&
           log.lookup(first_new, &flags[static_cast<std::size_t>(first_new)])) {
      ++first_new;
    }
    log.set_flush_start(first_new);
  }

  parallel_for(exp.reps, threads, [&](int rep) {
    auto& mine = flags[static_cast<std::size_t>(rep)];
    if (!mine.empty()) return;  // resumed from the log
    if (log.enabled() && rep < first_new) return;
    try {
      const std::uint64_t rep_seed = derive_seed(exp.seed, static_cast<std::uint64_t>(rep));
      const SampleSet data = detail::generate_any(exp.design, rep_seed);
      mine.resize(static_cast<std::size_t>(mcount));
      for (int j = 0; j < mcount; ++j) {
        const TestMethod m = exp.methods[static_cast<std::size_t>(j)];
        bool reject = false;
        if (m == TestMethod::bootstrap) {
          const auto rep_out = bootstrap_test(
              data, exp.contrast, exp.bootstrap_draws,
              derive_seed(rep_seed, 0x626f6f74ULL));
          reject = rep_out.p_value < exp.alpha;
        } else {
          TestOptions opt;
          opt.adjusted = (m == TestMethod::adjusted);
          opt.alphas = {exp.alpha};
          const TestReport out = run_test(data, exp.contrast, opt);
          reject = out.p_value < exp.alpha;
        }
        mine[static_cast<std::size_t>(j)] = reject ? 1 : 0;
      }
      log.record(rep, mine);
    } catch (const Error& e) {
      throw Error("replication " + std::to_string(rep) + ": " + e.what());
    }
  });

  ExperimentResult res;
  res.reps = exp.reps;
  for (int j = 0; j < mcount; ++j) {
    int count = 0;
    for (const auto& f : flags) count += f[static_cast<std::size_t>(j)];
    res.rejection_pct[exp.methods[static_cast<std::size_t>(j)]] =
        100.0 * static_cast<double>(count) / static_cast<double>(exp.reps);
  }
  return res;
}

/// Average relative deviation (in %) of empirical sizes from the nominal
/// level: 100 * mean(|s_i - nominal|) / nominal.
inline double average_relative_error(const std::vector<double>& sizes_pct,
                                     double nominal_pct = 5.0) {
  if (sizes_pct.empty()) throw DimensionError("average_relative_error: empty input");
  double acc = 0.0;
  for (double s : sizes_pct) acc += std::fabs(s - nominal_pct);
  return 100.0 * (acc / static_cast<double>(sizes_pct.size())) / nominal_pct;
}

/// One row of a result table: the cell coordinates plus one rejection
/// percentage per method.
struct ResultRow {
  std::string dist;
  std::string sizes;
  int points = 0;
  std::string knob;   // rho / sigma / keep fraction, rendered
  double shift = 0.0;
  std::map<std::string, double> cells;
};

struct ResultTable {
  std::vector<std::string> methods;
  std::vector<ResultRow> rows;
  std::map<std::string, double> are;  // per method, over the table's cells

  void finalize() {
    are.clear();
    for (const auto& m : methods) {
      std::vector<double> cells;
      for (const auto& r : rows) {
        const auto it = r.cells.find(m);
        if (it != r.cells.end()) cells.push_back(it->second);
      }
      if (!cells.empty()) are[m] = average_relative_error(cells);
    }
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "dist,sizes,M,knob,delta";
    for (const auto& m : methods) out << ',' << m;
    out << "\n";
    char buf[64];
    for (const auto& r : rows) {
      out << r.dist << ',' << r.sizes << ',' << r.points << ',' << r.knob << ','
          << r.shift;
      for (const auto& m : methods) {
        std::snprintf(buf, sizeof(buf), "%.10g", r.cells.at(m));
        out << ',' << buf;
      }
      out << "\n";
    }
    if (!are.empty()) {
      out << "ARE,,,,";
      for (const auto& m : methods) {
        std::snprintf(buf, sizeof(buf), "%.10g", are.at(m));
        out << ',' << buf;
      }
      out << "\n";
    }
    return out.str();
  }

  std::string to_text() const {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-9s %-14s %5s %-7s %6s", "dist", "sizes",
                  "M", "knob", "delta");
    out << buf;
    for (const auto& m : methods) {
      std::snprintf(buf, sizeof(buf), " %14s", m.c_str());
      out << buf;
    }
    out << "\n";
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%-9s %-14s %5d %-7s %6.3g", r.dist.c_str(),
                    r.sizes.c_str(), r.points, r.knob.c_str(), r.shift);
      out << buf;
      for (const auto& m : methods) {
        std::snprintf(buf, sizeof(buf), " %14.1f", r.cells.at(m));
        out << buf;
      }
      out << "\n";
    }
    if (!are.empty()) {
      std::snprintf(buf, sizeof(buf), "%-9s %-14s %5s %-7s %6s", "ARE", "", "", "",
                    "");
      out << buf;
      for (const auto& m : methods) {
        std::snprintf(buf, sizeof(buf), " %14.2f", are.at(m));
        out << buf;
      }
      out << "\n";
    }
    return out.str();
  }
};

}  // namespace fglht
