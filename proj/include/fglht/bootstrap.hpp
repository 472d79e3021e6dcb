#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/hypothesis.hpp"
#include "fglht/moments.hpp"
#include "fglht/parallel.hpp"
#include "fglht/rng.hpp"
#include "fglht/sample.hpp"
#include "fglht/test.hpp"

namespace fglht {

struct BootstrapReport {
  double statistic = 0.0;          // observed value on the data
  int draws = 0;                   // B
  std::vector<double> replicates;  // B resampled statistic values
  double p_value = 0.0;            // strict exceedance fraction
  std::uint64_t seed = 0;
};

namespace detail {

// Statistic of one resampled residual set, with all buffers reused across
// replicates. Group means are re-estimated from the resampled curves, so
// recentering happens inside the statistic itself; the pooled covariance is
// recomputed from scratch per replicate.
struct BootstrapWorker {
  const std::vector<GroupMoments>* source = nullptr;
  const Hypothesis* hyp = nullptr;
  const Grid* grid = nullptr;
  std::vector<GroupMoments> resampled;
  std::vector<int> indices;

  void init(const std::vector<GroupMoments>& src, const Hypothesis& h,
            const Grid& g) {
    source = &src;
    hyp = &h;
    grid = &g;
    resampled.resize(src.size());
    for (std::size_t a = 0; a < src.size(); ++a) {
      resampled[a].n = src[a].n;
      resampled[a].p = src[a].p;
      resampled[a].points = src[a].points;
      resampled[a].residuals.resize(src[a].residuals.rows(),
                                    src[a].residuals.cols());
      resampled[a].mean.resize(src[a].mean.cols());
      resampled[a].cov_diag.assign(
          static_cast<std::size_t>(src[a].points),
          Eigen::MatrixXd::Zero(src[a].p, src[a].p));
    }
  }

  double replicate(std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    for (std::size_t a = 0; a < source->size(); ++a) {
      const auto& src = (*source)[a];
      auto& dst = resampled[a];
      indices.resize(static_cast<std::size_t>(src.n));
      for (int i = 0; i < src.n; ++i) indices[static_cast<std::size_t>(i)] = rng.uniform_int(src.n);
      for (int i = 0; i < src.n; ++i) {
        dst.residuals.row(i) = src.residuals.row(indices[static_cast<std::size_t>(i)]);
      }
      dst.mean = dst.residuals.colwise().mean();
      dst.residuals.rowwise() -= dst.mean;
      const double inv = 1.0 / static_cast<double>(src.n - 1);
      for (int m = 0; m < src.points; ++m) {
        const auto block = dst.residuals.middleCols(m * src.p, src.p);
        dst.cov_diag[static_cast<std::size_t>(m)].noalias() =
            block.transpose() * block * inv;
      }
    }
    const PooledCovariance pooled = build_pooled(resampled, *hyp, *grid);
    return glht_statistic(resampled, pooled, *hyp, *grid);
  }
};

}  // namespace detail

/// Nonparametric bootstrap of the unadjusted statistic: residual curves are
/// computed once from the data, then each replicate resamples whole curves
/// within each group with replacement (sizes preserved) and runs the full
/// statistic pipeline on them. Replicate b draws from a stream seeded by
/// derive_seed(seed, b), so results do not depend on execution order.
inline BootstrapReport bootstrap_test(const SampleSet& data,
                                      const Eigen::MatrixXd& contrast,
                                      int draws, std::uint64_t seed,
                                      int threads = 1) {
  if (draws < 1) throw DimensionError("bootstrap_test: need B >= 1");
  const Hypothesis hyp(contrast, data.sizes());

  std::vector<GroupMoments> moments;
  moments.reserve(data.groups().size());
  for (const auto& g : data.groups()) moments.push_back(compute_moments(g));
  const PooledCovariance pooled = build_pooled(moments, hyp, data.grid());

  BootstrapReport rep;
  rep.seed = seed;
  rep.draws = draws;
  rep.statistic = glht_statistic(moments, pooled, hyp, data.grid());
  rep.replicates.assign(static_cast<std::size_t>(draws), 0.0);

  if (threads <= 1) {
    detail::BootstrapWorker worker;
    worker.init(moments, hyp, data.grid());
    for (int b = 0; b < draws; ++b) {
      rep.replicates[static_cast<std::size_t>(b)] =
          worker.replicate(derive_seed(seed, static_cast<std::uint64_t>(b)));
    }
  } else {
    // Each thread owns a worker; replicates are claimed off a shared counter
    // and keyed by their own derived seed, so the split cannot change results.
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
      detail::BootstrapWorker worker;
      worker.init(moments, hyp, data.grid());
      try {
        for (;;) {
          const int b = next.fetch_add(1, std::memory_order_relaxed);
          if (b >= draws) break;
          rep.replicates[static_cast<std::size_t>(b)] =
              worker.replicate(derive_seed(seed, static_cast<std::uint64_t>(b)));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  int count = 0;
  for (double t : rep.replicates) {
    if (t > rep.statistic) ++count;
  }
  rep.p_value = static_cast<double>(count) / static_cast<double>(draws);
  return rep;
}

}  // namespace fglht
