#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mdn/pipeline.hpp"

namespace mdn {

// Reference timing for the 20-neighbour CVAE with post-processing on a
// 100k-face mesh, as reported for the original GPU implementation.
inline constexpr double kReferenceSeconds100k = 0.9872;

struct BenchSample {
  std::string stage;  // descriptor, inference, bilateral, vertex_update, total
  std::size_t threads = 1;
  int repetition = 0;
  double seconds = 0.0;
};

struct BenchSummary {
  std::string stage;
  std::size_t threads = 1;
  std::size_t count = 0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct BenchReport {
  std::vector<BenchSample> samples;
  std::vector<BenchSummary> summaries;
  std::size_t face_count = 0;
  // Every run, across all thread counts, wrote the same output bytes.
  bool identical_outputs = true;
  double reference_seconds = kReferenceSeconds100k;

  const BenchSummary* find(const std::string& stage, std::size_t threads) const;
  // mean(stage, 1 thread) / mean(stage, threads); 0 when either is missing.
  double speedup(const std::string& stage, std::size_t threads) const;
};

BenchSummary summarize(const std::string& stage, std::size_t threads, std::vector<double> seconds);

// Each thread setting first runs `warmup` untimed passes.
BenchReport benchmark(const Mesh& noisy, const ModelBundle& bundle, const DenoiseConfig& cfg, int repetitions,
                      const std::vector<std::size_t>& thread_counts, int warmup = 1);

// Header `stage,threads,repetition,seconds`, one row per sample.
std::string bench_csv(const BenchReport& report);

}  // namespace mdn
