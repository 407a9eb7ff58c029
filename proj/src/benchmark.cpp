#include "mdn/benchmark.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mdn/mesh_io.hpp"
#include "mdn/thread_pool.hpp"

namespace mdn {

namespace {

const char* const kStages[] = {"descriptor", "inference", "bilateral", "vertex_update", "total"};

double stage_seconds(const StageTimings& t, const std::string& stage) {
  if (stage == "descriptor") return t.descriptor;
  if (stage == "inference") return t.inference;
  if (stage == "bilateral") return t.bilateral;
  if (stage == "vertex_update") return t.vertex_update;
  return t.total;
}

}  // namespace

const BenchSummary* BenchReport::find(const std::string& stage, std::size_t threads) const {
  for (const auto& s : summaries) {
    if (s.stage == stage && s.threads == threads) return &s;
  }
  return nullptr;
}

double BenchReport::speedup(const std::string& stage, std::size_t threads) const {
  const BenchSummary* base = find(stage, 1);
  const BenchSummary* other = find(stage, threads);
  if (!base || !other || other->mean <= 0.0) return 0.0;
  return base->mean / other->mean;
}

BenchSummary summarize(const std::string& stage, std::size_t threads, std::vector<double> seconds) {
  BenchSummary s;
  s.stage = stage;
  s.threads = threads;
  s.count = seconds.size();
  if (seconds.empty()) return s;
  std::sort(seconds.begin(), seconds.end());
  s.min = seconds.front();
  s.max = seconds.back();
  s.mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
  const std::size_t mid = seconds.size() / 2;
  s.median = seconds.size() % 2 ? seconds[mid] : 0.5 * (seconds[mid - 1] + seconds[mid]);
  return s;
}

BenchReport benchmark(const Mesh& noisy, const ModelBundle& bundle, const DenoiseConfig& cfg, int repetitions,
                      const std::vector<std::size_t>& thread_counts, int warmup) {
  BenchReport report;
  report.face_count = noisy.face_count();
  std::string first_output;
  bool have_output = false;
  for (std::size_t threads : thread_counts) {
    ThreadPool pool(threads);
    DenoiseConfig run = cfg;
    run.threads = pool.size();
    std::vector<std::vector<double>> per_stage(std::size(kStages));
    for (int w = 0; w < warmup; ++w) denoise_mesh_detailed(noisy, bundle, run, &pool);
    for (int rep = 0; rep < repetitions; ++rep) {
      const DenoiseResult r = denoise_mesh_detailed(noisy, bundle, run, &pool);
      for (std::size_t s = 0; s < std::size(kStages); ++s) {
        const double sec = stage_seconds(r.timings, kStages[s]);
        per_stage[s].push_back(sec);
        report.samples.push_back({kStages[s], pool.size(), rep, sec});
      }
      std::string text = save_mesh(r.mesh, MeshFormat::Obj);
      if (!have_output) {
        first_output = std::move(text);
        have_output = true;
      } else if (text != first_output) {
        report.identical_outputs = false;
      }
    }
    for (std::size_t s = 0; s < std::size(kStages); ++s) {
      report.summaries.push_back(summarize(kStages[s], pool.size(), std::move(per_stage[s])));
    }
  }
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "stage,threads,repetition,seconds\n";
  for (const auto& s : report.samples) {
    out << s.stage << ',' << s.threads << ',' << s.repetition << ',' << format_double(s.seconds) << '\n';
  }
  return out.str();
}

}  // namespace mdn
