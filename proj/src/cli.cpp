#include "mdn/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mdn/benchmark.hpp"
#include "mdn/binary_io.hpp"
#include "mdn/error.hpp"
#include "mdn/mesh_io.hpp"
#include "mdn/metrics.hpp"
#include "mdn/shapes.hpp"
#include "mdn/thread_pool.hpp"

namespace mdn {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t parse_threads(const std::string& text) {
  if (text == "all") return 0;
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used == text.size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("threads must be a positive count or \"all\": " + text);
}

// Flat key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return entries;
}

struct Options {
  // shared
  std::string in, out, model;
  std::vector<std::string> inputs;
  std::string threads = "1";
  // noise
  double beta = 0.1, mu = 0.0;
  std::uint64_t seed = 1;
  // descriptors
  std::size_t patch_size = 20, clusters = 200;
  std::string alignment = "canonical";
  std::uint64_t kmeans_seed = 1;
  int kmeans_iter = 100;
  // training
  std::string data, kind = "cvae", activation = "relu", history;
  int epochs = 100;
  double lr = 3e-5, lr_decay = 0.998, keep = 0.99, holdout = 0.1;
  std::size_t batch = 256, latent = 64, hidden = 2048;
  // post-processing
  int bilateral_iterations = 1, vertex_iterations = 20;
  double sigma2 = 0.15;
  std::string sigma1 = "msd";
  // eval / bench
  std::string rec, ref, colormap, csv;
  int repetitions = 10;
  std::vector<std::string> thread_list{"1"};
  // make-shape
  std::string shape = "icosphere";
  int level = 3;
};

ModelBundle read_model(const std::string& path) {
  const auto bytes = read_binary_file(path);
  return load_model(bytes);
}

DenoiseConfig run_config(const ModelBundle& bundle, const Options& o) {
  DenoiseConfig cfg = bundle.config;
  cfg.bilateral_iterations = o.bilateral_iterations;
  cfg.vertex_iterations = o.vertex_iterations;
  cfg.sigma2 = o.sigma2;
  if (o.sigma1 == "msd") {
    cfg.sigma1_mode = Sigma1Mode::MeanSquaredDistance;
  } else if (o.sigma1 == "md") {
    cfg.sigma1_mode = Sigma1Mode::MeanDistance;
  } else {
    throw UsageError("sigma1 must be msd or md");
  }
  cfg.threads = parse_threads(o.threads);
  return cfg;
}

int cmd_add_noise(const Options& o, std::ostream& out) {
  const Mesh clean = read_mesh_file(o.in);
  const Mesh noisy = add_gaussian_noise(clean, {o.mu, o.beta, o.seed});
  write_mesh_file(noisy, o.out);
  out << "wrote " << o.out << " (" << noisy.vertex_count() << " vertices)\n";
  return 0;
}

int cmd_make_shape(const Options& o, std::ostream& out) {
  Mesh m;
  const int l = o.level;
  if (o.shape == "icosphere") {
    m = shapes::icosphere(l);
  } else if (o.shape == "uv-sphere") {
    m = shapes::uv_sphere(4 * l, 8 * l);
  } else if (o.shape == "cube") {
    m = shapes::cube(l);
  } else if (o.shape == "cylinder") {
    m = shapes::cylinder(8 * l, 4 * l);
  } else if (o.shape == "torus") {
    m = shapes::torus(16 * l, 8 * l);
  } else if (o.shape == "grid") {
    m = shapes::grid(l, l);
  } else {
    throw UsageError("unknown shape " + o.shape);
  }
  write_mesh_file(m, o.out);
  out << "wrote " << o.out << " (" << m.face_count() << " faces)\n";
  return 0;
}

int cmd_build_trainset(const Options& o, std::ostream& out) {
  std::vector<Mesh> meshes;
  for (const auto& path : o.inputs) meshes.push_back(read_mesh_file(path));
  DenoiseConfig cfg;
  cfg.patch_size = o.patch_size;
  cfg.clusters = o.clusters;
  if (o.alignment == "canonical") {
    cfg.alignment = AlignmentMode::Canonical;
  } else if (o.alignment == "minimal") {
    cfg.alignment = AlignmentMode::Minimal;
  } else {
    throw UsageError("alignment must be canonical or minimal");
  }
  ThreadPool pool(parse_threads(o.threads));
  const TrainingData data =
      build_training_set(meshes, {o.mu, o.beta, o.seed}, cfg, o.kmeans_seed, &pool, o.kmeans_iter);
  write_binary_file(o.out, save_training_data(data));
  out << "pairs " << data.set.size() << "\nskipped_faces " << data.skipped_faces << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const TrainingData data = load_training_data(read_binary_file(o.data));
  TrainConfig tc;
  tc.learning_rate = o.lr;
  tc.lr_decay = o.lr_decay;
  tc.batch_size = o.batch;
  tc.epochs = o.epochs;
  tc.keep_ratio = o.keep;
  tc.holdout_fraction = o.holdout;
  tc.seed = o.seed;

  ModelBundle bundle;
  bundle.config = data.config;
  bundle.clusters = data.clusters;
  bundle.provenance = {data.noise, o.epochs, o.seed, 0.0, data.set.size()};
  std::vector<EpochStats> history;
  if (o.kind == "cvae") {
    CvaeShape shape;
    shape.input_dim = descriptor_length(data.config.patch_size);
    shape.label_count = data.config.clusters;
    shape.latent_dim = o.latent;
    shape.enc_hidden1 = shape.enc_hidden2 = shape.dec_hidden1 = shape.dec_hidden2 = o.hidden;
    if (o.activation == "relu") {
      shape.activation = Activation::Relu;
    } else if (o.activation == "leaky") {
      shape.activation = Activation::LeakyRelu;
    } else {
      throw UsageError("activation must be relu or leaky");
    }
    CvaeTrainResult r = train_cvae(data.set, shape, tc);
    bundle.kind = ModelKind::Cvae;
    bundle.cvae = std::move(r.params);
    history = std::move(r.history);
  } else if (o.kind == "ae") {
    AeShape shape;
    shape.input_dim = descriptor_length(data.config.patch_size);
    AeTrainResult r = train_ae(data.set, shape, tc);
    bundle.kind = ModelKind::Ae;
    bundle.ae = std::move(r.params);
    history = std::move(r.history);
  } else {
    throw UsageError("model kind must be cvae or ae");
  }
  if (!history.empty()) bundle.provenance.final_loss = history.back().train_loss;
  write_binary_file(o.out, save_model(bundle));

  std::ostringstream log;
  log << "epoch,learning_rate,train_loss,eval_loss,eval_recon,eval_recon_excess\n";
  for (const auto& h : history) {
    log << h.epoch << ',' << format_double(h.learning_rate) << ',' << format_double(h.train_loss) << ','
        << format_double(h.eval_loss) << ',' << format_double(h.eval_recon) << ','
        << format_double(h.eval_recon_excess) << '\n';
  }
  if (!o.history.empty()) write_text_file(o.history, log.str());
  out << "final_loss " << format_double(bundle.provenance.final_loss) << '\n';
  return 0;
}

int cmd_denoise(const Options& o, std::ostream& out) {
  parse_threads(o.threads);
  const ModelBundle bundle = read_model(o.model);
  const DenoiseConfig cfg = run_config(bundle, o);
  const Mesh noisy = read_mesh_file(o.in);
  ThreadPool pool(cfg.threads);
  const DenoiseResult r = denoise_mesh_detailed(noisy, bundle, cfg, &pool);
  write_mesh_file(r.mesh, o.out);
  out << "wrote " << o.out << "\nfallback_faces " << r.fallback_faces << "\nseconds "
      << format_double(r.timings.total) << '\n';
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const Mesh rec = read_mesh_file(o.rec);
  const Mesh ref = read_mesh_file(o.ref);
  ThreadPool pool(parse_threads(o.threads));
  const MetricsReport m = evaluate(rec, ref, &pool);
  out << "mean_one_sided_distance " << format_double(m.mean_one_sided_distance) << '\n'
      << "max_one_sided_distance " << format_double(m.max_one_sided_distance) << '\n'
      << "alpha_mean_deg " << format_double(m.alpha_mean_deg) << '\n';
  if (!o.colormap.empty()) {
    const ErrorColormap cm = export_error_colormap(rec, m.per_vertex_distance);
    write_text_file(o.colormap + ".off", cm.coff);
    write_text_file(o.colormap + ".csv", cm.csv);
  }
  return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
  std::vector<std::size_t> threads;
  for (const auto& t : o.thread_list) threads.push_back(parse_threads(t));
  const ModelBundle bundle = read_model(o.model);
  const DenoiseConfig cfg = run_config(bundle, o);
  const Mesh noisy = read_mesh_file(o.in);
  const BenchReport report = benchmark(noisy, bundle, cfg, o.repetitions, threads);
  if (!o.csv.empty()) write_text_file(o.csv, bench_csv(report));
  out << "faces " << report.face_count << '\n';
  out << "stage,threads,count,min,mean,median,max\n";
  for (const auto& s : report.summaries) {
    out << s.stage << ',' << s.threads << ',' << s.count << ',' << format_double(s.min) << ','
        << format_double(s.mean) << ',' << format_double(s.median) << ',' << format_double(s.max) << '\n';
  }
  for (const auto& s : report.summaries) {
    if (s.stage == "total" && s.threads != 1) {
      out << "speedup_total_" << s.threads << " " << format_double(report.speedup("total", s.threads)) << '\n';
    }
  }
  out << "identical_outputs " << (report.identical_outputs ? "yes" : "no") << '\n'
      << "reference_seconds_100k " << format_double(report.reference_seconds) << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Mesh denoising with a conditional VAE over patch normal descriptors", "mdn-cli"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.footer("--config FILE loads key=value option defaults; command-line flags take precedence.");

  auto noise_opts = [&](CLI::App* s) {
    s->add_option("--beta", o.beta, "noise level relative to the mean edge length");
    s->add_option("--mu", o.mu, "noise mean relative to the mean edge length");
    s->add_option("--seed", o.seed, "random seed");
  };
  auto post_opts = [&](CLI::App* s) {
    s->add_option("--bilateral-iterations", o.bilateral_iterations);
    s->add_option("--vertex-iterations", o.vertex_iterations);
    s->add_option("--sigma2", o.sigma2);
    s->add_option("--sigma1", o.sigma1, "msd (mean squared distance) or md (mean distance)");
  };

  auto* add_noise = app.add_subcommand("add-noise", "perturb vertices along their normals");
  add_noise->add_option("--in", o.in)->required();
  add_noise->add_option("--out", o.out)->required();
  noise_opts(add_noise);

  auto* make_shape = app.add_subcommand("make-shape", "write a synthetic mesh");
  make_shape->add_option("--shape", o.shape, "icosphere, uv-sphere, cube, cylinder, torus or grid");
  make_shape->add_option("--level", o.level, "resolution parameter");
  make_shape->add_option("--out", o.out)->required();

  auto* trainset = app.add_subcommand("build-trainset", "noisy/clean descriptor pairs plus clusters");
  trainset->add_option("--in", o.inputs, "clean meshes")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  trainset->add_option("--out", o.out)->required();
  noise_opts(trainset);
  trainset->add_option("--patch-size", o.patch_size);
  trainset->add_option("--clusters", o.clusters);
  trainset->add_option("--alignment", o.alignment, "canonical or minimal");
  trainset->add_option("--kmeans-seed", o.kmeans_seed);
  trainset->add_option("--kmeans-iter", o.kmeans_iter);
  trainset->add_option("--threads", o.threads, "count or all");

  auto* train = app.add_subcommand("train", "fit a CVAE or AE model");
  train->add_option("--data", o.data)->required();
  train->add_option("--out", o.out)->required();
  train->add_option("--model", o.kind, "cvae or ae");
  train->add_option("--epochs", o.epochs);
  train->add_option("--lr", o.lr);
  train->add_option("--lr-decay", o.lr_decay);
  train->add_option("--batch", o.batch);
  train->add_option("--latent", o.latent);
  train->add_option("--hidden", o.hidden, "width of every CVAE hidden layer");
  train->add_option("--activation", o.activation, "relu or leaky");
  train->add_option("--keep", o.keep, "dropout keep probability");
  train->add_option("--holdout", o.holdout);
  train->add_option("--seed", o.seed);
  train->add_option("--history", o.history, "CSV file for per-epoch losses");

  auto* denoise = app.add_subcommand("denoise", "denoise a mesh with a trained model");
  denoise->add_option("--in", o.in)->required();
  denoise->add_option("--model", o.model)->required();
  denoise->add_option("--out", o.out)->required();
  denoise->add_option("--threads", o.threads, "count or all");
  post_opts(denoise);

  auto* eval = app.add_subcommand("eval", "compare a reconstruction with a reference");
  eval->add_option("--rec", o.rec)->required();
  eval->add_option("--ref", o.ref)->required();
  eval->add_option("--colormap", o.colormap, "output prefix for .off and .csv error maps");
  eval->add_option("--threads", o.threads, "count or all");

  auto* bench = app.add_subcommand("bench", "time the denoising stages");
  bench->add_option("--in", o.in)->required();
  bench->add_option("--model", o.model)->required();
  bench->add_option("--repetitions", o.repetitions);
  bench->add_option("--threads", o.thread_list, "thread counts to compare")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  bench->add_option("--csv", o.csv);
  post_opts(bench);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Locate the subcommand and any --config, then splice config entries in
    // right after the subcommand name so later command-line flags win.
    std::string config_path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config") {
        if (i + 1 == args.size()) throw UsageError("--config needs a file");
        config_path = args[++i];
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
      } else {
        kept.push_back(args[i]);
      }
    }
    args = std::move(kept);
    std::size_t sub_pos = args.size();
    for (std::size_t i = 0; i < args.size() && sub_pos == args.size(); ++i) {
      if (app.get_subcommand_no_throw(args[i]) != nullptr) sub_pos = i;
    }
    if (!config_path.empty() && sub_pos < args.size()) {
      CLI::App* sub = app.get_subcommand(args[sub_pos]);
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config_file(config_path)) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) continue;
        if (opt->get_items_expected_max() > 1) {
          std::istringstream words(value);
          std::string w;
          while (words >> w) {
            injected.push_back("--" + key);
            injected.push_back(w);
          }
        } else {
          injected.push_back("--" + key);
          injected.push_back(value);
        }
      }
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(), injected.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*add_noise) return cmd_add_noise(o, out);
    if (*make_shape) return cmd_make_shape(o, out);
    if (*trainset) return cmd_build_trainset(o, out);
    if (*train) return cmd_train(o, out);
    if (*denoise) return cmd_denoise(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*bench) return cmd_bench(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace mdn
