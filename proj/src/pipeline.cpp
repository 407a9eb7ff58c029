#include "mdn/pipeline.hpp"

#include <chrono>
#include <optional>
#include <string>

#include "mdn/error.hpp"
#include "mdn/thread_pool.hpp"

namespace mdn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::size_t kDescriptorGrain = 256;
constexpr std::size_t kInferenceChunk = 256;

struct FaceDescriptors {
  Eigen::MatrixXd values;  // one column per face
  std::vector<PatchAlignment> alignments;
  std::vector<std::uint8_t> valid;
};

// Descriptor of every face that has a full patch and a usable mean normal.
FaceDescriptors describe_faces(const Mesh& mesh, const Adjacency& adj, const DenoiseConfig& cfg,
                               ThreadPool* pool) {
  const std::size_t faces = mesh.face_count();
  FaceDescriptors out;
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(descriptor_length(cfg.patch_size)),
                                     static_cast<Eigen::Index>(faces));
  out.alignments.assign(faces, PatchAlignment{});
  out.valid.assign(faces, 0);
  parallel_for(pool, 0, faces, kDescriptorGrain, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      try {
        const Patch patch = build_patch(mesh, adj, f, cfg.patch_size);
        PatchDescriptor d = encode_descriptor(patch, cfg.target, cfg.alignment);
        out.values.col(static_cast<Eigen::Index>(f)) = d.values;
        out.alignments[f] = d.alignment;
        out.valid[f] = 1;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientNeighbors && e.kind() != ErrorKind::DegenerateFace &&
            e.kind() != ErrorKind::DegenerateMeanNormal) {
          throw;
        }
      }
    }
  });
  return out;
}

void check_compatible(const DenoiseConfig& model, const DenoiseConfig& run) {
  auto mismatch = [](const std::string& what) { throw Error(ErrorKind::ConfigMismatch, what); };
  if (model.patch_size != run.patch_size) mismatch("patch size differs from the model's");
  if (model.clusters != run.clusters) mismatch("cluster count differs from the model's");
  if (model.target != run.target) mismatch("target direction differs from the model's");
  if (model.alignment != run.alignment) mismatch("alignment mode differs from the model's");
}

}  // namespace

Eigen::MatrixXd run_network(const ModelBundle& bundle, const Eigen::MatrixXd& descriptors,
                            std::span<const std::int32_t> labels) {
  switch (bundle.kind) {
    case ModelKind::Identity:
      return descriptors;
    case ModelKind::Cvae:
      return infer_cvae(bundle.cvae, descriptors, labels);
    case ModelKind::Ae:
      return infer_ae(bundle.ae, descriptors);
  }
  throw Error(ErrorKind::CorruptModel, "unknown model kind");
}

TrainingData build_training_set(std::span<const Mesh> clean_meshes, const NoiseSpec& noise,
                                const DenoiseConfig& cfg, std::uint64_t kmeans_seed, ThreadPool* pool,
                                int kmeans_max_iter) {
  if (clean_meshes.empty()) throw Error(ErrorKind::EmptyInput, "no training meshes");
  const std::size_t dim = descriptor_length(cfg.patch_size);
  std::vector<Eigen::MatrixXd> noisy_blocks, clean_blocks;
  std::size_t skipped = 0;
  std::size_t total = 0;

  for (std::size_t i = 0; i < clean_meshes.size(); ++i) {
    const Mesh& clean = clean_meshes[i];
    NoiseSpec spec = noise;
    spec.seed = noise.seed + i;
    const Mesh noisy = add_gaussian_noise(clean, spec);
    const Adjacency adj = build_adjacency(noisy);
    const std::vector<Vec3> clean_normals = clean.face_normals();
    const std::size_t faces = noisy.face_count();

    Eigen::MatrixXd xn = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(faces));
    Eigen::MatrixXd xc = xn;
    std::vector<std::uint8_t> valid(faces, 0);
    parallel_for(pool, 0, faces, kDescriptorGrain, [&](std::size_t lo, std::size_t hi) {
      std::vector<Vec3> targets(cfg.patch_size + 1);
      for (std::size_t f = lo; f < hi; ++f) {
        std::optional<Patch> patch;
        PatchAlignment alignment;
        try {
          patch = build_patch(noisy, adj, f, cfg.patch_size);
          alignment = compute_alignment(*patch, cfg.target, cfg.alignment);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DegenerateFace && e.kind() != ErrorKind::DegenerateMeanNormal) throw;
          continue;
        }
        targets[0] = clean_normals[f];
        bool usable = clean_normals[f].squaredNorm() > 0.0;
        for (std::size_t k = 0; k < patch->size(); ++k) {
          targets[k + 1] = clean_normals[static_cast<std::size_t>(patch->member_faces[k])];
          usable = usable && targets[k + 1].squaredNorm() > 0.0;
        }
        if (!usable) continue;
        const auto col = static_cast<Eigen::Index>(f);
        encode_normals(patch->normals, alignment, std::span<double>(xn.col(col).data(), dim));
        encode_normals(targets, alignment, std::span<double>(xc.col(col).data(), dim));
        valid[f] = 1;
      }
    });

    std::size_t kept = 0;
    for (std::uint8_t v : valid) kept += v;
    skipped += faces - kept;
    Eigen::MatrixXd bn(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(kept));
    Eigen::MatrixXd bc(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(kept));
    Eigen::Index c = 0;
    for (std::size_t f = 0; f < faces; ++f) {
      if (!valid[f]) continue;
      bn.col(c) = xn.col(static_cast<Eigen::Index>(f));
      bc.col(c) = xc.col(static_cast<Eigen::Index>(f));
      ++c;
    }
    total += kept;
    noisy_blocks.push_back(std::move(bn));
    clean_blocks.push_back(std::move(bc));
  }

  TrainingData data;
  data.config = cfg;
  data.noise = noise;
  data.skipped_faces = skipped;
  data.set.noisy.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(total));
  data.set.clean.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(total));
  Eigen::Index offset = 0;
  for (std::size_t b = 0; b < noisy_blocks.size(); ++b) {
    const Eigen::Index n = noisy_blocks[b].cols();
    data.set.noisy.middleCols(offset, n) = noisy_blocks[b];
    data.set.clean.middleCols(offset, n) = clean_blocks[b];
    offset += n;
  }
  if (total == 0) throw Error(ErrorKind::EmptyTrainingSet, "no face produced a complete patch");

  KMeansResult km = kmeans_fit(data.set.noisy, cfg.clusters, kmeans_seed, kmeans_max_iter, pool);
  data.clusters = std::move(km.model);
  data.set.labels = std::move(km.labels);
  data.set.label_count = cfg.clusters;
  return data;
}

DenoiseResult denoise_mesh_detailed(const Mesh& noisy, const ModelBundle& bundle, const DenoiseConfig& cfg,
                                    ThreadPool* pool) {
  check_compatible(bundle.config, cfg);
  if (noisy.face_count() == 0) throw Error(ErrorKind::EmptyMesh, "mesh has no faces");
  const auto start = Clock::now();
  DenoiseResult result;
  const Adjacency adj = build_adjacency(noisy);
  const std::vector<Vec3> input = noisy.face_normals();
  const std::size_t faces = noisy.face_count();

  auto t = Clock::now();
  const FaceDescriptors desc = describe_faces(noisy, adj, cfg, pool);
  result.timings.descriptor = seconds_since(t);

  t = Clock::now();
  result.network_normals = input;
  std::vector<std::uint8_t> fallback(faces, 0);
  const std::size_t dim = descriptor_length(cfg.patch_size);
  parallel_for(pool, 0, faces, kInferenceChunk, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> ids;
    for (std::size_t f = lo; f < hi; ++f) {
      if (desc.valid[f]) {
        ids.push_back(f);
      } else {
        fallback[f] = 1;
      }
    }
    if (ids.empty()) return;
    Eigen::MatrixXd block(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(ids.size()));
    std::vector<std::int32_t> labels(ids.size(), 0);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      block.col(static_cast<Eigen::Index>(k)) = desc.values.col(static_cast<Eigen::Index>(ids[k]));
      if (bundle.clusters.cluster_count() > 0) {
        labels[k] = assign_label(bundle.clusters, block.col(static_cast<Eigen::Index>(k)));
      }
    }
    const Eigen::MatrixXd out = run_network(bundle, block, labels);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t f = ids[k];
      try {
        result.network_normals[f] = decode_center_normal(
            std::span<const double>(out.col(static_cast<Eigen::Index>(k)).data(), dim), desc.alignments[f]);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroVector) throw;
        fallback[f] = 1;
      }
    }
  });
  for (std::uint8_t v : fallback) result.fallback_faces += v;
  result.timings.inference = seconds_since(t);

  t = Clock::now();
  result.filtered_normals = bilateral_filter(noisy, adj, result.network_normals, cfg.bilateral(), pool);
  result.timings.bilateral = seconds_since(t);

  t = Clock::now();
  result.mesh = update_vertices(noisy, adj, result.filtered_normals, {cfg.vertex_iterations, true}, pool);
  result.timings.vertex_update = seconds_since(t);
  result.timings.total = seconds_since(start);
  return result;
}

Mesh denoise_mesh(const Mesh& noisy, const ModelBundle& bundle, const DenoiseConfig& cfg, ThreadPool* pool) {
  return denoise_mesh_detailed(noisy, bundle, cfg, pool).mesh;
}

}  // namespace mdn
