#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdn/cluster.hpp"
#include "mdn/filter.hpp"
#include "mdn/mesh.hpp"
#include "mdn/neural.hpp"
#include "mdn/noise.hpp"
#include "mdn/patch.hpp"

namespace mdn {

class ThreadPool;

struct DenoiseConfig {
  std::size_t patch_size = 20;  // n
  std::size_t clusters = 200;   // K
  Vec3 target = Vec3::UnitZ();  // a_c
  AlignmentMode alignment = AlignmentMode::Canonical;
  int bilateral_iterations = 1;  // N_B
  int vertex_iterations = 20;    // N_V
  double sigma2 = 0.15;
  Sigma1Mode sigma1_mode = Sigma1Mode::MeanSquaredDistance;
  std::size_t threads = 1;  // 0 = all hardware threads

  BilateralConfig bilateral() const {
    return {sigma2, bilateral_iterations, patch_size, sigma1_mode};
  }
};

enum class ModelKind : std::uint8_t { Identity = 0, Cvae = 1, Ae = 2 };

struct TrainingProvenance {
  NoiseSpec noise;
  int epochs = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::uint64_t pair_count = 0;
};

// Everything inference needs: descriptor settings, cluster centroids and
// network weights. The Identity kind passes descriptors through unchanged.
struct ModelBundle {
  DenoiseConfig config;
  ClusterModel clusters;
  ModelKind kind = ModelKind::Identity;
  CvaeParams cvae;
  AeParams ae;
  TrainingProvenance provenance;
};

// Byte-exact comparison of the serialized forms.
bool operator==(const ModelBundle& a, const ModelBundle& b);

inline constexpr std::uint32_t kModelFormatVersion = 1;

// 8-byte magic, u32 version, then tagged length-prefixed sections; all
// numbers little-endian, floats as 64-bit IEEE-754.
std::vector<std::uint8_t> save_model(const ModelBundle& bundle);
// Throws CorruptModel, VersionMismatch.
ModelBundle load_model(std::span<const std::uint8_t> bytes);

struct TrainingData {
  TrainingSet set;
  ClusterModel clusters;
  DenoiseConfig config;  // descriptor settings used to build the set
  NoiseSpec noise;
  std::size_t skipped_faces = 0;
};

std::vector<std::uint8_t> save_training_data(const TrainingData& data);
TrainingData load_training_data(std::span<const std::uint8_t> bytes);

// For each face of each clean mesh: the descriptor of the noisy patch
// (input) and the clean normals of the same faces rotated by the noisy
// patch's alignment (target). Labels come from k-means over the noisy
// descriptors. Mesh i is perturbed with seed noise.seed + i. Degenerate
// faces are skipped and counted; InsufficientNeighbors propagates.
TrainingData build_training_set(std::span<const Mesh> clean_meshes, const NoiseSpec& noise,
                                const DenoiseConfig& cfg, std::uint64_t kmeans_seed,
                                ThreadPool* pool = nullptr, int kmeans_max_iter = 100);

struct StageTimings {
  double descriptor = 0.0;
  double inference = 0.0;
  double bilateral = 0.0;
  double vertex_update = 0.0;
  double total = 0.0;
};

struct DenoiseResult {
  Mesh mesh;
  std::vector<Vec3> network_normals;   // after inference and decoding
  std::vector<Vec3> filtered_normals;  // after bilateral filtering
  std::size_t fallback_faces = 0;      // faces that kept their input normal
  StageTimings timings;
};

// Throws ConfigMismatch when cfg disagrees with the bundle's descriptor
// settings (patch size, clusters, target, alignment).
DenoiseResult denoise_mesh_detailed(const Mesh& noisy, const ModelBundle& bundle, const DenoiseConfig& cfg,
                                    ThreadPool* pool = nullptr);
Mesh denoise_mesh(const Mesh& noisy, const ModelBundle& bundle, const DenoiseConfig& cfg,
                  ThreadPool* pool = nullptr);

// Applies the bundle's network to a block of descriptors (one per column).
Eigen::MatrixXd run_network(const ModelBundle& bundle, const Eigen::MatrixXd& descriptors,
                            std::span<const std::int32_t> labels);

}  // namespace mdn
