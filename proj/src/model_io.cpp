#include <algorithm>
#include <cstring>
#include <map>
#include <string>

#include "mdn/binary_io.hpp"
#include "mdn/error.hpp"
#include "mdn/pipeline.hpp"

namespace mdn {

namespace {

constexpr char kModelMagic[8] = {'M', 'D', 'N', 'M', 'O', 'D', 'E', 'L'};
constexpr char kTrainsetMagic[8] = {'M', 'D', 'N', 'T', 'R', 'S', 'E', 'T'};

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::CorruptModel, what); }

void write_config(ByteWriter& w, const DenoiseConfig& c) {
  w.u64(c.patch_size);
  w.u64(c.clusters);
  for (int k = 0; k < 3; ++k) w.f64(c.target[k]);
  w.u8(static_cast<std::uint8_t>(c.alignment));
  w.i32(c.bilateral_iterations);
  w.i32(c.vertex_iterations);
  w.f64(c.sigma2);
  w.u8(static_cast<std::uint8_t>(c.sigma1_mode));
}

DenoiseConfig read_config(ByteReader& r) {
  DenoiseConfig c;
  c.patch_size = r.u64();
  c.clusters = r.u64();
  for (int k = 0; k < 3; ++k) c.target[k] = r.f64();
  const std::uint8_t alignment = r.u8();
  if (alignment > 1) corrupt("unknown alignment mode");
  c.alignment = static_cast<AlignmentMode>(alignment);
  c.bilateral_iterations = r.i32();
  c.vertex_iterations = r.i32();
  c.sigma2 = r.f64();
  const std::uint8_t sigma1 = r.u8();
  if (sigma1 > 1) corrupt("unknown sigma1 mode");
  c.sigma1_mode = static_cast<Sigma1Mode>(sigma1);
  return c;
}

void write_clusters(ByteWriter& w, const ClusterModel& m) {
  w.u64(m.seed);
  w.matrix(m.centroids);
}

ClusterModel read_clusters(ByteReader& r) {
  ClusterModel m;
  m.seed = r.u64();
  m.centroids = r.matrix();
  return m;
}

void write_noise(ByteWriter& w, const NoiseSpec& n) {
  w.f64(n.mu);
  w.f64(n.beta);
  w.u64(n.seed);
}

NoiseSpec read_noise(ByteReader& r) {
  NoiseSpec n;
  n.mu = r.f64();
  n.beta = r.f64();
  n.seed = r.u64();
  return n;
}

void write_layers(ByteWriter& w, const std::vector<DenseLayer>& layers) {
  w.u64(layers.size());
  for (const auto& layer : layers) {
    w.matrix(layer.weight);
    w.vector(layer.bias);
  }
}

std::vector<DenseLayer> read_layers(ByteReader& r) {
  const std::uint64_t count = r.u64();
  if (count > 64) corrupt("implausible layer count");
  std::vector<DenseLayer> layers(count);
  for (auto& layer : layers) {
    layer.weight = r.matrix();
    layer.bias = r.vector();
  }
  return layers;
}

void write_network(ByteWriter& w, const ModelBundle& b) {
  w.u8(static_cast<std::uint8_t>(b.kind));
  if (b.kind == ModelKind::Cvae) {
    const CvaeShape& s = b.cvae.shape;
    for (std::size_t v : {s.input_dim, s.label_count, s.latent_dim, s.enc_hidden1, s.enc_hidden2,
                          s.dec_hidden1, s.dec_hidden2}) {
      w.u64(v);
    }
    w.u8(static_cast<std::uint8_t>(s.activation));
    write_layers(w, b.cvae.layers);
  } else if (b.kind == ModelKind::Ae) {
    w.u64(b.ae.shape.input_dim);
    w.u64(b.ae.shape.hidden.size());
    for (std::size_t h : b.ae.shape.hidden) w.u64(h);
    write_layers(w, b.ae.layers);
  }
}

void read_network(ByteReader& r, ModelBundle& b) {
  const std::uint8_t kind = r.u8();
  if (kind > 2) corrupt("unknown model kind");
  b.kind = static_cast<ModelKind>(kind);
  try {
    if (b.kind == ModelKind::Cvae) {
      CvaeShape& s = b.cvae.shape;
      for (std::size_t* v : {&s.input_dim, &s.label_count, &s.latent_dim, &s.enc_hidden1, &s.enc_hidden2,
                             &s.dec_hidden1, &s.dec_hidden2}) {
        *v = r.u64();
      }
      const std::uint8_t act = r.u8();
      if (act > 1) corrupt("unknown activation");
      s.activation = static_cast<Activation>(act);
      b.cvae.layers = read_layers(r);
      validate(b.cvae);
    } else if (b.kind == ModelKind::Ae) {
      b.ae.shape.input_dim = r.u64();
      const std::uint64_t depth = r.u64();
      if (depth > 62) corrupt("implausible AE depth");
      b.ae.shape.hidden.resize(depth);
      for (auto& h : b.ae.shape.hidden) h = r.u64();
      b.ae.layers = read_layers(r);
      validate(b.ae);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ShapeMismatch) corrupt(std::string("network section: ") + e.what());
    throw;
  }
}

void write_provenance(ByteWriter& w, const TrainingProvenance& p) {
  write_noise(w, p.noise);
  w.i32(p.epochs);
  w.u64(p.seed);
  w.f64(p.final_loss);
  w.u64(p.pair_count);
}

TrainingProvenance read_provenance(ByteReader& r) {
  TrainingProvenance p;
  p.noise = read_noise(r);
  p.epochs = r.i32();
  p.seed = r.u64();
  p.final_loss = r.f64();
  p.pair_count = r.u64();
  return p;
}

void write_header(ByteWriter& w, const char (&magic)[8]) {
  w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(magic), 8));
  w.u32(kModelFormatVersion);
}

// Checks magic and version, then splits the remainder into sections.
std::map<std::string, ByteReader> read_sections(std::span<const std::uint8_t> bytes, const char (&magic)[8]) {
  ByteReader r(bytes);
  const auto head = r.raw(8);
  if (std::memcmp(head.data(), magic, 8) != 0) corrupt("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "file version " + std::to_string(version) + ", expected " +
                                                std::to_string(kModelFormatVersion));
  }
  std::map<std::string, ByteReader> sections;
  while (!r.at_end()) {
    auto s = r.section();
    sections.insert_or_assign(s.tag, s.payload);
  }
  return sections;
}

ByteReader& need(std::map<std::string, ByteReader>& sections, const std::string& tag) {
  const auto it = sections.find(tag);
  if (it == sections.end()) corrupt("missing section " + tag);
  return it->second;
}

void expect_end(const ByteReader& r, const std::string& tag) {
  if (!r.at_end()) corrupt("trailing bytes in section " + tag);
}

}  // namespace

std::vector<std::uint8_t> save_model(const ModelBundle& bundle) {
  ByteWriter w;
  write_header(w, kModelMagic);
  ByteWriter conf, clus, netw, prov;
  write_config(conf, bundle.config);
  write_clusters(clus, bundle.clusters);
  write_network(netw, bundle);
  write_provenance(prov, bundle.provenance);
  w.section("CONF", conf);
  w.section("CLUS", clus);
  w.section("NETW", netw);
  w.section("PROV", prov);
  return w.take();
}

ModelBundle load_model(std::span<const std::uint8_t> bytes) {
  auto sections = read_sections(bytes, kModelMagic);
  ModelBundle b;
  b.config = read_config(need(sections, "CONF"));
  expect_end(need(sections, "CONF"), "CONF");
  b.clusters = read_clusters(need(sections, "CLUS"));
  expect_end(need(sections, "CLUS"), "CLUS");
  read_network(need(sections, "NETW"), b);
  expect_end(need(sections, "NETW"), "NETW");
  b.provenance = read_provenance(need(sections, "PROV"));
  expect_end(need(sections, "PROV"), "PROV");

  const std::size_t dim = descriptor_length(b.config.patch_size);
  if (b.clusters.cluster_count() != b.config.clusters ||
      (b.clusters.cluster_count() > 0 && b.clusters.dimension() != dim)) {
    corrupt("cluster centroids disagree with the configuration");
  }
  if (b.kind == ModelKind::Cvae &&
      (b.cvae.shape.input_dim != dim || b.cvae.shape.label_count != b.config.clusters)) {
    corrupt("CVAE shape disagrees with the configuration");
  }
  if (b.kind == ModelKind::Ae && b.ae.shape.input_dim != dim) corrupt("AE shape disagrees with the configuration");
  return b;
}

bool operator==(const ModelBundle& a, const ModelBundle& b) { return save_model(a) == save_model(b); }

std::vector<std::uint8_t> save_training_data(const TrainingData& data) {
  ByteWriter w;
  write_header(w, kTrainsetMagic);
  ByteWriter conf, clus, nois, pairs;
  write_config(conf, data.config);
  write_clusters(clus, data.clusters);
  write_noise(nois, data.noise);
  nois.u64(data.skipped_faces);
  pairs.u64(data.set.label_count);
  pairs.matrix(data.set.noisy);
  pairs.matrix(data.set.clean);
  pairs.u64(data.set.labels.size());
  for (std::int32_t l : data.set.labels) pairs.i32(l);
  w.section("CONF", conf);
  w.section("CLUS", clus);
  w.section("NOIS", nois);
  w.section("PAIR", pairs);
  return w.take();
}

TrainingData load_training_data(std::span<const std::uint8_t> bytes) {
  auto sections = read_sections(bytes, kTrainsetMagic);
  TrainingData d;
  d.config = read_config(need(sections, "CONF"));
  d.clusters = read_clusters(need(sections, "CLUS"));
  ByteReader& nois = need(sections, "NOIS");
  d.noise = read_noise(nois);
  d.skipped_faces = nois.u64();
  ByteReader& pairs = need(sections, "PAIR");
  d.set.label_count = pairs.u64();
  d.set.noisy = pairs.matrix();
  d.set.clean = pairs.matrix();
  const std::uint64_t count = pairs.u64();
  if (count != static_cast<std::uint64_t>(d.set.noisy.cols()) || d.set.clean.cols() != d.set.noisy.cols() ||
      d.set.clean.rows() != d.set.noisy.rows() || count * 4 > pairs.remaining()) {
    corrupt("training pair block is inconsistent");
  }
  d.set.labels.resize(count);
  for (auto& l : d.set.labels) l = pairs.i32();
  expect_end(pairs, "PAIR");
  return d;
}

}  // namespace mdn
