#include "mdn/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "mdn/error.hpp"

namespace mdn {

namespace {

// Guards against absurd sizes in corrupt files before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

}  // namespace

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::text(std::string_view s) {
  u64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ByteWriter::matrix(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
}

void ByteWriter::vector(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
}

void ByteWriter::section(std::string_view tag, const ByteWriter& payload) {
  if (tag.size() != 4) throw Error(ErrorKind::InvalidArgument, "section tags are 4 characters");
  bytes_.insert(bytes_.end(), tag.begin(), tag.end());
  u64(payload.bytes().size());
  raw(payload.bytes());
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw Error(ErrorKind::CorruptModel, "unexpected end of data");
  const auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  const auto b = raw(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  const auto b = raw(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::text() {
  const std::uint64_t n = u64();
  if (n > remaining()) throw Error(ErrorKind::CorruptModel, "string length exceeds the data");
  const auto b = raw(static_cast<std::size_t>(n));
  return std::string(b.begin(), b.end());
}

Eigen::MatrixXd ByteReader::matrix() {
  const std::uint64_t rows = u64();
  const std::uint64_t cols = u64();
  if (rows > kMaxElements || cols > kMaxElements || (cols != 0 && rows > kMaxElements / cols) ||
      rows * cols * 8 > remaining()) {
    throw Error(ErrorKind::CorruptModel, "matrix size exceeds the data");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
  return m;
}

Eigen::VectorXd ByteReader::vector() {
  const std::uint64_t n = u64();
  if (n > kMaxElements || n * 8 > remaining()) throw Error(ErrorKind::CorruptModel, "vector size exceeds the data");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
  return v;
}

ByteReader::Section ByteReader::section() {
  const auto tag = raw(4);
  const std::uint64_t n = u64();
  if (n > remaining()) throw Error(ErrorKind::CorruptModel, "section length exceeds the data");
  return {std::string(tag.begin(), tag.end()), ByteReader(raw(static_cast<std::size_t>(n)))};
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace mdn
