#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mdn {

// Little-endian writer; doubles are stored as their IEEE-754 bit pattern.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v);
  void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  void text(std::string_view s);
  // rows, cols, then column-major entries.
  void matrix(const Eigen::MatrixXd& m);
  void vector(const Eigen::VectorXd& v);

  // Appends `tag`, the payload length, then the payload.
  void section(std::string_view tag, const ByteWriter& payload);

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Reader over a byte span. Any read past the end throws CorruptModel.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64();
  std::span<const std::uint8_t> raw(std::size_t n);
  std::string text();
  Eigen::MatrixXd matrix();
  Eigen::VectorXd vector();

  struct Section;
  Section section();

  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

struct ByteReader::Section {
  std::string tag;
  ByteReader payload;
};

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace mdn
