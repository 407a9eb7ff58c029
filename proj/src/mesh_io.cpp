#include "mdn/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "mdn/error.hpp"

namespace mdn {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next line with comments stripped; false at end of input.
  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
      line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++number_;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      return true;
    }
    return false;
  }

  std::size_t line_number() const noexcept { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    parse_fail(line, "bad number '" + std::string(token) + "'");
  }
  return value;
}

long long parse_int(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    parse_fail(line, "bad integer '" + std::string(token) + "'");
  }
  return value;
}

Mesh build_checked(std::vector<Vec3> vertices, std::vector<Face> faces) {
  return Mesh(std::move(vertices), std::move(faces));
}

Mesh load_obj(std::string_view text) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  LineReader reader(text);
  std::string_view line;
  while (reader.next(line)) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::size_t ln = reader.line_number();
    if (tokens[0] == "v") {
      if (tokens.size() < 4) parse_fail(ln, "vertex needs 3 coordinates");
      vertices.emplace_back(parse_double(tokens[1], ln), parse_double(tokens[2], ln),
                            parse_double(tokens[3], ln));
    } else if (tokens[0] == "f") {
      if (tokens.size() != 4) {
        throw Error(ErrorKind::NonTriangular, "line " + std::to_string(ln) + ": face with " +
                                                  std::to_string(tokens.size() - 1) + " vertices");
      }
      Face face{};
      for (int k = 0; k < 3; ++k) {
        std::string_view ref = tokens[k + 1];
        ref = ref.substr(0, ref.find('/'));
        const long long raw = parse_int(ref, ln);
        const long long count = static_cast<long long>(vertices.size());
        const long long index = raw > 0 ? raw - 1 : count + raw;
        if (raw == 0 || index < 0 || index >= count) {
          parse_fail(ln, "vertex index " + std::to_string(raw) + " out of range (" +
                             std::to_string(count) + " vertices)");
        }
        face[k] = static_cast<std::int32_t>(index);
      }
      faces.push_back(face);
    }
  }
  return build_checked(std::move(vertices), std::move(faces));
}

Mesh load_off(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  std::vector<std::string_view> tokens;

  auto next_tokens = [&]() -> bool {
    while (reader.next(line)) {
      tokens = split_ws(line);
      if (!tokens.empty()) return true;
    }
    return false;
  };

  if (!next_tokens()) parse_fail(reader.line_number(), "empty OFF file");
  if (tokens[0] != "OFF" && tokens[0] != "COFF") parse_fail(reader.line_number(), "missing OFF header");
  std::vector<std::string_view> counts(tokens.begin() + 1, tokens.end());
  if (counts.empty()) {
    if (!next_tokens()) parse_fail(reader.line_number(), "missing counts line");
    counts = tokens;
  }
  if (counts.size() < 2) parse_fail(reader.line_number(), "counts line needs vertex and face counts");
  const long long nv = parse_int(counts[0], reader.line_number());
  const long long nf = parse_int(counts[1], reader.line_number());
  if (nv < 0 || nf < 0) parse_fail(reader.line_number(), "negative counts");

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!next_tokens()) parse_fail(reader.line_number(), "unexpected end of vertex list");
    if (tokens.size() < 3) parse_fail(reader.line_number(), "vertex needs 3 coordinates");
    const std::size_t ln = reader.line_number();
    vertices.emplace_back(parse_double(tokens[0], ln), parse_double(tokens[1], ln),
                          parse_double(tokens[2], ln));
  }
  std::vector<Face> faces;
  faces.reserve(static_cast<std::size_t>(nf));
  for (long long i = 0; i < nf; ++i) {
    if (!next_tokens()) parse_fail(reader.line_number(), "unexpected end of face list");
    const std::size_t ln = reader.line_number();
    const long long arity = parse_int(tokens[0], ln);
    if (arity != 3) {
      throw Error(ErrorKind::NonTriangular,
                  "line " + std::to_string(ln) + ": face with " + std::to_string(arity) + " vertices");
    }
    if (tokens.size() < 4) parse_fail(ln, "face needs 3 indices");
    Face face{};
    for (int k = 0; k < 3; ++k) {
      const long long index = parse_int(tokens[k + 1], ln);
      if (index < 0 || index >= nv) {
        parse_fail(ln, "vertex index " + std::to_string(index) + " out of range");
      }
      face[k] = static_cast<std::int32_t>(index);
    }
    faces.push_back(face);
  }
  return build_checked(std::move(vertices), std::move(faces));
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Mesh load_mesh(std::string_view text, MeshFormat format) {
  return format == MeshFormat::Obj ? load_obj(text) : load_off(text);
}

std::string save_mesh(const Mesh& mesh, MeshFormat format) {
  std::string out;
  out.reserve(40 * (mesh.vertex_count() + mesh.face_count()) + 32);
  auto put_xyz = [&](const Vec3& v) {
    out += format_double(v.x());
    out += ' ';
    out += format_double(v.y());
    out += ' ';
    out += format_double(v.z());
  };
  if (format == MeshFormat::Obj) {
    for (const Vec3& v : mesh.vertices()) {
      out += "v ";
      put_xyz(v);
      out += '\n';
    }
    for (const Face& f : mesh.faces()) {
      out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
             std::to_string(f[2] + 1) + '\n';
    }
  } else {
    out += "OFF\n" + std::to_string(mesh.vertex_count()) + ' ' + std::to_string(mesh.face_count()) +
           " 0\n";
    for (const Vec3& v : mesh.vertices()) {
      put_xyz(v);
      out += '\n';
    }
    for (const Face& f : mesh.faces()) {
      out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n';
    }
  }
  return out;
}

MeshFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".off") return MeshFormat::Off;
  throw Error(ErrorKind::InvalidArgument, "unknown mesh extension '" + ext + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Mesh read_mesh_file(const std::filesystem::path& path) {
  const MeshFormat format = format_from_path(path);
  return load_mesh(read_text_file(path), format);
}

void write_mesh_file(const Mesh& mesh, const std::filesystem::path& path) {
  write_text_file(path, save_mesh(mesh, format_from_path(path)));
}

}  // namespace mdn
