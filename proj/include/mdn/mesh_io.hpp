#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mdn/mesh.hpp"

namespace mdn {

enum class MeshFormat { Obj, Off };

// OBJ: `v x y z` and `f i j k` records with 1-based (or negative relative)
// indices; `f i/t/n` sub-indices are stripped and other records ignored.
// OFF: `OFF` header, counts line, vertex lines, `3 i j k` face lines.
// Throws ParseError or NonTriangular.
Mesh load_mesh(std::string_view text, MeshFormat format);
std::string save_mesh(const Mesh& mesh, MeshFormat format);

// Format inferred from the extension (.obj / .off, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);
Mesh read_mesh_file(const std::filesystem::path& path);
void write_mesh_file(const Mesh& mesh, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace mdn
