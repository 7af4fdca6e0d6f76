#include "peelkit/mesh_io.hpp"
#include "peelkit/error.hpp"
#include "peelkit/io_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <unistd.h>

namespace peelkit {

// ---------------------------------------------------------------------------
// File helpers

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for reading", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorKind::Io, fmt::format("failed reading '{}'", path.string()));
  }
  return std::move(buffer).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path temp = path;
  temp += fmt::format(".tmp-{}-{}", ::getpid(), counter.fetch_add(1));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for writing", path.string()));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(temp, ignored);
      throw Error(ErrorKind::Io, fmt::format("failed writing '{}'", path.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(temp, ignored);
    throw Error(ErrorKind::Io, fmt::format("cannot move output into '{}': {}", path.string(), ec.message()));
  }
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

namespace {

[[noreturn]] void format_error(const std::string& message) {
  throw Error(ErrorKind::Format, message);
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    if (i > start) {
      tokens.push_back(line.substr(start, i - start));
    }
  }
  return tokens;
}

double parse_double(std::string_view token) {
  double value = 0.0;
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    format_error(fmt::format("bad number '{}'", token));
  }
  return value;
}

long long parse_integer(std::string_view token) {
  long long value = 0;
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    format_error(fmt::format("bad integer '{}'", token));
  }
  return value;
}

std::uint8_t to_byte(double channel) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(channel, 0.0, 1.0) * 255.0));
}

// --- PLY -------------------------------------------------------------------

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  return std::nullopt;
}

bool is_integral(PlyType type) {
  return type != PlyType::Float32 && type != PlyType::Float64;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  bool binary = true;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;
};

PlyHeader parse_ply_header(std::string_view bytes) {
  PlyHeader header;
  std::size_t pos = 0;
  bool saw_format = false;
  bool first = true;
  for (;;) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) {
      format_error("PLY header is not terminated by end_header");
    }
    std::string_view line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    pos = eol + 1;
    const auto tokens = split_tokens(line);
    if (first) {
      if (tokens.size() != 1 || tokens[0] != "ply") {
        format_error("missing 'ply' magic line");
      }
      first = false;
      continue;
    }
    if (tokens.empty() || tokens[0] == "comment" || tokens[0] == "obj_info") {
      continue;
    }
    if (tokens[0] == "format") {
      if (tokens.size() < 2) {
        format_error("incomplete PLY format line");
      }
      if (tokens[1] == "ascii") {
        header.binary = false;
      } else if (tokens[1] == "binary_little_endian") {
        header.binary = true;
      } else {
        format_error(fmt::format("unsupported PLY format '{}'", tokens[1]));
      }
      saw_format = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) {
        format_error("malformed PLY element line");
      }
      const long long count = parse_integer(tokens[2]);
      if (count < 0) {
        format_error("negative PLY element count");
      }
      header.elements.push_back({std::string(tokens[1]), static_cast<std::size_t>(count), {}});
    } else if (tokens[0] == "property") {
      if (header.elements.empty()) {
        format_error("PLY property before any element");
      }
      PlyProperty property;
      if (tokens.size() == 5 && tokens[1] == "list") {
        const auto count_type = ply_type(tokens[2]);
        const auto item_type = ply_type(tokens[3]);
        if (!count_type || !item_type || !is_integral(*count_type)) {
          format_error("bad PLY list property types");
        }
        property = {std::string(tokens[4]), *item_type, true, *count_type};
      } else if (tokens.size() == 3) {
        const auto type = ply_type(tokens[1]);
        if (!type) {
          format_error(fmt::format("unknown PLY type '{}'", tokens[1]));
        }
        property = {std::string(tokens[2]), *type, false, PlyType::UInt8};
      } else {
        format_error("malformed PLY property line");
      }
      header.elements.back().properties.push_back(property);
    } else if (tokens[0] == "end_header") {
      break;
    } else {
      format_error(fmt::format("unexpected PLY header keyword '{}'", tokens[0]));
    }
  }
  if (!saw_format) {
    format_error("PLY header lacks a format line");
  }
  header.body_offset = pos;
  return header;
}

// Reads scalar values from either encoding of a PLY body.
class PlyReader {
 public:
  PlyReader(std::string_view body, bool binary) : body_(body), binary_(binary) {}

  double read(PlyType type) {
    return binary_ ? read_binary(type) : read_ascii(type);
  }

 private:
  template <typename T>
  T take() {
    if (pos_ + sizeof(T) > body_.size()) {
      format_error("PLY body is truncated");
    }
    T value;
    std::memcpy(&value, body_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  double read_binary(PlyType type) {
    switch (type) {
      case PlyType::Int8:
        return take<std::int8_t>();
      case PlyType::UInt8:
        return take<std::uint8_t>();
      case PlyType::Int16:
        return take<std::int16_t>();
      case PlyType::UInt16:
        return take<std::uint16_t>();
      case PlyType::Int32:
        return take<std::int32_t>();
      case PlyType::UInt32:
        return take<std::uint32_t>();
      case PlyType::Float32:
        return take<float>();
      case PlyType::Float64:
        return take<double>();
    }
    return 0.0;
  }

  double read_ascii(PlyType type) {
    while (pos_ < body_.size() && std::isspace(static_cast<unsigned char>(body_[pos_]))) {
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < body_.size() && !std::isspace(static_cast<unsigned char>(body_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) {
      format_error("PLY body is truncated");
    }
    const std::string_view token = body_.substr(start, pos_ - start);
    return is_integral(type) ? static_cast<double>(parse_integer(token)) : parse_double(token);
  }

  std::string_view body_;
  bool binary_;
  std::size_t pos_ = 0;
};

struct PlyContents {
  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;
  std::vector<std::uint16_t> layers;
  std::vector<Face> faces;
};

PlyContents parse_ply(std::string_view bytes) {
  const PlyHeader header = parse_ply_header(bytes);
  PlyReader reader(bytes.substr(header.body_offset), header.binary);
  PlyContents contents;
  for (const PlyElement& element : header.elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, il = -1;
    int list_index = -1;
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      const auto& name = element.properties[p].name;
      const int i = static_cast<int>(p);
      if (name == "x") ix = i;
      else if (name == "y") iy = i;
      else if (name == "z") iz = i;
      else if (name == "red" || name == "r") ir = i;
      else if (name == "green" || name == "g") ig = i;
      else if (name == "blue" || name == "b") ib = i;
      else if (name == "layer") il = i;
      else if (element.properties[p].is_list && (name == "vertex_indices" || name == "vertex_index")) list_index = i;
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      format_error("PLY vertex element lacks x, y or z");
    }
    if (is_face && list_index < 0) {
      format_error("PLY face element lacks vertex_indices");
    }
    const bool has_color = is_vertex && ir >= 0 && ig >= 0 && ib >= 0;
    std::vector<double> scalars(element.properties.size());
    std::vector<std::uint32_t> polygon;
    for (std::size_t row = 0; row < element.count; ++row) {
      for (std::size_t p = 0; p < element.properties.size(); ++p) {
        const PlyProperty& property = element.properties[p];
        if (!property.is_list) {
          scalars[p] = reader.read(property.type);
          continue;
        }
        const double count = reader.read(property.count_type);
        if (count < 0) {
          format_error("negative PLY list length");
        }
        polygon.clear();
        for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
          const double index = reader.read(property.type);
          if (static_cast<int>(p) == list_index) {
            if (index < 0) {
              format_error("negative PLY vertex index");
            }
            polygon.push_back(static_cast<std::uint32_t>(index));
          }
        }
        if (is_face && static_cast<int>(p) == list_index) {
          if (polygon.size() < 3) {
            format_error("PLY face with fewer than 3 vertices");
          }
          for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
            contents.faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
          }
        }
      }
      if (is_vertex) {
        contents.vertices.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
        if (has_color) {
          Vec3 color(scalars[ir], scalars[ig], scalars[ib]);
          if (is_integral(element.properties[ir].type)) {
            color /= 255.0;
          }
          contents.colors.push_back(color);
        }
        if (il >= 0) {
          contents.layers.push_back(static_cast<std::uint16_t>(scalars[il]));
        }
      }
    }
  }
  return contents;
}

void append_bytes(std::string& out, const void* data, std::size_t size) {
  out.append(static_cast<const char*>(data), size);
}

template <typename T>
void append_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  append_bytes(out, &value, sizeof(T));
}

} // namespace

// ---------------------------------------------------------------------------
// OBJ

TriangleMesh parse_obj(std::string_view text) {
  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;
  std::vector<Face> faces;
  std::size_t colored = 0;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      eol = text.size();
    }
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    const auto tokens = split_tokens(line.substr(0, line.find('#')));
    if (tokens.empty()) {
      continue;
    }
    if (tokens[0] == "v") {
      if (tokens.size() != 4 && tokens.size() != 5 && tokens.size() != 7) {
        format_error(fmt::format("OBJ line {}: vertex needs 3, 4 or 6 values", line_number));
      }
      vertices.emplace_back(parse_double(tokens[1]), parse_double(tokens[2]), parse_double(tokens[3]));
      if (tokens.size() == 7) {
        colors.emplace_back(parse_double(tokens[4]), parse_double(tokens[5]), parse_double(tokens[6]));
        ++colored;
      } else {
        colors.emplace_back(Vec3::Zero());
      }
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) {
        format_error(fmt::format("OBJ line {}: face needs at least 3 vertices", line_number));
      }
      std::vector<std::uint32_t> polygon;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        const long long raw = parse_integer(tokens[k].substr(0, tokens[k].find('/')));
        const long long index = raw < 0 ? static_cast<long long>(vertices.size()) + raw : raw - 1;
        if (raw == 0 || index < 0) {
          format_error(fmt::format("OBJ line {}: bad vertex index {}", line_number, raw));
        }
        polygon.push_back(static_cast<std::uint32_t>(index));
      }
      for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
        faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
      }
    }
  }
  if (colored != 0 && colored != vertices.size()) {
    format_error("OBJ mixes colored and uncolored vertices");
  }
  if (colored == 0) {
    colors.clear();
  }
  try {
    return TriangleMesh(std::move(vertices), std::move(faces), std::move(colors));
  } catch (const Error& e) {
    format_error(e.what());
  }
}

std::string format_obj(const TriangleMesh& mesh) {
  std::string out;
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& v = mesh.vertices()[i];
    if (mesh.has_colors()) {
      const Vec3& c = mesh.colors()[i];
      fmt::format_to(std::back_inserter(out), "v {} {} {} {} {} {}\n", v.x(), v.y(), v.z(), c.x(), c.y(), c.z());
    } else {
      fmt::format_to(std::back_inserter(out), "v {} {} {}\n", v.x(), v.y(), v.z());
    }
  }
  for (const Face& f : mesh.faces()) {
    fmt::format_to(std::back_inserter(out), "f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PLY

TriangleMesh parse_ply_mesh(std::string_view bytes) {
  PlyContents contents = parse_ply(bytes);
  try {
    return TriangleMesh(std::move(contents.vertices), std::move(contents.faces), std::move(contents.colors));
  } catch (const Error& e) {
    format_error(e.what());
  }
}

std::string format_ply_mesh(const TriangleMesh& mesh) {
  std::string out = "ply\nformat binary_little_endian 1.0\ncomment peelkit mesh\n";
  out += fmt::format("element vertex {}\n", mesh.vertex_count());
  out += "property float x\nproperty float y\nproperty float z\n";
  if (mesh.has_colors()) {
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out += fmt::format("element face {}\n", mesh.face_count());
  out += "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& v = mesh.vertices()[i];
    append_le(out, static_cast<float>(v.x()));
    append_le(out, static_cast<float>(v.y()));
    append_le(out, static_cast<float>(v.z()));
    if (mesh.has_colors()) {
      const Vec3& c = mesh.colors()[i];
      append_le(out, to_byte(c.x()));
      append_le(out, to_byte(c.y()));
      append_le(out, to_byte(c.z()));
    }
  }
  for (const Face& f : mesh.faces()) {
    append_le(out, std::uint8_t{3});
    for (std::uint32_t index : f) {
      append_le(out, static_cast<std::int32_t>(index));
    }
  }
  return out;
}

ColoredPointCloud parse_ply_points(std::string_view bytes) {
  PlyContents contents = parse_ply(bytes);
  ColoredPointCloud cloud;
  cloud.points = std::move(contents.vertices);
  cloud.colors = std::move(contents.colors);
  cloud.layer_ids = std::move(contents.layers);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.points[i].allFinite()) {
      format_error(fmt::format("point {} is not finite", i));
    }
  }
  return cloud;
}

std::string format_ply_points(const ColoredPointCloud& cloud) {
  const bool colored = cloud.has_colors();
  const bool layered = !cloud.layer_ids.empty();
  std::string out = "ply\nformat binary_little_endian 1.0\ncomment peelkit point cloud\n";
  out += fmt::format("element vertex {}\n", cloud.size());
  out += "property double x\nproperty double y\nproperty double z\n";
  if (colored) {
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  if (layered) {
    out += "property ushort layer\n";
  }
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    append_le(out, p.x());
    append_le(out, p.y());
    append_le(out, p.z());
    if (colored) {
      append_le(out, to_byte(cloud.colors[i].x()));
      append_le(out, to_byte(cloud.colors[i].y()));
      append_le(out, to_byte(cloud.colors[i].z()));
    }
    if (layered) {
      append_le(out, cloud.layer_ids[i]);
    }
  }
  return out;
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext != ".obj" && ext != ".ply") {
    throw Error(ErrorKind::Format, fmt::format("unsupported mesh extension '{}'", ext));
  }
  const std::string bytes = read_file(path);
  return ext == ".obj" ? parse_obj(bytes) : parse_ply_mesh(bytes);
}

void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
  const std::string ext = lower_extension(path);
  if (ext == ".obj") {
    write_file_atomic(path, format_obj(mesh));
  } else if (ext == ".ply") {
    write_file_atomic(path, format_ply_mesh(mesh));
  } else {
    throw Error(ErrorKind::Format, fmt::format("unsupported mesh extension '{}'", ext));
  }
}

ColoredPointCloud read_point_cloud(const std::filesystem::path& path) {
  if (lower_extension(path) != ".ply") {
    throw Error(ErrorKind::Format, "point clouds are read from .ply files");
  }
  return parse_ply_points(read_file(path));
}

void write_point_cloud(const std::filesystem::path& path, const ColoredPointCloud& cloud) {
  write_file_atomic(path, format_ply_points(cloud));
}

} // namespace peelkit
