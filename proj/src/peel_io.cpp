#include "peelkit/peel_io.hpp"
#include "peelkit/error.hpp"
#include "peelkit/io_util.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <png.h>

#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>

namespace peelkit {

namespace {

static_assert(std::endian::native == std::endian::little, "PEEL I/O assumes a little-endian host");

constexpr char kMagic[4] = {'P', 'E', 'E', 'L'};

template <typename T>
void put(std::string& out, T value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::string header_bytes(std::uint8_t flags, std::size_t layers, std::uint32_t width, std::uint32_t height) {
  std::string out(kMagic, 4);
  put(out, kPeelVersion);
  put(out, flags);
  put(out, static_cast<std::uint16_t>(layers));
  put(out, width);
  put(out, height);
  return out;
}

std::size_t expected_size(const PeelHeader& header) {
  const std::size_t cells = static_cast<std::size_t>(header.layers) * header.width * header.height;
  std::size_t size = kPeelHeaderSize + 4 * cells;
  if (header.flags & kPeelFlagRgb) {
    size += 12 * cells;
  }
  if (header.flags & kPeelFlagResidual) {
    size += (cells + 7) / 8;
  }
  return size;
}

void check_against_camera(const PeelHeader& header, const PinholeCamera& camera, std::string_view bytes) {
  if (header.width != camera.width() || header.height != camera.height()) {
    throw Error(
        ErrorKind::Format,
        fmt::format(
            "container is {}x{} but its camera is {}x{}",
            header.width,
            header.height,
            camera.width(),
            camera.height()));
  }
  if (header.layers == 0) {
    throw Error(ErrorKind::Format, "container declares zero layers");
  }
  if (bytes.size() != expected_size(header)) {
    throw Error(
        ErrorKind::Format,
        fmt::format("container holds {} bytes, expected {}", bytes.size(), expected_size(header)));
  }
}

[[noreturn]] void json_error(const std::string& message) {
  throw Error(ErrorKind::Format, "camera JSON: " + message);
}

struct PngSink {
  std::string bytes;
};

void png_write_to_string(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<PngSink*>(png_get_io_ptr(png));
  sink->bytes.append(reinterpret_cast<const char*>(data), length);
}

void png_flush_noop(png_structp) {}

// Returns false if libpng reported an error.
bool encode_png16(std::uint32_t width, std::uint32_t height, std::vector<png_byte>& pixels, PngSink& sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  std::vector<png_bytep> rows(height);
  for (std::uint32_t y = 0; y < height; ++y) {
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * 2;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &sink, png_write_to_string, png_flush_noop);
  png_set_IHDR(
      png,
      info,
      width,
      height,
      16,
      PNG_COLOR_TYPE_GRAY,
      PNG_INTERLACE_NONE,
      PNG_COMPRESSION_TYPE_DEFAULT,
      PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

} // namespace

PeelHeader parse_peel_header(std::string_view bytes) {
  if (bytes.size() < kPeelHeaderSize) {
    throw Error(ErrorKind::Format, "file too short for a PEEL header");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::Format, "bad magic, not a PEEL container");
  }
  PeelHeader header;
  header.version = get<std::uint8_t>(bytes, 4);
  header.flags = get<std::uint8_t>(bytes, 5);
  header.layers = get<std::uint16_t>(bytes, 6);
  header.width = get<std::uint32_t>(bytes, 8);
  header.height = get<std::uint32_t>(bytes, 12);
  if (header.version != kPeelVersion) {
    throw Error(ErrorKind::Format, fmt::format("unsupported PEEL version {}", header.version));
  }
  if (header.flags & ~(kPeelFlagRgb | kPeelFlagResidual)) {
    throw Error(ErrorKind::Format, fmt::format("unknown PEEL flags 0x{:02x}", header.flags));
  }
  return header;
}

std::string serialize_peel(const PeeledMapStack& stack) {
  const std::uint8_t flags = stack.has_rgb() ? kPeelFlagRgb : 0;
  std::string out = header_bytes(flags, stack.layers(), stack.width(), stack.height());
  out.reserve(kPeelHeaderSize + 4 * (stack.depth_data().size() + stack.rgb_data().size()));
  for (float d : stack.depth_data()) {
    put(out, d);
  }
  for (float c : stack.rgb_data()) {
    put(out, c);
  }
  return out;
}

std::string serialize_rd(const ResidualDeformationStack& rd) {
  std::string out = header_bytes(kPeelFlagResidual, rd.layers(), rd.width(), rd.height());
  for (double d : rd.delta_data()) {
    put(out, static_cast<float>(d));
  }
  const auto valid = rd.validity_data();
  std::string bitmap((valid.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i]) {
      bitmap[i / 8] = static_cast<char>(static_cast<unsigned char>(bitmap[i / 8]) | (1u << (i % 8)));
    }
  }
  out += bitmap;
  return out;
}

PeeledMapStack deserialize_peel(std::string_view bytes, const PinholeCamera& camera) {
  const PeelHeader header = parse_peel_header(bytes);
  if (header.flags & kPeelFlagResidual) {
    throw Error(ErrorKind::Format, "container holds residual offsets, not depths");
  }
  check_against_camera(header, camera, bytes);
  PeeledMapStack stack(camera, header.layers, (header.flags & kPeelFlagRgb) != 0);
  std::size_t offset = kPeelHeaderSize;
  for (float& d : stack.depth_data()) {
    d = get<float>(bytes, offset);
    offset += 4;
  }
  for (float& c : stack.rgb_data()) {
    c = get<float>(bytes, offset);
    offset += 4;
  }
  return stack;
}

ResidualDeformationStack deserialize_rd(std::string_view bytes, const PinholeCamera& camera) {
  const PeelHeader header = parse_peel_header(bytes);
  if (!(header.flags & kPeelFlagResidual) || (header.flags & kPeelFlagRgb)) {
    throw Error(ErrorKind::Format, "container does not hold residual offsets");
  }
  check_against_camera(header, camera, bytes);
  ResidualDeformationStack rd(camera, header.layers);
  const std::size_t cells = rd.layers() * rd.pixels();
  const std::size_t bitmap = kPeelHeaderSize + 4 * cells;
  for (std::size_t i = 0; i < cells; ++i) {
    const double delta = get<float>(bytes, kPeelHeaderSize + 4 * i);
    const bool valid = (static_cast<unsigned char>(bytes[bitmap + i / 8]) >> (i % 8)) & 1u;
    const std::size_t layer = i / rd.pixels();
    const std::size_t pixel = i % rd.pixels();
    rd.set(
        layer,
        static_cast<std::uint32_t>(pixel / rd.width()),
        static_cast<std::uint32_t>(pixel % rd.width()),
        delta,
        valid);
  }
  return rd;
}

std::string format_camera_json(const PinholeCamera& camera) {
  nlohmann::ordered_json j;
  j["fx"] = camera.fx();
  j["fy"] = camera.fy();
  j["cx"] = camera.cx();
  j["cy"] = camera.cy();
  j["width"] = camera.width();
  j["height"] = camera.height();
  const Eigen::Matrix4d m = camera.pose().matrix();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  }
  j["world_to_camera"] = rows;
  return j.dump(2) + "\n";
}

PinholeCamera parse_camera_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    json_error(e.what());
  }
  if (!j.is_object()) {
    json_error("top level must be an object");
  }
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      json_error(fmt::format("missing numeric '{}'", key));
    }
    return j[key].get<double>();
  };
  auto size = [&](const char* key) {
    const double value = number(key);
    if (value < 1 || value > 1 << 20 || value != std::floor(value)) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("camera {} must be a positive integer", key));
    }
    return static_cast<std::uint32_t>(value);
  };
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  if (j.contains("world_to_camera")) {
    const auto& pose = j["world_to_camera"];
    std::vector<double> values;
    if (!pose.is_array()) {
      json_error("'world_to_camera' must be an array");
    }
    for (const auto& item : pose) {
      if (item.is_array()) {
        for (const auto& v : item) {
          if (!v.is_number()) {
            json_error("'world_to_camera' entries must be numbers");
          }
          values.push_back(v.get<double>());
        }
      } else if (item.is_number()) {
        values.push_back(item.get<double>());
      } else {
        json_error("'world_to_camera' entries must be numbers");
      }
    }
    if (values.size() != 16) {
      json_error("'world_to_camera' needs 16 values");
    }
    for (int i = 0; i < 16; ++i) {
      m(i / 4, i % 4) = values[i];
    }
  }
  return PinholeCamera(
      number("fx"), number("fy"), number("cx"), number("cy"), size("width"), size("height"), RigidTransform::from_matrix(m));
}

PinholeCamera read_camera(const std::filesystem::path& path) {
  return parse_camera_json(read_file(path));
}

void write_camera(const std::filesystem::path& path, const PinholeCamera& camera) {
  write_file_atomic(path, format_camera_json(camera));
}

std::filesystem::path camera_sidecar_path(const std::filesystem::path& peel_path) {
  std::filesystem::path sidecar = peel_path;
  sidecar.replace_extension(".camera.json");
  return sidecar;
}

void write_peel(const std::filesystem::path& path, const PeeledMapStack& stack) {
  write_camera(camera_sidecar_path(path), stack.camera());
  write_file_atomic(path, serialize_peel(stack));
}

void write_rd(const std::filesystem::path& path, const ResidualDeformationStack& rd) {
  write_camera(camera_sidecar_path(path), rd.camera());
  write_file_atomic(path, serialize_rd(rd));
}

PeeledMapStack read_peel(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  parse_peel_header(bytes);
  return deserialize_peel(bytes, read_camera(camera_sidecar_path(path)));
}

ResidualDeformationStack read_rd(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  parse_peel_header(bytes);
  return deserialize_rd(bytes, read_camera(camera_sidecar_path(path)));
}

std::vector<std::filesystem::path> export_depth_png(
    const PeeledMapStack& stack,
    const std::filesystem::path& prefix,
    double min_depth,
    double max_depth) {
  if (!(max_depth > min_depth)) {
    throw Error(ErrorKind::InvalidArgument, "PNG depth range needs max > min");
  }
  std::vector<std::filesystem::path> written;
  std::vector<png_byte> pixels(stack.pixels() * 2);
  for (std::size_t layer = 0; layer < stack.layers(); ++layer) {
    const auto depths = stack.depth_layer(layer);
    for (std::size_t i = 0; i < depths.size(); ++i) {
      std::uint16_t level = 0;
      if (depths[i] != 0.0f) {
        const double unit = std::clamp((depths[i] - min_depth) / (max_depth - min_depth), 0.0, 1.0);
        level = static_cast<std::uint16_t>(1 + std::lround(unit * 65534.0));
      }
      pixels[2 * i] = static_cast<png_byte>(level >> 8);
      pixels[2 * i + 1] = static_cast<png_byte>(level & 0xFF);
    }
    PngSink sink;
    if (!encode_png16(stack.width(), stack.height(), pixels, sink)) {
      throw Error(ErrorKind::Io, "PNG encoding failed");
    }
    std::filesystem::path path = prefix;
    path += fmt::format("_layer{}.png", layer + 1);
    write_file_atomic(path, sink.bytes);
    written.push_back(path);
  }
  return written;
}

} // namespace peelkit
