#include "seg/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace seg::io {
namespace fs = std::filesystem;
namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  fs::path p = stem;
  p += suffix;
  return p;
}

std::uint64_t byteswap64(std::uint64_t x) {
  std::uint64_t out = 0;
  for (int b = 0; b < 8; ++b) {
    out = (out << 8) | (x & 0xff);
    x >>= 8;
  }
  return out;
}

void write_bytes(const fs::path& path, const char* data, std::size_t size) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(data, static_cast<std::streamsize>(size));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, text.data(), text.size());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<char> encode_doubles_le(const std::vector<double>& values) {
  std::vector<char> bytes(values.size() * 8);
  for (std::size_t k = 0; k < values.size(); ++k) {
    auto bits = std::bit_cast<std::uint64_t>(values[k]);
    if constexpr (std::endian::native == std::endian::big) bits = byteswap64(bits);
    std::memcpy(bytes.data() + 8 * k, &bits, 8);
  }
  return bytes;
}

std::vector<double> decode_doubles_le(const std::string& bytes) {
  if (bytes.size() % 8 != 0) throw std::invalid_argument("raw dump size is not a multiple of 8");
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes.data() + 8 * k, 8);
    if constexpr (std::endian::native == std::endian::big) bits = byteswap64(bits);
    values[k] = std::bit_cast<double>(bits);
  }
  return values;
}

void write_field(const fs::path& stem, const ScalarField& field, const std::string& name) {
  const Grid2D& g = field.grid();
  const nlohmann::json meta = {{"m", g.m()}, {"h", g.h()}, {"name", name}};
  write_text(with_suffix(stem, ".json"), meta.dump(2) + "\n");
  const auto bytes = encode_doubles_le({field.values().begin(), field.values().end()});
  write_bytes(with_suffix(stem, ".bin"), bytes.data(), bytes.size());
}

FieldDump read_field(const fs::path& stem) {
  const auto meta = read_json(with_suffix(stem, ".json"));
  const Grid2D grid(meta.at("m").get<int>());
  auto values = decode_doubles_le(read_text(with_suffix(stem, ".bin")));
  if (values.size() != grid.size()) {
    throw std::invalid_argument(stem.string() + ": expected " + std::to_string(grid.size()) +
                                " values, found " + std::to_string(values.size()));
  }
  return {meta.value("name", std::string()), ScalarField(grid, std::move(values))};
}

void write_value(const fs::path& stem, const ValueFunction4D& value) {
  const nlohmann::json meta = {{"m", value.m()},
                               {"h", value.grid().h()},
                               {"f_p", value.pursuer_speed},
                               {"f_e", value.evader_speed},
                               {"T", value.horizon},
                               {"dt", value.dt},
                               {"iterations", value.iterations},
                               {"scene_hash", value.scene_hash}};
  write_text(with_suffix(stem, ".json"), meta.dump(2) + "\n");
  const auto bytes = encode_doubles_le(value.values());
  write_bytes(with_suffix(stem, ".bin"), bytes.data(), bytes.size());
}

ValueFunction4D read_value(const fs::path& stem) {
  const auto meta = read_json(with_suffix(stem, ".json"));
  ValueFunction4D v(Grid2D(meta.at("m").get<int>()));
  auto values = decode_doubles_le(read_text(with_suffix(stem, ".bin")));
  if (values.size() != v.size()) {
    throw std::invalid_argument(stem.string() + ": expected " + std::to_string(v.size()) +
                                " values, found " + std::to_string(values.size()));
  }
  v.values() = std::move(values);
  v.pursuer_speed = meta.at("f_p").get<double>();
  v.evader_speed = meta.at("f_e").get<double>();
  v.horizon = meta.at("T").get<double>();
  v.dt = meta.at("dt").get<double>();
  v.iterations = meta.at("iterations").get<std::int64_t>();
  v.scene_hash = meta.value("scene_hash", std::string());
  return v;
}

void write_pgm(const fs::path& path, int m, const std::vector<unsigned char>& gray) {
  if (gray.size() != static_cast<std::size_t>(m) * m) {
    throw std::invalid_argument("PGM pixel count does not match m*m");
  }
  std::string out = "P5\n" + std::to_string(m) + " " + std::to_string(m) + "\n255\n";
  for (int row = 0; row < m; ++row) {
    const int j = m - 1 - row;
    for (int i = 0; i < m; ++i) out.push_back(static_cast<char>(gray[i * m + j]));
  }
  write_text(path, out);
}

std::vector<unsigned char> sign_palette(const ScalarField& field) {
  std::vector<unsigned char> gray(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    gray[k] = field[k] < 0.0 ? 0 : (field[k] > 0.0 ? 255 : 128);
  }
  return gray;
}

std::vector<unsigned char> ramp_palette(const ScalarField& field, double lo, double hi) {
  std::vector<unsigned char> gray(field.size());
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double t = std::clamp((field[k] - lo) / span, 0.0, 1.0);
    gray[k] = static_cast<unsigned char>(std::lround(255.0 * t));
  }
  return gray;
}

}  // namespace seg::io
