#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "seg/grid.hpp"
#include "seg/hji.hpp"

namespace seg::io {

// Field dumps are a pair of files: <stem>.json with {"m", "h", "name"} and
// <stem>.bin with m*m little-endian doubles, row-major (i outer).
struct FieldDump {
  std::string name;
  ScalarField field;
};

void write_field(const std::filesystem::path& stem, const ScalarField& field,
                 const std::string& name);
FieldDump read_field(const std::filesystem::path& stem);

// <stem>.json with {"m","h","f_p","f_e","T","dt","iterations","scene_hash"};
// <stem>.bin with m^4 doubles in (i,j,k,l) row-major order.
void write_value(const std::filesystem::path& stem, const ValueFunction4D& value);
ValueFunction4D read_value(const std::filesystem::path& stem);

std::vector<char> encode_doubles_le(const std::vector<double>& values);
std::vector<double> decode_doubles_le(const std::string& bytes);

// 8-bit binary PGM. Image rows run from j = m-1 (top) down to j = 0, so the
// picture has y pointing up.
void write_pgm(const std::filesystem::path& path, int m, const std::vector<unsigned char>& gray);

// Sign palette: negative 0, zero 128, positive 255.
std::vector<unsigned char> sign_palette(const ScalarField& field);
// Linear gray ramp of [lo, hi] onto [0, 255], clamped.
std::vector<unsigned char> ramp_palette(const ScalarField& field, double lo, double hi);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace seg::io
