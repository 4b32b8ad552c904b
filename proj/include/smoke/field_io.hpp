#pragma once

#include <cstdint>
#include <filesystem>

#include "smoke/grid.hpp"

namespace smoke {

// SMKF raw field files (little-endian):
//   "SMKF" | u32 version | u32 dim | u32 res[3] | f64 h | u32 boundary | u32 kind
//   | f64 payload (cells x-fastest, or face components in axis order)

enum class FieldKind : std::uint32_t { Scalar = 0, Face = 1 };

void save_smkf(const std::filesystem::path& path, const ScalarField& f);
void save_smkf(const std::filesystem::path& path, const FaceField& f);
ScalarField load_smkf_scalar(const std::filesystem::path& path);
FaceField load_smkf_face(const std::filesystem::path& path);
/// Reads only the header.
std::pair<GridSpec, FieldKind> read_smkf_header(const std::filesystem::path& path);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major from the top row, in [0, 1]
};

/// 8-bit (or 16-bit) binary P5 or ASCII P2 PGM.
GrayImage read_pgm(const std::filesystem::path& path);
/// Writes 8-bit P5, clamping values to [0, 1].
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Bilinear resampling of an image onto a 2D grid (image top row maps to
/// the high-y edge of the domain).
ScalarField image_to_field(const GrayImage& img, const GridSpec& spec);
/// 2D field, or the slice k = `slice` of a 3D field, as an image.
GrayImage field_to_image(const ScalarField& f, int slice = -1, double scale = 1.0);

/// PGM (2D only) or SMKF depending on the file's magic bytes.
ScalarField load_keyframe(const std::filesystem::path& path, const GridSpec& spec);

}  // namespace smoke
