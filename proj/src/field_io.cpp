#include "smoke/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "smoke/errors.hpp"

namespace smoke {

static_assert(std::endian::native == std::endian::little, "SMKF writer assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'M', 'K', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is, const std::filesystem::path& p) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(p.string() + ": truncated SMKF header");
  return v;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw FormatError("cannot write " + p.string());
  return os;
}

void write_header(std::ostream& os, const GridSpec& s, FieldKind kind) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, s.dim);
  for (int a = 0; a < 3; ++a) put<std::uint32_t>(os, s.res[a]);
  put<double>(os, s.h);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.boundary));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
}

std::pair<GridSpec, FieldKind> read_header(std::istream& is, const std::filesystem::path& p) {
  char m[4];
  if (!is.read(m, 4) || std::memcmp(m, kMagic, 4) != 0) throw FormatError(p.string() + ": not an SMKF file");
  if (get<std::uint32_t>(is, p) != kVersion) throw FormatError(p.string() + ": unsupported SMKF version");
  const int dim = static_cast<int>(get<std::uint32_t>(is, p));
  std::array<int, 3> res{};
  for (auto& r : res) r = static_cast<int>(get<std::uint32_t>(is, p));
  const double h = get<double>(is, p);
  const auto b = get<std::uint32_t>(is, p);
  const auto k = get<std::uint32_t>(is, p);
  if (b > 1 || k > 1) throw FormatError(p.string() + ": bad boundary or kind code");
  GridSpec s;
  try {
    s = GridSpec::make(dim, res, h, static_cast<Boundary>(b));
  } catch (const InvalidArgument& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
  return {s, static_cast<FieldKind>(k)};
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw FormatError("cannot open " + p.string());
  return is;
}

void read_payload(std::istream& is, std::span<double> out, const std::filesystem::path& p) {
  if (!is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes())))
    throw FormatError(p.string() + ": truncated payload");
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError(p.string() + ": trailing bytes after payload");
}

}  // namespace

void save_smkf(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path);
  write_header(os, f.spec(), FieldKind::Scalar);
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!os) throw FormatError("write failed: " + path.string());
}

void save_smkf(const std::filesystem::path& path, const FaceField& f) {
  auto os = open_out(path);
  write_header(os, f.spec(), FieldKind::Face);
  os.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.values().size_bytes()));
  if (!os) throw FormatError("write failed: " + path.string());
}

std::pair<GridSpec, FieldKind> read_smkf_header(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_header(is, path);
}

ScalarField load_smkf_scalar(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto [s, k] = read_header(is, path);
  if (k != FieldKind::Scalar) throw FormatError(path.string() + ": expected a scalar field");
  ScalarField f(s);
  read_payload(is, f.values(), path);
  return f;
}

FaceField load_smkf_face(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto [s, k] = read_header(is, path);
  if (k != FieldKind::Face) throw FormatError(path.string() + ": expected a face field");
  FaceField f(s);
  read_payload(is, f.values(), path);
  return f;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::string magic;
  is >> magic;
  if (magic != "P5" && magic != "P2") throw FormatError(path.string() + ": not a PGM file");
  auto next_int = [&]() {
    while (true) {
      is >> std::ws;
      if (is.peek() == '#') {
        std::string line;
        std::getline(is, line);
        continue;
      }
      long v;
      if (!(is >> v)) throw FormatError(path.string() + ": bad PGM header");
      return v;
    }
  };
  const long w = next_int(), h = next_int(), maxv = next_int();
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 65535) throw FormatError(path.string() + ": bad PGM dimensions");
  GrayImage img{static_cast<int>(w), static_cast<int>(h), std::vector<double>(static_cast<std::size_t>(w * h))};
  if (magic == "P2") {
    for (auto& p : img.pixels) p = static_cast<double>(next_int()) / maxv;
  } else {
    is.get();  // single whitespace before the raster
    const int bytes = maxv < 256 ? 1 : 2;
    std::vector<unsigned char> raw(img.pixels.size() * bytes);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw FormatError(path.string() + ": truncated PGM raster");
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      const unsigned v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
      img.pixels[i] = static_cast<double>(v) / maxv;
    }
  }
  for (double p : img.pixels)
    if (p > 1.0) throw FormatError(path.string() + ": pixel above maxval");
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  auto os = open_out(path);
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = static_cast<unsigned char>(std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw FormatError("write failed: " + path.string());
}

ScalarField image_to_field(const GrayImage& img, const GridSpec& spec) {
  if (spec.dim != 2) throw FormatError("PGM keyframes are 2D only; use SMKF for 3D");
  ScalarField f(spec);
  const int nx = spec.res[0], ny = spec.res[1];
  auto pix = [&](int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.pixels[static_cast<std::size_t>(y) * img.width + x];
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      // cell centre in pixel-centre coordinates; image row 0 is the top
      const double px = (i + 0.5) * img.width / nx - 0.5;
      const double py = (ny - j - 0.5) * img.height / ny - 0.5;
      const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
      const double tx = px - x0, ty = py - y0;
      f.at(i, j) = std::lerp(std::lerp(pix(x0, y0), pix(x0 + 1, y0), tx),
                             std::lerp(pix(x0, y0 + 1), pix(x0 + 1, y0 + 1), tx), ty);
    }
  return f;
}

GrayImage field_to_image(const ScalarField& f, int slice, double scale) {
  const GridSpec& s = f.spec();
  const int k = s.dim == 3 ? (slice < 0 ? s.res[2] / 2 : slice) : 0;
  if (k < 0 || k >= s.res[2]) throw InvalidArgument("slice index out of range");
  GrayImage img{s.res[0], s.res[1], std::vector<double>(static_cast<std::size_t>(s.res[0]) * s.res[1])};
  for (int j = 0; j < s.res[1]; ++j)
    for (int i = 0; i < s.res[0]; ++i)
      img.pixels[static_cast<std::size_t>(s.res[1] - 1 - j) * s.res[0] + i] = scale * f.at(i, j, k);
  return img;
}

ScalarField load_keyframe(const std::filesystem::path& path, const GridSpec& spec) {
  char m[4] = {};
  {
    auto is = open_in(path);
    is.read(m, 4);
  }
  if (std::memcmp(m, kMagic, 4) == 0) {
    ScalarField f = load_smkf_scalar(path);
    if (f.spec() != spec)
      throw SpecMismatch(path.string() + ": grid " + describe(f.spec()) + " does not match " + describe(spec));
    return f;
  }
  if (m[0] == 'P' && (m[1] == '5' || m[1] == '2')) return image_to_field(read_pgm(path), spec);
  throw FormatError(path.string() + ": unrecognised keyframe format");
}

}  // namespace smoke
