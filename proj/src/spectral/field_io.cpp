#include "kshear/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <istream>
#include <string>
#include <vector>

#include "kshear/errors.hpp"

namespace kshear {
namespace {

constexpr std::array<char, 8> kMagic = {'K', 'S', 'H', 'R', 'F', 'L', 'D', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void putLe(std::ostream& os, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U getLe(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw InvalidInput("checkpoint: truncated stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void putF64(std::ostream& os, double v) { putLe(os, std::bit_cast<std::uint64_t>(v)); }
double getF64(std::istream& is) { return std::bit_cast<double>(getLe<std::uint64_t>(is)); }

}  // namespace

void writeCheckpoint(std::ostream& os, const FieldCheckpoint& cp) {
  const Grid2D& g = cp.field.grid();
  os.write(kMagic.data(), kMagic.size());
  putLe<std::uint32_t>(os, kVersion);
  putLe<std::uint32_t>(os, 0);
  putLe<std::uint64_t>(os, static_cast<std::uint64_t>(g.Nx));
  putLe<std::uint64_t>(os, static_cast<std::uint64_t>(g.Ny));
  putF64(os, g.L1);
  putF64(os, g.L2);
  putF64(os, cp.t);
  putLe<std::uint64_t>(os, cp.step);
  for (int k = -g.Nx / 2; k < g.Nx / 2; ++k) {
    for (int j = -g.Ny / 2; j < g.Ny / 2; ++j) {
      const Complex c = cp.field.coeff(k, j);
      putF64(os, c.real());
      putF64(os, c.imag());
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

FieldCheckpoint readCheckpoint(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw InvalidInput("checkpoint: bad magic");
  const auto version = getLe<std::uint32_t>(is);
  if (version != kVersion) throw InvalidInput("checkpoint: unsupported version " + std::to_string(version));
  (void)getLe<std::uint32_t>(is);
  const auto nx = static_cast<int>(getLe<std::uint64_t>(is));
  const auto ny = static_cast<int>(getLe<std::uint64_t>(is));
  const double l1 = getF64(is);
  const double l2 = getF64(is);
  FieldCheckpoint cp;
  cp.t = getF64(is);
  cp.step = getLe<std::uint64_t>(is);
  const Grid2D grid(l1, l2, nx, ny);

  std::vector<Complex> full(grid.physicalSize());
  for (auto& c : full) {
    const double re = getF64(is);
    const double im = getF64(is);
    c = Complex(re, im);
  }
  auto at = [&](int k, int j) -> Complex {
    return full[static_cast<std::size_t>(k + nx / 2) * ny + (j + ny / 2)];
  };
  double scale = 0.0;
  for (const auto& c : full) scale = std::max(scale, std::abs(c));
  for (int k = -nx / 2; k < nx / 2; ++k) {
    for (int j = -ny / 2; j < ny / 2; ++j) {
      const int pk = (k == -nx / 2) ? k : -k;
      const int pj = (j == -ny / 2) ? j : -j;
      if (std::abs(at(k, j) - std::conj(at(pk, pj))) > 1e-12 * std::max(scale, 1e-300)) {
        throw InvalidInput("checkpoint: coefficients are not Hermitian (field not real)");
      }
    }
  }
  cp.field = SpectralField2D(grid);
  const int H = grid.halfNy();
  auto half = cp.field.half();
  for (int k = -nx / 2; k < nx / 2; ++k) {
    const std::size_t r = static_cast<std::size_t>(cp.field.row(k)) * H;
    for (int j = 0; j < ny / 2; ++j) half[r + j] = at(k, j);
    half[r + ny / 2] = at(k, -ny / 2);
  }
  return cp;
}

void writeCheckpoint(const std::filesystem::path& path, const FieldCheckpoint& cp) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string());
  writeCheckpoint(os, cp);
}

FieldCheckpoint readCheckpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("checkpoint: cannot open " + path.string());
  return readCheckpoint(is);
}

void writeCoefficientCsv(std::ostream& os, const SpectralField2D& field) {
  const Grid2D& g = field.grid();
  os << "k,j,re,im\n" << std::setprecision(10);
  for (int k = -g.Nx / 2; k < g.Nx / 2; ++k) {
    for (int j = -g.Ny / 2; j < g.Ny / 2; ++j) {
      const Complex c = field.coeff(k, j);
      os << k << ',' << j << ',' << c.real() << ',' << c.imag() << '\n';
    }
  }
}

}  // namespace kshear
