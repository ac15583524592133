#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "gkdv/grid.hpp"

namespace gkdv {
namespace {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(std::istream& is) {
  std::uint64_t bits = 0;
  if (!is.read(reinterpret_cast<char*>(&bits), 8))
    throw std::runtime_error("checkpoint: unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const GridField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string());
  put_le(os, f.grid().length());
  put_le(os, static_cast<std::uint64_t>(f.size()));
  for (double v : f.values()) put_le(os, v);
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

GridField read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  const double length = get_le<double>(is);
  const auto n = get_le<std::uint64_t>(is);
  Grid1D grid(length, static_cast<std::size_t>(n));
  std::vector<double> values(grid.size());
  for (double& v : values) v = get_le<double>(is);
  return GridField(grid, std::move(values));
}

void write_csv(const std::filesystem::path& path, const GridField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("csv: cannot open " + path.string());
  os << "x,value\n" << std::setprecision(17);
  for (std::size_t j = 0; j < f.size(); ++j) os << f.grid().x(j) << ',' << f[j] << '\n';
}

}  // namespace gkdv
