#include "mazt/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mazt/envelope.hpp"
#include "mazt/errors.hpp"

namespace mazt {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'Z', 'T'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little ||
                std::endian::native == std::endian::big);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t k = sizeof(T); k-- > 0;) out.push_back(raw[k]);
  } else {
    out.insert(out.end(), raw, raw + sizeof(T));
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint8_t raw[sizeof(T)];
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t k = 0; k < sizeof(T); ++k) raw[k] = p[sizeof(T) - 1 - k];
  } else {
    std::memcpy(raw, p, sizeof(T));
  }
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return os;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::uint8_t> encode_field_binary(const ScalarField& f) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().n()));
  out.reserve(out.size() + f.size() * 8);
  for (double v : f.values()) put_le<double>(out, v);
  return out;
}

ScalarField decode_field_binary(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::IoError, "not a MAZT field dump");
  }
  const auto n = get_le<std::uint32_t>(bytes.data() + 4);
  if (n < 8 || n > 65536) {
    throw Error(ErrorCode::IoError, "field dump has bad N");
  }
  const std::size_t count = static_cast<std::size_t>(n) * n;
  if (bytes.size() != 8 + 8 * count) {
    throw Error(ErrorCode::IoError, "field dump truncated or oversized");
  }
  TorusGrid grid(static_cast<int>(n));
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = get_le<double>(bytes.data() + 8 + 8 * k);
  }
  return ScalarField(grid, std::move(values));
}

void write_field_binary(const ScalarField& f,
                        const std::filesystem::path& path) {
  const auto bytes = encode_field_binary(f);
  auto os = open_out(path, true);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

ScalarField read_field_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return decode_field_binary(bytes);
}

void write_field_csv(const ScalarField& f, const std::filesystem::path& path) {
  auto os = open_out(path, false);
  const TorusGrid& g = f.grid();
  os << "i,j,x,y,value\n";
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      os << i << ',' << j << ',' << format_double(g.x(i)) << ','
         << format_double(g.y(j)) << ',' << format_double(f.at(i, j)) << '\n';
    }
  }
}

void write_mask_pbm(const TorusGrid& grid,
                    const std::vector<std::uint8_t>& mask,
                    const std::filesystem::path& path) {
  if (mask.size() != grid.size()) {
    throw Error(ErrorCode::InvalidArgument, "mask size does not match grid");
  }
  auto os = open_out(path, false);
  os << "P1\n" << grid.n() << ' ' << grid.n() << '\n';
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) {
      os << (mask[grid.index(i, j)] ? '1' : '0')
         << (j + 1 == grid.n() ? '\n' : ' ');
    }
  }
}

std::vector<std::uint8_t> read_mask_pbm(const std::filesystem::path& path,
                                        int* n_out) {
  std::ifstream is(path);
  std::string magic;
  int w = 0, h = 0;
  if (!(is >> magic >> w >> h) || magic != "P1" || w != h || w < 8) {
    throw Error(ErrorCode::IoError, "bad PBM header in " + path.string());
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h);
  for (auto& m : mask) {
    int v;
    if (!(is >> v)) throw Error(ErrorCode::IoError, "PBM truncated");
    m = static_cast<std::uint8_t>(v != 0);
  }
  if (n_out) *n_out = w;
  return mask;
}

void write_polylines_csv(const std::vector<Polyline>& lines,
                         const std::filesystem::path& path) {
  auto os = open_out(path, false);
  os << "polyline,vertex,x,y\n";
  for (std::size_t p = 0; p < lines.size(); ++p) {
    const auto& pts = lines[p].points;
    for (std::size_t v = 0; v < pts.size(); ++v) {
      os << p << ',' << v << ',' << format_double(pts[v].x) << ','
         << format_double(pts[v].y) << '\n';
    }
  }
}

}  // namespace mazt
