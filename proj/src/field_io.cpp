#include "bhk/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace bhk {

namespace {

template <class T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const unsigned char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

constexpr std::size_t header_bytes = 4 + 4 * 4 + 8;

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  auto s = p;
  s.replace_extension(".json");
  return s;
}

}  // namespace

void write_field(const Field& f, const std::filesystem::path& path, const std::optional<std::string>& sidecar_json) {
  const Grid& g = f.grid();
  std::string buf;
  buf.reserve(header_bytes + f.values().size() * 8);
  buf.append("BHF1", 4);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.n));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.N));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(f.components()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(f.rep()));
  put_le<double>(buf, g.L);
  for (double v : f.values()) put_le<double>(buf, v);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw FormatError("write failed: " + path.string());
  if (sidecar_json) {
    std::ofstream js(sidecar_path(path));
    if (!js) throw FormatError("cannot write sidecar for " + path.string());
    js << *sidecar_json;
  }
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 4 || std::memcmp(p, "BHF1", 4) != 0) throw FormatError(path.string() + ": bad magic, expected BHF1");
  if (buf.size() < header_bytes) {
    std::ostringstream os;
    os << path.string() << ": truncated header, expected " << header_bytes << " bytes, got " << buf.size();
    throw FormatError(os.str());
  }
  const auto n = get_le<std::uint32_t>(p + 4);
  const auto N = get_le<std::uint32_t>(p + 8);
  const auto comps = get_le<std::uint32_t>(p + 12);
  const auto rep = get_le<std::uint32_t>(p + 16);
  const double L = get_le<double>(p + 20);
  if ((n != 2 && n != 3) || rep > 1 || (comps != 1 && comps != n))
    throw FormatError(path.string() + ": header dimension mismatch (n=" + std::to_string(n) + ", components=" +
                      std::to_string(comps) + ", representation=" + std::to_string(rep) + ")");
  Grid g;
  try {
    g = make_grid(static_cast<int>(n), static_cast<int>(N), L);
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": invalid grid in header: " + e.what());
  }
  const std::size_t count = static_cast<std::size_t>(comps) * g.size();
  const std::size_t expected = header_bytes + 8 * count;
  if (buf.size() != expected) {
    std::ostringstream os;
    os << path.string() << ": " << (buf.size() < expected ? "truncated payload" : "payload longer than header declares")
       << ", expected " << expected << " bytes, got " << buf.size();
    throw FormatError(os.str());
  }
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = get_le<double>(p + header_bytes + 8 * i);
  return Field(g, static_cast<int>(comps), static_cast<Rep>(rep), std::move(v));
}

std::optional<std::string> read_sidecar(const std::filesystem::path& path) {
  std::ifstream is(sidecar_path(path));
  if (!is) return std::nullopt;
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace bhk
