#include "bhk/grid.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

namespace bhk {

double Grid::cell_volume() const { return std::pow(h(), n); }

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < n; ++a) s *= static_cast<std::size_t>(N);
  return s;
}

double Grid::dxi() const { return M_PI / L; }

std::string Grid::describe() const {
  std::ostringstream os;
  os << "n=" << n << " N=" << N << " L=" << L << " h=" << h() << " k=[" << k_min << "," << k_max
     << "] j=[" << j_min << "," << j_max << "]";
  return os.str();
}

Grid make_grid(int n, int N, double L) {
  if (n != 2 && n != 3) throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(n));
  if (N < 32) throw ConfigError("N must be at least 32, got " + std::to_string(N));
  if ((N & (N - 1)) != 0) throw ConfigError("N not a power of two: " + std::to_string(N));
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive and finite");

  Grid g;
  g.n = n;
  g.N = N;
  g.L = L;
  const double h = g.h();

  // smallest k with 2^(k-1) >= 4h, largest k with 2^k <= L/2
  int k = static_cast<int>(std::floor(std::log2(4.0 * h))) - 2;
  while (std::ldexp(1.0, k - 1) < 4.0 * h) ++k;
  g.k_min = k;
  k = static_cast<int>(std::ceil(std::log2(L / 2.0))) + 2;
  while (std::ldexp(1.0, k) > L / 2.0) --k;
  g.k_max = k;
  if (g.k_min > g.k_max) {
    std::ostringstream os;
    os << "empty resolvable annulus range: no k with 2^(k-1) >= 4h = " << 4.0 * h
       << " and 2^k <= L/2 = " << L / 2.0;
    throw ConfigError(os.str());
  }

  // smallest j with (3/4)2^j >= pi/L, largest j with (8/3)2^j <= pi/h
  const double lo = M_PI / L, hi = M_PI / h;
  int j = static_cast<int>(std::floor(std::log2(lo / 0.75))) - 2;
  while (0.75 * std::ldexp(1.0, j) < lo) ++j;
  g.j_min = j;
  j = static_cast<int>(std::ceil(std::log2(hi * 3.0 / 8.0))) + 2;
  while (8.0 / 3.0 * std::ldexp(1.0, j) > hi) --j;
  g.j_max = j;
  if (g.j_min > g.j_max) {
    std::ostringstream os;
    os << "empty resolvable block range: no j with (3/4)2^j >= pi/L = " << lo
       << " and (8/3)2^j <= pi/h = " << hi;
    throw ConfigError(os.str());
  }
  return g;
}

namespace {

std::mutex lattice_mutex;
std::map<std::tuple<int, int, double>, std::unique_ptr<Lattice>> lattice_cache;

std::unique_ptr<Lattice> build_lattice(const Grid& g) {
  auto lat = std::make_unique<Lattice>();
  const std::size_t M = g.size();
  const double dk = g.dxi();
  for (int a = 0; a < 3; ++a) {
    lat->xi[a].assign(M, 0.0);
    lat->pos[a].assign(M, 0.0);
  }
  lat->xi2.resize(M);
  lat->absxi.resize(M);
  lat->radius.resize(M);
  lat->neg.resize(M);
  int idx[3] = {0, 0, 0};
  for (std::size_t m = 0; m < M; ++m) {
    unravel(m, g.n, g.N, idx);
    double s = 0.0, r = 0.0;
    std::size_t negm = 0, stride = 1;
    for (int a = 0; a < g.n; ++a) {
      const double xi = dk * g.wave(idx[a]);
      const double x = g.x(idx[a]);
      lat->xi[a][m] = xi;
      lat->pos[a][m] = x;
      s += xi * xi;
      r += x * x;
      negm += static_cast<std::size_t>((g.N - idx[a]) % g.N) * stride;
      stride *= g.N;
    }
    lat->xi2[m] = s;
    lat->absxi[m] = std::sqrt(s);
    lat->radius[m] = std::sqrt(r);
    lat->neg[m] = negm;
  }
  return lat;
}

}  // namespace

const Lattice& lattice(const Grid& g) {
  std::lock_guard<std::mutex> lock(lattice_mutex);
  auto key = std::make_tuple(g.n, g.N, g.L);
  auto it = lattice_cache.find(key);
  if (it == lattice_cache.end()) it = lattice_cache.emplace(key, build_lattice(g)).first;
  return *it->second;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!a.same(b)) throw DomainError(std::string(where) + ": grid mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

}  // namespace bhk
