#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhk {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using cplx = std::complex<double>;
using Spectrum = std::vector<cplx>;

struct Grid {
  int n = 2;
  int N = 0;
  double L = 0.0;
  // resolvable annuli A_k and frequency blocks j (inclusive)
  int k_min = 0, k_max = -1;
  int j_min = 0, j_max = -1;

  double h() const { return 2.0 * L / N; }
  double cell_volume() const;
  std::size_t size() const;
  double x(int i) const { return -L + i * h(); }
  double dxi() const;
  int wave(int i) const { return i < N / 2 ? i : i - N; }
  bool same(const Grid& o) const { return n == o.n && N == o.N && L == o.L; }
  std::string describe() const;
};

Grid make_grid(int n, int N, double L);

// per-lattice-point tables, shared read-only per grid
struct Lattice {
  std::array<std::vector<double>, 3> xi;
  std::array<std::vector<double>, 3> pos;
  std::vector<double> xi2;
  std::vector<double> absxi;
  std::vector<double> radius;
  std::vector<std::size_t> neg;
};

const Lattice& lattice(const Grid& g);

// index decomposition, x fastest
inline void unravel(std::size_t idx, int n, int N, int* i) {
  for (int a = 0; a < n; ++a) {
    i[a] = static_cast<int>(idx % N);
    idx /= N;
  }
}

void require_same_grid(const Grid& a, const Grid& b, const char* where);

}  // namespace bhk
