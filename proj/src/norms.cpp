#include "bhk/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace bhk {

namespace {

std::mutex region_mutex;
std::map<std::tuple<int, int, double, int>, std::unique_ptr<Region>> region_cache;

bool is_inf(double v) { return std::isinf(v) && v > 0; }

}  // namespace

const Region& annulus_region(const Grid& g, int k) {
  std::lock_guard<std::mutex> lock(region_mutex);
  auto key = std::make_tuple(g.n, g.N, g.L, k);
  auto it = region_cache.find(key);
  if (it != region_cache.end()) return *it->second;
  const auto& lat = lattice(g);
  const double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k);
  auto reg = std::make_unique<Region>();
  for (std::size_t m = 0; m < g.size(); ++m)
    if (lat.radius[m] >= lo && lat.radius[m] < hi) reg->push_back(m);
  return *region_cache.emplace(key, std::move(reg)).first->second;
}

Region ball_region(const Grid& g, const std::array<double, 3>& c, double radius) {
  const auto& lat = lattice(g);
  Region reg;
  for (std::size_t m = 0; m < g.size(); ++m) {
    double d2 = 0.0;
    for (int a = 0; a < g.n; ++a) d2 += (lat.pos[a][m] - c[a]) * (lat.pos[a][m] - c[a]);
    if (d2 < radius * radius) reg.push_back(m);
  }
  return reg;
}

Region full_region(const Grid& g) {
  Region reg(g.size());
  for (std::size_t m = 0; m < reg.size(); ++m) reg[m] = m;
  return reg;
}

double weak_lp_sorted(std::vector<double> v, double cell, double p) {
  if (v.empty()) throw DomainError("weak_lp: empty region");
  if (!(p > 1.0)) throw DomainError("weak_lp: p must exceed 1");
  if (is_inf(p)) return *std::max_element(v.begin(), v.end());
  std::sort(v.begin(), v.end(), std::greater<double>());
  double best = 0.0;
  const double ip = 1.0 / p;
  for (std::size_t m = 0; m < v.size(); ++m) {
    if (v[m] <= 0.0) break;
    best = std::max(best, std::pow((m + 1) * cell, ip) * v[m]);
  }
  return best;
}

double weak_lp_region(const Field& f, const Region& region, double p) {
  if (region.empty()) throw DomainError("weak_lp_region: empty region");
  const auto mod = as_physical(f).modulus();
  std::vector<double> v;
  v.reserve(region.size());
  for (auto m : region) v.push_back(mod[m]);
  return weak_lp_sorted(std::move(v), f.grid().cell_volume(), p);
}

double weak_lp(const Field& f, double p) {
  return weak_lp_sorted(as_physical(f).modulus(), f.grid().cell_volume(), p);
}

double lp_region(const Field& f, const Region& region, double p) {
  if (region.empty()) throw DomainError("lp_region: empty region");
  if (!(p >= 1.0)) throw DomainError("lp_region: p must be >= 1");
  const auto mod = as_physical(f).modulus();
  if (is_inf(p)) {
    double mx = 0.0;
    for (auto m : region) mx = std::max(mx, mod[m]);
    return mx;
  }
  double s = 0.0;
  for (auto m : region) s += std::pow(mod[m], p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const Field& f, double p) { return lp_region(f, full_region(f.grid()), p); }

double sequence_norm(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  if (is_inf(q)) return *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::pow(x, q);
  return std::pow(s, 1.0 / q);
}

void validate_herz(const HerzParams& hp) {
  if (!(hp.p > 1.0)) throw DomainError("weak-Herz exponent p must exceed 1");
  if (!(hp.q >= 1.0)) throw DomainError("weak-Herz exponent q must be >= 1");
  if (!std::isfinite(hp.alpha)) throw DomainError("weak-Herz weight alpha must be finite");
}

void check_herz_window(int n, const HerzParams& hp) {
  const double lo = -n / hp.p, hi = n * (1.0 - 1.0 / hp.p);
  if (!(hp.alpha > lo)) throw DomainError("alpha <= -n/p = " + std::to_string(lo));
  if (!(hp.alpha < hi)) throw DomainError("alpha >= n(1-1/p) = " + std::to_string(hi));
}

AnnulusProfile weak_herz_modulus(const Grid& g, const std::vector<double>& mod, const HerzParams& hp,
                                 std::optional<IndexRange> range) {
  validate_herz(hp);
  IndexRange r = range.value_or(IndexRange{g.k_min, g.k_max});
  if (r.lo < g.k_min || r.hi > g.k_max || r.lo > r.hi)
    throw DomainError("annulus range [" + std::to_string(r.lo) + "," + std::to_string(r.hi) +
                      "] outside the resolvable range of " + g.describe());
  AnnulusProfile out;
  out.params = hp;
  out.k_lo = r.lo;
  out.k_hi = r.hi;
  const double cell = g.cell_volume();
  for (int k = r.lo; k <= r.hi; ++k) {
    const Region& reg = annulus_region(g, k);
    std::vector<double> v;
    v.reserve(reg.size());
    for (auto m : reg) v.push_back(mod[m]);
    out.entries.push_back(std::pow(2.0, k * hp.alpha) * weak_lp_sorted(std::move(v), cell, hp.p));
  }
  out.aggregate = sequence_norm(out.entries, hp.q);
  out.tail_lo = out.entries.front();
  out.tail_hi = out.entries.back();
  out.converged = out.aggregate == 0.0 || std::max(out.tail_lo, out.tail_hi) < 0.05 * out.aggregate;
  return out;
}

AnnulusProfile weak_herz_norm(const Field& f, const HerzParams& hp, std::optional<IndexRange> range) {
  return weak_herz_modulus(f.grid(), as_physical(f).modulus(), hp, range);
}

double morrey_value(const Field& f, double q, double r, const std::vector<Ball>& balls) {
  if (!(q >= 1.0) || !(r >= q) || !std::isfinite(r))
    throw DomainError("morrey_norm: exponents must satisfy 1 <= q <= r < infinity");
  if (balls.empty()) throw DomainError("morrey_norm: no balls given");
  const Grid& g = f.grid();
  const double Vn = g.n == 2 ? M_PI : 4.0 * M_PI / 3.0;
  double best = 0.0;
  for (const auto& b : balls) {
    const Region reg = ball_region(g, b.center, b.radius);
    if (reg.empty()) continue;
    const double vol = Vn * std::pow(b.radius, g.n);
    best = std::max(best, std::pow(vol, 1.0 / r - 1.0 / q) * lp_region(f, reg, q));
  }
  return best;
}

Field decimate(const Field& f) {
  const Field p = as_physical(f);
  const Grid& g = p.grid();
  const Grid c = make_grid(g.n, g.N / 2, g.L);
  const std::size_t Mc = c.size();
  std::vector<double> v(p.components() * Mc);
  int idx[3];
  for (int comp = 0; comp < p.components(); ++comp)
    for (std::size_t m = 0; m < Mc; ++m) {
      unravel(m, c.n, c.N, idx);
      std::size_t src = 0, stride = 1;
      for (int a = 0; a < g.n; ++a) {
        src += static_cast<std::size_t>(2 * idx[a]) * stride;
        stride *= g.N;
      }
      v[comp * Mc + m] = p.comp(comp)[src];
    }
  return Field(c, p.components(), Rep::physical, std::move(v));
}

MorreyReport morrey_norm(const Field& f, double q, double r, const std::vector<Ball>& balls, const Field* coarse) {
  MorreyReport rep;
  rep.value = morrey_value(f, q, r, balls);
  rep.coarse_value = coarse ? morrey_value(*coarse, q, r, balls) : morrey_value(decimate(f), q, r, balls);
  rep.refinement = rep.coarse_value > 0.0 ? rep.value / rep.coarse_value : 1.0;
  return rep;
}

MorreyReport morrey_refinement(const std::function<Field(const Grid&)>& make, const Grid& fine, double q, double r,
                               const std::vector<Ball>& balls) {
  const Field f = make(fine);
  const Field c = make(make_grid(fine.n, fine.N / 2, fine.L));
  return morrey_norm(f, q, r, balls, &c);
}

Field pointwise_product(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "pointwise_product");
  const auto a = as_physical(f).modulus();
  const auto b = as_physical(g).modulus();
  if (f.components() == 1 && g.components() == 1) {
    const Field pf = as_physical(f), pg = as_physical(g);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = pf.values()[i] * pg.values()[i];
    return Field(f.grid(), 1, Rep::physical, std::move(v));
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return Field(f.grid(), 1, Rep::physical, std::move(v));
}

HolderReport holder_check(const Field& f, const Field& g, const HerzParams& s1, const HerzParams& s2,
                          const HerzParams& target, std::optional<IndexRange> range) {
  auto recip = [](double x) { return is_inf(x) ? 0.0 : 1.0 / x; };
  if (std::abs(recip(target.p) - recip(s1.p) - recip(s2.p)) > 1e-12)
    throw DomainError("holder_check: 1/p != 1/p1 + 1/p2");
  if (std::abs(recip(target.q) - recip(s1.q) - recip(s2.q)) > 1e-12)
    throw DomainError("holder_check: 1/q != 1/q1 + 1/q2");
  if (std::abs(target.alpha - s1.alpha - s2.alpha) > 1e-12) throw DomainError("holder_check: alpha != alpha1 + alpha2");
  HolderReport rep;
  rep.target = target;
  rep.lhs = weak_herz_norm(pointwise_product(f, g), target, range).aggregate;
  rep.rhs = weak_herz_norm(f, s1, range).aggregate * weak_herz_norm(g, s2, range).aggregate;
  rep.ratio = rep.lhs == 0.0 ? 0.0 : rep.lhs / rep.rhs;
  return rep;
}

std::string exponent_text(double v) {
  if (is_inf(v)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string profile_json(const AnnulusProfile& p, const std::string& space) {
  nlohmann::ordered_json j;
  j["space"] = space;
  j["params"] = {{"alpha", p.params.alpha}, {"p", exponent_text(p.params.p)}, {"q", exponent_text(p.params.q)}};
  auto prof = nlohmann::ordered_json::array();
  for (int k = p.k_lo; k <= p.k_hi; ++k) prof.push_back({k, p.entries[k - p.k_lo]});
  j["profile"] = prof;
  j["aggregate"] = p.aggregate;
  j["truncation_tail"] = {{"low", p.tail_lo}, {"high", p.tail_hi}, {"converged", p.converged}};
  return j.dump(2);
}

std::string profile_csv(const AnnulusProfile& p) {
  std::ostringstream os;
  os.precision(17);
  os << "k,value\n";
  for (int k = p.k_lo; k <= p.k_hi; ++k) os << k << "," << p.entries[k - p.k_lo] << "\n";
  return os.str();
}

}  // namespace bhk
