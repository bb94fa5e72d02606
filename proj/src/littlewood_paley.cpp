#include "bhk/littlewood_paley.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "bhk/fft.hpp"
#include "bhk/operators.hpp"
#include "json.hpp"

namespace bhk {

double theta_cutoff(double r) {
  constexpr double a = 0.75, b = 4.0 / 3.0;
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  const double t = (b - r) / (b - a);
  const double s1 = std::exp(-1.0 / t), s2 = std::exp(-1.0 / (1.0 - t));
  return s1 / (s1 + s2);
}

double bump_profile(double r) { return theta_cutoff(0.5 * r) - theta_cutoff(r); }

LPFamily::LPFamily(const Grid& g) : grid_(g) {
  if (g.j_min > g.j_max) throw ConfigError("build_bump: empty resolvable block range for " + g.describe());
  const double lo = g.dxi();
  const double hi = std::sqrt(static_cast<double>(g.n)) * M_PI / g.h();
  // largest j with (4/3)2^j <= pi/L, smallest j with (3/4)2^{j+1} >= sqrt(n) pi/h
  int j = static_cast<int>(std::floor(std::log2(0.75 * lo))) + 2;
  while (4.0 / 3.0 * std::ldexp(1.0, j) > lo) --j;
  ext_lo_ = j;
  j = static_cast<int>(std::floor(std::log2(hi))) - 2;
  while (0.75 * std::ldexp(1.0, j + 1) < hi) ++j;
  ext_hi_ = j;

  const auto& lat = lattice(g);
  const std::size_t M = g.size();
  for (int jj = ext_lo_; jj <= ext_hi_; ++jj) {
    std::vector<double> s(M);
    for (std::size_t m = 0; m < M; ++m) s[m] = lat.xi2[m] == 0.0 ? 0.0 : phi(jj, lat.absxi[m]);
    symbols_.push_back(std::move(s));
  }
  const auto band = resolved_band();
  for (std::size_t m = 0; m < M; ++m) {
    const double r = lat.absxi[m];
    if (r < band.first || r > band.second) continue;
    double sum = 0.0;
    for (int jj = g.j_min; jj <= g.j_max; ++jj) sum += symbols_[jj - ext_lo_][m];
    defect_ = std::max(defect_, std::abs(1.0 - sum));
  }
}

double LPFamily::phi(int j, double abs_xi) const { return bump_profile(std::ldexp(abs_xi, -j)); }

const std::vector<double>& LPFamily::symbol(int j) const {
  if (j < ext_lo_ || j > ext_hi_) throw DomainError("block index " + std::to_string(j) + " does not meet the lattice");
  return symbols_[j - ext_lo_];
}

std::vector<double> LPFamily::lowpass_symbol(int k) const {
  const auto& lat = lattice(grid_);
  std::vector<double> s(grid_.size());
  for (std::size_t m = 0; m < s.size(); ++m) s[m] = theta_cutoff(std::ldexp(lat.absxi[m], -(k + 1)));
  return s;
}

std::pair<double, double> LPFamily::resolved_band() const {
  return {4.0 / 3.0 * std::ldexp(1.0, grid_.j_min), 1.5 * std::ldexp(1.0, grid_.j_max)};
}

std::pair<double, double> LPFamily::pure_band(int j) const {
  return {4.0 / 3.0 * std::ldexp(1.0, j), 1.5 * std::ldexp(1.0, j)};
}

std::shared_ptr<const LPFamily> build_bump(const Grid& g) {
  static std::mutex mtx;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const LPFamily>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_tuple(g.n, g.N, g.L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto fam = std::make_shared<const LPFamily>(g);
  cache.emplace(key, fam);
  return fam;
}

namespace {

Field apply_real_symbol(const Field& f, const std::vector<double>& sym) {
  auto s = spectra(f);
  for (auto& c : s)
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= sym[m];
  return from_spectra(f.grid(), std::move(s), f.rep());
}

std::vector<double> masked_inverse(const Grid& g, const Spectrum& s, const std::vector<double>& sym) {
  Spectrum t(s.size());
  for (std::size_t m = 0; m < s.size(); ++m) t[m] = s[m] * sym[m];
  return fft_inverse_real(g, std::move(t));
}

std::vector<double> dealiased_real(const Grid& g, std::vector<double> v) {
  Spectrum s = fft_forward(g, v.data());
  dealias_inplace(g, s);
  return fft_inverse_real(g, std::move(s));
}

}  // namespace

Field lp_block(const Field& f, int j) {
  const Grid& g = f.grid();
  if (j < g.j_min || j > g.j_max)
    throw DomainError("lp_block: j=" + std::to_string(j) + " outside resolvable range [" + std::to_string(g.j_min) + "," +
                      std::to_string(g.j_max) + "]");
  return apply_real_symbol(f, build_bump(g)->symbol(j));
}

Field lp_lowpass(const Field& f, int k) {
  const Grid& g = f.grid();
  if (k < g.j_min || k > g.j_max)
    throw DomainError("lp_lowpass: k=" + std::to_string(k) + " outside resolvable range [" + std::to_string(g.j_min) +
                      "," + std::to_string(g.j_max) + "]");
  return apply_real_symbol(f, build_bump(g)->lowpass_symbol(k));
}

BonyParts bony(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "bony");
  if (f.components() != 1 || g.components() != 1) throw DomainError("bony expects scalar fields");
  const Grid& gr = f.grid();
  const auto fam = build_bump(gr);
  const std::size_t M = gr.size();
  Spectrum F = spectra(f)[0], G = spectra(g)[0];
  dealias_inplace(gr, F);
  dealias_inplace(gr, G);
  const double f0 = F[0].real() / M, g0 = G[0].real() / M;

  const int lo = fam->j_ext_min(), hi = fam->j_ext_max();
  std::vector<std::vector<double>> df, dg;
  for (int j = lo; j <= hi; ++j) {
    df.push_back(masked_inverse(gr, F, fam->symbol(j)));
    dg.push_back(masked_inverse(gr, G, fam->symbol(j)));
  }
  std::vector<double> tfg(M, 0.0), tgf(M, 0.0), res(M, f0 * g0);
  std::vector<double> sf(M, f0), sg(M, g0);  // S_{j-2} as running sums
  const int nb = hi - lo + 1;
  for (int b = 0; b < nb; ++b) {
    if (b >= 2)
      for (std::size_t m = 0; m < M; ++m) {
        sf[m] += df[b - 2][m];
        sg[m] += dg[b - 2][m];
      }
    for (std::size_t m = 0; m < M; ++m) {
      tfg[m] += sf[m] * dg[b][m];
      tgf[m] += sg[m] * df[b][m];
      double near = dg[b][m];
      if (b > 0) near += dg[b - 1][m];
      if (b + 1 < nb) near += dg[b + 1][m];
      res[m] += df[b][m] * near;
    }
  }
  BonyParts out{Field(gr, 1, Rep::physical, dealiased_real(gr, std::move(tfg))),
                Field(gr, 1, Rep::physical, dealiased_real(gr, std::move(tgf))),
                Field(gr, 1, Rep::physical, dealiased_real(gr, std::move(res)))};
  if (f.rep() == Rep::spectral) {
    out.low_high = to_spectral(out.low_high);
    out.high_low = to_spectral(out.high_low);
    out.resonant = to_spectral(out.resonant);
  }
  return out;
}

Field riesz_potential(const Field& f, double s) { return apply_multiplier(f, potential_symbol(s)); }

double sobolev_wh_norm(const Field& f, const BesovParams& bp, std::optional<IndexRange> krange) {
  return weak_herz_norm(riesz_potential(f, bp.s), bp.herz(), krange).aggregate;
}

namespace {

IndexRange checked_jrange(const Grid& g, std::optional<IndexRange> jr) {
  IndexRange r = jr.value_or(IndexRange{g.j_min, g.j_max});
  if (r.lo < g.j_min || r.hi > g.j_max || r.lo > r.hi)
    throw DomainError("block range [" + std::to_string(r.lo) + "," + std::to_string(r.hi) +
                      "] outside the resolvable range of " + g.describe());
  return r;
}

void finish(BlockProfile& out) {
  out.aggregate = sequence_norm(out.entries, out.params.r);
  out.tail_lo = out.entries.front();
  out.tail_hi = out.entries.back();
  out.converged = out.aggregate == 0.0 || std::max(out.tail_lo, out.tail_hi) < 0.05 * out.aggregate;
}

}  // namespace

BlockProfile besov_wh_spectra(const Grid& g, const std::vector<Spectrum>& comps, const BesovParams& bp,
                              std::optional<IndexRange> jrange, std::optional<IndexRange> krange) {
  if (!(bp.r >= 1.0)) throw DomainError("Besov exponent r must be >= 1");
  const IndexRange jr = checked_jrange(g, jrange);
  const auto fam = build_bump(g);
  const std::size_t M = g.size();
  BlockProfile out;
  out.params = bp;
  out.j_lo = jr.lo;
  out.j_hi = jr.hi;
  for (int j = jr.lo; j <= jr.hi; ++j) {
    const auto& sym = fam->symbol(j);
    std::vector<double> mod(M, 0.0);
    for (const auto& c : comps) {
      const auto v = masked_inverse(g, c, sym);
      for (std::size_t m = 0; m < M; ++m) mod[m] += v[m] * v[m];
    }
    for (auto& x : mod) x = std::sqrt(x);
    const double w = weak_herz_modulus(g, mod, bp.herz(), krange).aggregate;
    out.entries.push_back(std::pow(2.0, j * bp.s) * w);
  }
  finish(out);
  return out;
}

BlockProfile besov_wh_norm(const Field& f, const BesovParams& bp, std::optional<IndexRange> jrange,
                           std::optional<IndexRange> krange) {
  return besov_wh_spectra(f.grid(), spectra(f), bp, jrange, krange);
}

BlockProfile besov_lp_surrogate(const Field& f, double s, double p, double r, std::optional<IndexRange> jrange) {
  const Grid& g = f.grid();
  const IndexRange jr = checked_jrange(g, jrange);
  const auto fam = build_bump(g);
  const auto sp = spectra(f);
  BlockProfile out;
  out.params = BesovParams{0.0, p, inf, s, r};
  out.j_lo = jr.lo;
  out.j_hi = jr.hi;
  for (int j = jr.lo; j <= jr.hi; ++j) {
    std::vector<Spectrum> blk;
    for (const auto& c : sp) {
      Spectrum t(c.size());
      for (std::size_t m = 0; m < c.size(); ++m) t[m] = c[m] * fam->symbol(j)[m];
      blk.push_back(std::move(t));
    }
    out.entries.push_back(std::pow(2.0, j * s) * lp_norm(from_spectra(g, std::move(blk)), p));
  }
  finish(out);
  return out;
}

EmbeddingPair embedding_pair(int n, const BesovParams& lhs, double p1, double p2) {
  const double p = lhs.p;
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("embedding: requires 1 < p < infinity");
  if (!(p1 >= p)) throw DomainError("embedding: requires p <= p1");
  if (!std::isfinite(p1)) throw DomainError("embedding: requires p1 < infinity");
  if (!(p2 > 1.0)) throw DomainError("embedding: requires 1 < p2");
  if (!(p2 <= p1)) throw DomainError("embedding: requires p2 <= p1");
  if (!(lhs.alpha > -n / p)) throw DomainError("embedding: requires alpha > -n/p");
  const double top = n * (1.0 + 1.0 / p1 - 1.0 / p2 - 1.0 / p);
  if (!(lhs.alpha < top)) throw DomainError("embedding: requires alpha < n(1 + 1/p1 - 1/p2 - 1/p) = " + std::to_string(top));
  EmbeddingPair e{lhs, lhs};
  e.rhs.alpha = lhs.alpha + n * (1.0 / p - 1.0 / p1);
  e.rhs.s = lhs.s + n * (1.0 / p2 - 1.0 / p1);
  e.rhs.p = p2;
  return e;
}

EmbeddingPair doubling_pair(int n, double alpha, double s, double p, double q, double r) {
  if (!(p > n / 2.0)) throw DomainError("doubling embedding: requires p > n/2");
  const double top = std::min(1.0 - n / (2.0 * p), n / (2.0 * p));
  if (!(alpha >= 0.0) || !(alpha < top))
    throw DomainError("doubling embedding: requires 0 <= alpha < min{1-n/2p, n/2p} = " + std::to_string(top));
  const double p1 = 1.0 / (1.0 / (2.0 * p) - alpha / n);
  return embedding_pair(n, BesovParams{alpha, 2.0 * p, q, s, r}, p1, p);
}

EmbeddingReport sobolev_embedding_check(const Field& f, const EmbeddingPair& spaces, std::optional<IndexRange> jrange,
                                        std::optional<IndexRange> krange) {
  EmbeddingReport rep;
  rep.spaces = spaces;
  const auto sp = spectra(f);
  rep.lhs = besov_wh_spectra(f.grid(), sp, spaces.lhs, jrange, krange).aggregate;
  rep.rhs = besov_wh_spectra(f.grid(), sp, spaces.rhs, jrange, krange).aggregate;
  rep.ratio = rep.lhs == 0.0 ? 0.0 : rep.lhs / rep.rhs;
  return rep;
}

std::string block_profile_json(const BlockProfile& p, const std::string& space) {
  nlohmann::ordered_json j;
  j["space"] = space;
  j["params"] = {{"alpha", p.params.alpha}, {"p", exponent_text(p.params.p)}, {"q", exponent_text(p.params.q)},
                 {"s", p.params.s},         {"r", exponent_text(p.params.r)}};
  auto prof = nlohmann::ordered_json::array();
  for (int k = p.j_lo; k <= p.j_hi; ++k) prof.push_back({k, p.entries[k - p.j_lo]});
  j["profile"] = prof;
  j["aggregate"] = p.aggregate;
  j["truncation_tail"] = {{"low", p.tail_lo}, {"high", p.tail_hi}, {"converged", p.converged}};
  return j.dump(2);
}

std::string block_profile_csv(const BlockProfile& p) {
  std::ostringstream os;
  os.precision(17);
  os << "j,value\n";
  for (int k = p.j_lo; k <= p.j_hi; ++k) os << k << "," << p.entries[k - p.j_lo] << "\n";
  return os.str();
}

}  // namespace bhk
