#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bhk/field.hpp"
#include "bhk/norms.hpp"

namespace bhk {

// smooth cutoff: 1 on [0,3/4], 0 on [4/3,inf)
double theta_cutoff(double r);
// radial mother bump phi(r) = Theta(r/2) - Theta(r)
double bump_profile(double r);

class LPFamily {
 public:
  explicit LPFamily(const Grid& g);

  const Grid& grid() const { return grid_; }
  int j_min() const { return grid_.j_min; }
  int j_max() const { return grid_.j_max; }
  // blocks that meet the lattice at all; used for exact reconstructions
  int j_ext_min() const { return ext_lo_; }
  int j_ext_max() const { return ext_hi_; }

  double phi(int j, double abs_xi) const;
  const std::vector<double>& symbol(int j) const;
  // Theta(|xi| / 2^{k+1}): sum of blocks j <= k plus the zero mode
  std::vector<double> lowpass_symbol(int k) const;

  std::pair<double, double> resolved_band() const;
  std::pair<double, double> pure_band(int j) const;
  double partition_defect() const { return defect_; }

 private:
  Grid grid_;
  int ext_lo_ = 0, ext_hi_ = -1;
  std::vector<std::vector<double>> symbols_;
  double defect_ = 0.0;
};

std::shared_ptr<const LPFamily> build_bump(const Grid& g);

Field lp_block(const Field& f, int j);
Field lp_lowpass(const Field& f, int k);

struct BonyParts {
  Field low_high;   // T_f g
  Field high_low;   // T_g f
  Field resonant;   // R(fg), including the product of the zero modes
};
BonyParts bony(const Field& f, const Field& g);

Field riesz_potential(const Field& f, double s);

struct BesovParams {
  double alpha = 0.0;
  double p = 2.0;
  double q = inf;
  double s = 0.0;
  double r = inf;
  HerzParams herz() const { return {alpha, p, q}; }
};

struct BlockProfile {
  BesovParams params;
  int j_lo = 0, j_hi = -1;
  std::vector<double> entries;  // entries[j - j_lo]
  double aggregate = 0.0;
  double tail_lo = 0.0, tail_hi = 0.0;
  bool converged = true;
};

double sobolev_wh_norm(const Field& f, const BesovParams& bp, std::optional<IndexRange> krange = {});
BlockProfile besov_wh_norm(const Field& f, const BesovParams& bp, std::optional<IndexRange> jrange = {},
                           std::optional<IndexRange> krange = {});
BlockProfile besov_wh_spectra(const Grid& g, const std::vector<Spectrum>& comps, const BesovParams& bp,
                              std::optional<IndexRange> jrange = {}, std::optional<IndexRange> krange = {});
// same blocks, but the global Riemann L^p norm in place of the weak-Herz norm
BlockProfile besov_lp_surrogate(const Field& f, double s, double p, double r, std::optional<IndexRange> jrange = {});

// embedding: the left space and the right space derived from (p1, p2)
struct EmbeddingPair {
  BesovParams lhs, rhs;
};
EmbeddingPair embedding_pair(int n, const BesovParams& lhs, double p1, double p2);
// B^{alpha,s}_{2p,q,r} <= C B^{2 alpha, alpha+s+n/(2p)}_{p,q,r}
EmbeddingPair doubling_pair(int n, double alpha, double s, double p, double q, double r);

struct EmbeddingReport {
  EmbeddingPair spaces;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};
EmbeddingReport sobolev_embedding_check(const Field& f, const EmbeddingPair& spaces,
                                        std::optional<IndexRange> jrange = {}, std::optional<IndexRange> krange = {});

std::string block_profile_json(const BlockProfile& p, const std::string& space = "bwk");
std::string block_profile_csv(const BlockProfile& p);

}  // namespace bhk
