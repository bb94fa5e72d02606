#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bhk/config.hpp"
#include "bhk/fit.hpp"
#include "bhk/mild.hpp"
#include "bhk/report.hpp"

namespace bhk {

// named maxima of inequality ratios over a corpus
using RatioSet = std::map<std::string, double>;

struct CorpusSpec {
  int count = 50;
  std::vector<int> js = {0, 1, 2};
  std::uint64_t seed = 1;
  std::optional<IndexRange> jrange, krange;
};

// i-th seeded random band-limited sample
Field corpus_field(const Grid& g, const CorpusSpec& c, int i, int components = 1);
// ranges shared by a grid and its coarsening
IndexRange common_jrange(const Grid& a, const Grid& b);
IndexRange common_krange(const Grid& a, const Grid& b);

RatioSet embedding_ratios(const Grid& g, const CorpusSpec& c);
RatioSet holder_ratios(const Grid& g, const CorpusSpec& c);
RatioSet multiplier_ratios(const Grid& g, const CorpusSpec& c);
RatioSet convolution_ratios(const Grid& g, const CorpusSpec& c);
RatioSet linear_x_ratios(const Grid& g, const CorpusSpec& c, const TimeGrid& tg);
RatioSet bilinear_ratios(const Grid& g, const CorpusSpec& c, const TimeGrid& tg);

struct CeilingCheck {
  std::string name;
  double coarse = 0.0, fine = 0.0, ceiling = 0.0;
  double drift = 0.0;  // |fine - coarse| / coarse
  bool stable = false, pass = false;
};
// measure on both grids, freeze factor * coarse, require drift <= stability and fine <= ceiling
std::vector<CeilingCheck> calibrate_ceilings(const std::function<RatioSet(const Grid&)>& measure, const Grid& coarse,
                                             const Grid& fine, double factor = 1.5, double stability = 0.2);

struct HeatEnvelope {
  std::vector<double> t, value;
  FitResult fit;
};
// max over pure-block data of |G(t) f_j|_{sigma} / |f_j|_{s}
HeatEnvelope heat_envelope(const Grid& g, const BesovParams& target, double s, const std::vector<int>& js,
                           const std::vector<double>& times, double lo, double hi);

struct Bisection {
  double delta = 0.0;
  bool top_passed = false;
  std::vector<double> probes;
  std::vector<int> passed;
  std::vector<double> ratios;
  Trajectory solution;
};
// largest delta in (0, hi] whose Picard run converges in <= max_iter with contraction <= max_ratio
Bisection bisect_delta(const Field& shape, const MildParams& mp, const TimeGrid& tg, double hi, int steps,
                       const PicardOptions& opts, double max_ratio);

struct RunOptions {
  bool calibrate = false;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool quiet = true;
};

struct RunResult {
  Report report;
  std::filesystem::path out_dir;
  int exit_code = 0;
};

std::vector<std::string> experiment_names();
RunResult run_experiment(ExperimentConfig cfg, const RunOptions& opts = {});

}  // namespace bhk
