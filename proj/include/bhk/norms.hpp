#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bhk/field.hpp"

namespace bhk {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct HerzParams {
  double alpha = 0.0;
  double p = 2.0;
  double q = inf;
};

struct IndexRange {
  int lo = 0;
  int hi = -1;
};

using Region = std::vector<std::size_t>;

const Region& annulus_region(const Grid& g, int k);
Region ball_region(const Grid& g, const std::array<double, 3>& center, double radius);
Region full_region(const Grid& g);

// max_m (m h^n)^{1/p} v_(m) over the decreasing rearrangement of values
double weak_lp_sorted(std::vector<double> values, double cell, double p);
double weak_lp_region(const Field& f, const Region& region, double p);
double weak_lp(const Field& f, double p);
// Riemann L^p norm
double lp_region(const Field& f, const Region& region, double p);
double lp_norm(const Field& f, double p);

double sequence_norm(const std::vector<double>& v, double q);
void validate_herz(const HerzParams& hp);
// -n/p < alpha < n(1-1/p)
void check_herz_window(int n, const HerzParams& hp);

struct AnnulusProfile {
  HerzParams params;
  int k_lo = 0, k_hi = -1;
  std::vector<double> entries;  // entries[k - k_lo]
  double aggregate = 0.0;
  double tail_lo = 0.0, tail_hi = 0.0;
  bool converged = true;
};

AnnulusProfile weak_herz_norm(const Field& f, const HerzParams& hp, std::optional<IndexRange> range = {});
// same, from a precomputed pointwise modulus
AnnulusProfile weak_herz_modulus(const Grid& g, const std::vector<double>& modulus, const HerzParams& hp,
                                 std::optional<IndexRange> range = {});

struct Ball {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 1.0;
};

struct MorreyReport {
  double value = 0.0;
  double coarse_value = 0.0;
  double refinement = 1.0;  // value / coarse_value
};

double morrey_value(const Field& f, double q, double r, const std::vector<Ball>& balls);
// coarse defaults to the even-index decimation of f
MorreyReport morrey_norm(const Field& f, double q, double r, const std::vector<Ball>& balls, const Field* coarse = nullptr);
// regenerate the field on the grid and on its N/2 coarsening
MorreyReport morrey_refinement(const std::function<Field(const Grid&)>& make, const Grid& fine, double q, double r,
                               const std::vector<Ball>& balls);
Field decimate(const Field& f);

struct HolderReport {
  HerzParams target;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};

HolderReport holder_check(const Field& f, const Field& g, const HerzParams& first, const HerzParams& second,
                          const HerzParams& target, std::optional<IndexRange> range = {});
Field pointwise_product(const Field& f, const Field& g);

std::string exponent_text(double v);
std::string profile_json(const AnnulusProfile& p, const std::string& space = "wk");
std::string profile_csv(const AnnulusProfile& p);

}  // namespace bhk
