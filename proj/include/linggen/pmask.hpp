#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "linggen/rng.hpp"

namespace linggen {

// Masking-rate law: X - 1 with X ~ Pareto(shape b, scale 1) truncated to
// [1, 2], giving density b / (1 - 2^-b) * (1 + m)^-(b + 1) on m in [0, 1].
struct ParetoMaskConfig {
  double b = 3.0;
};

double pmask_density(double m, double b);
double pmask_cdf(double m, double b);
// Inverse CDF at u in [0, 1].
double pmask_quantile(double u, double b);

double sample_rate(Rng& rng, const ParetoMaskConfig& cfg);

struct CalibrationResult {
  double b = 0.0;
  double achieved_mass = 0.0;
  int iterations = 0;
};

// Smallest b in [lo, hi] (to 1e-6) with pmask_cdf(target_rate, b) >= target_mass.
// Throws NoRoot when the bracket cannot reach the mass.
CalibrationResult calibrate_shape(double target_rate = 0.3, double target_mass = 0.6,
                                  double lo = 1e-3, double hi = 64.0);

struct NoMasking {};
struct DropoutMasking {
  double p = 0.3;
};
struct FixedRateMasking {
  double rate = 0.3;
};
struct ParetoMasking {
  ParetoMaskConfig cfg;
};

using MaskingStrategy = std::variant<NoMasking, DropoutMasking, FixedRateMasking, ParetoMasking>;

// "none", "dropout", "fixed", "pmask".
std::string strategy_key(const MaskingStrategy& s);
// param is p / rate / b; ignored for "none". Negative param means default.
MaskingStrategy parse_strategy(std::string_view key, double param = -1.0);
void validate(const MaskingStrategy& s);

struct MaskDraw {
  double rate = 0.0;
  // Sorted ascending, unique, each < k.
  std::vector<int> masked;

  bool is_masked(int i) const;
};

int masked_count(double rate, int k);

MaskDraw draw_mask(Rng& rng, int k, const MaskingStrategy& strategy);

// Masks everything outside `controlled` (used at inference).
MaskDraw mask_complement(int k, const std::vector<int>& controlled);

}  // namespace linggen
