#include "linggen/pmask.hpp"

#include <algorithm>
#include <cmath>

#include "linggen/errors.hpp"

namespace linggen {

namespace {

void check_shape(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw Error(ErrorKind::kDomain, "shape parameter b must be positive");
  }
}

void check_rate(double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorKind::kDomain, "masking rate outside [0, 1]");
}

// 1 - 2^-b without cancellation for small b.
double truncation_mass(double b) { return -std::expm1(-b * std::log(2.0)); }

}  // namespace

double pmask_density(double m, double b) {
  check_rate(m);
  check_shape(b);
  return b / truncation_mass(b) * std::pow(1.0 + m, -(b + 1.0));
}

double pmask_cdf(double m, double b) {
  check_rate(m);
  check_shape(b);
  return -std::expm1(-b * std::log1p(m)) / truncation_mass(b);
}

double pmask_quantile(double u, double b) {
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorKind::kDomain, "quantile level outside [0, 1]");
  check_shape(b);
  const double m = std::pow(1.0 - u * truncation_mass(b), -1.0 / b) - 1.0;
  return std::clamp(m, 0.0, 1.0);
}

double sample_rate(Rng& rng, const ParetoMaskConfig& cfg) {
  return pmask_quantile(rng.uniform(), cfg.b);
}

CalibrationResult calibrate_shape(double target_rate, double target_mass, double lo, double hi) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw Error(ErrorKind::kDomain, "target rate must lie in (0, 1)");
  }
  if (!(target_mass > 0.0 && target_mass < 1.0)) {
    throw Error(ErrorKind::kDomain, "target mass must lie in (0, 1)");
  }
  if (!(lo > 0.0 && hi > lo)) throw Error(ErrorKind::kDomain, "invalid bracket");

  CalibrationResult r;
  if (pmask_cdf(target_rate, hi) < target_mass) {
    throw Error(ErrorKind::kNoRoot, "target mass unreachable with b <= " + std::to_string(hi));
  }
  if (pmask_cdf(target_rate, lo) >= target_mass) {
    r.b = lo;
    r.achieved_mass = pmask_cdf(target_rate, lo);
    return r;
  }
  // F(rate, b) increases with b: keep F(lo) < mass <= F(hi).
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (pmask_cdf(target_rate, mid) >= target_mass) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++r.iterations;
  }
  r.b = hi;
  r.achieved_mass = pmask_cdf(target_rate, hi);
  return r;
}

std::string strategy_key(const MaskingStrategy& s) {
  struct Visitor {
    std::string operator()(const NoMasking&) const { return "none"; }
    std::string operator()(const DropoutMasking&) const { return "dropout"; }
    std::string operator()(const FixedRateMasking&) const { return "fixed"; }
    std::string operator()(const ParetoMasking&) const { return "pmask"; }
  };
  return std::visit(Visitor{}, s);
}

MaskingStrategy parse_strategy(std::string_view key, double param) {
  MaskingStrategy s;
  if (key == "none" || key == "no-masking") {
    s = NoMasking{};
  } else if (key == "dropout") {
    s = DropoutMasking{param < 0 ? 0.3 : param};
  } else if (key == "fixed" || key == "fixed-rate") {
    s = FixedRateMasking{param < 0 ? 0.3 : param};
  } else if (key == "pmask" || key == "p-masking") {
    s = ParetoMasking{ParetoMaskConfig{param < 0 ? 3.0 : param}};
  } else {
    throw Error(ErrorKind::kConfig, "unknown masking strategy '" + std::string(key) + "'");
  }
  validate(s);
  return s;
}

void validate(const MaskingStrategy& s) {
  if (const auto* d = std::get_if<DropoutMasking>(&s)) {
    if (!(d->p >= 0.0 && d->p <= 1.0)) throw Error(ErrorKind::kConfig, "dropout p outside [0, 1]");
  } else if (const auto* f = std::get_if<FixedRateMasking>(&s)) {
    if (!(f->rate >= 0.0 && f->rate <= 1.0)) {
      throw Error(ErrorKind::kConfig, "fixed rate outside [0, 1]");
    }
  } else if (const auto* p = std::get_if<ParetoMasking>(&s)) {
    if (!(p->cfg.b > 0.0)) throw Error(ErrorKind::kConfig, "pmask b must be positive");
  }
}

bool MaskDraw::is_masked(int i) const {
  return std::binary_search(masked.begin(), masked.end(), i);
}

int masked_count(double rate, int k) {
  const int n = static_cast<int>(std::floor(rate * k + 0.5));
  return std::clamp(n, 0, k);
}

MaskDraw draw_mask(Rng& rng, int k, const MaskingStrategy& strategy) {
  if (k < 0) throw Error(ErrorKind::kDomain, "attribute count must be non-negative");
  MaskDraw d;
  if (std::holds_alternative<NoMasking>(strategy)) return d;
  if (const auto* drop = std::get_if<DropoutMasking>(&strategy)) {
    d.rate = drop->p;
    for (int i = 0; i < k; ++i) {
      if (rng.bernoulli(drop->p)) d.masked.push_back(i);
    }
    return d;
  }
  if (const auto* fixed = std::get_if<FixedRateMasking>(&strategy)) {
    d.rate = fixed->rate;
  } else {
    d.rate = sample_rate(rng, std::get<ParetoMasking>(strategy).cfg);
  }
  d.masked = rng.choose(k, masked_count(d.rate, k));
  std::sort(d.masked.begin(), d.masked.end());
  return d;
}

MaskDraw mask_complement(int k, const std::vector<int>& controlled) {
  MaskDraw d;
  for (int i = 0; i < k; ++i) {
    if (std::find(controlled.begin(), controlled.end(), i) == controlled.end()) {
      d.masked.push_back(i);
    }
  }
  d.rate = k > 0 ? static_cast<double>(d.masked.size()) / k : 0.0;
  return d;
}

}  // namespace linggen
