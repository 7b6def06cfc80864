#include "drld/space.h"

#include <algorithm>
#include <cmath>

#include "drld/error.h"

namespace drld {

SpaceBase SpaceBase::make(int dims, long rows, double minpts_factor, int pi_eps, int pi_minpts,
                          int max_layers) {
  if (dims < 1 || rows < 1) throw DataError("space needs a non-empty block");
  if (pi_eps < 1 || pi_minpts < 1 || max_layers < 1) throw DataError("space sizes must be positive");
  SpaceBase base;
  base.pi_eps = pi_eps;
  base.pi_minpts = pi_minpts;
  base.eps_max = std::sqrt(static_cast<double>(dims));
  base.theta0_eps = base.eps_max;
  base.eps_min = theta_eps(base, max_layers);
  base.minpts_min = 1;
  const long upper = std::lround(minpts_factor * static_cast<double>(rows));
  base.minpts_max = static_cast<int>(std::clamp(upper, 1L, rows));
  base.theta0_minpts = base.minpts_max;
  return base;
}

ParamCombo SpaceBase::midpoint() const {
  ParamCombo p;
  p.eps = 0.5 * (eps_min + eps_max);
  p.minpts = static_cast<int>(std::floor(0.5 * (minpts_min + minpts_max) + 0.5));
  return p;
}

int LayerSpace::minpts_lo() const { return static_cast<int>(std::ceil(minpts_b1 - 1e-9)); }
int LayerSpace::minpts_hi() const { return static_cast<int>(std::floor(minpts_b2 + 1e-9)); }

bool LayerSpace::contains(const ParamCombo& p) const {
  return p.eps >= eps_b1 && p.eps <= eps_b2 && p.minpts >= minpts_lo() && p.minpts <= minpts_hi();
}

double theta_eps(const SpaceBase& base, int layer) {
  double theta = base.theta0_eps;
  for (int l = 1; l <= layer; ++l) theta /= base.pi_eps;
  return theta;
}

int theta_minpts(const SpaceBase& base, int layer) {
  int theta = base.theta0_minpts;
  for (int l = 1; l <= layer; ++l) {
    theta = std::max(static_cast<int>(std::floor(static_cast<double>(theta) / base.pi_minpts + 0.5)), 1);
  }
  return theta;
}

LayerSpace layer_space(int layer, const ParamCombo& prev_optimal, const SpaceBase& base) {
  if (layer < 1) throw DataError("layers are numbered from 1");
  LayerSpace space;
  space.layer = layer;
  space.pi_eps = base.pi_eps;
  space.pi_minpts = base.pi_minpts;
  space.theta_eps = theta_eps(base, layer);
  space.theta_minpts = theta_minpts(base, layer);

  const double eps_half = 0.5 * base.pi_eps * space.theta_eps;
  space.eps_b1 = std::max(base.eps_min, prev_optimal.eps - eps_half);
  space.eps_b2 = std::min(prev_optimal.eps + eps_half, base.eps_max);

  const double minpts_half = 0.5 * base.pi_minpts * space.theta_minpts;
  space.minpts_b1 = std::max(static_cast<double>(base.minpts_min), prev_optimal.minpts - minpts_half);
  space.minpts_b2 = std::min(prev_optimal.minpts + minpts_half, static_cast<double>(base.minpts_max));
  return space;
}

}  // namespace drld
