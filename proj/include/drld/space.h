#pragma once

#include "drld/dbscan.h"

namespace drld {

// Layer-0 search range. Eps lives in (eps_min, eps_max] with eps_max = sqrt(d)
// after normalization; MinPts in [1, minpts_max].
struct SpaceBase {
  double eps_min = 0.0;
  double eps_max = 0.0;
  int minpts_min = 1;
  int minpts_max = 1;
  double theta0_eps = 0.0;  // width of the full Eps range
  int theta0_minpts = 1;    // width of the full MinPts range
  int pi_eps = 5;           // searchable points per layer
  int pi_minpts = 4;

  // eps_min = sqrt(d) / pi_eps^max_layers (the finest Eps step), minpts_max =
  // max(1, round(minpts_factor * n)).
  static SpaceBase make(int dims, long rows, double minpts_factor, int pi_eps, int pi_minpts,
                        int max_layers);

  // Layer-1 starting point: the midpoint of both ranges (MinPts rounds half up).
  ParamCombo midpoint() const;
};

struct LayerSpace {
  int layer = 1;
  double eps_b1 = 0.0, eps_b2 = 0.0, theta_eps = 0.0;
  double minpts_b1 = 1.0, minpts_b2 = 1.0;
  int theta_minpts = 1;
  int pi_eps = 5;
  int pi_minpts = 4;

  // Integer MinPts range representable inside the real bounds.
  int minpts_lo() const;
  int minpts_hi() const;
  bool contains(const ParamCombo& p) const;
};

double theta_eps(const SpaceBase& base, int layer);
int theta_minpts(const SpaceBase& base, int layer);

// Bounds centred on the previous layer's optimum, clipped to layer 0.
LayerSpace layer_space(int layer, const ParamCombo& prev_optimal, const SpaceBase& base);

}  // namespace drld
