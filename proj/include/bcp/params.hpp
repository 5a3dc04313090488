#pragma once

#include <cmath>
#include <limits>

#include "bcp/errors.hpp"

namespace bcp {

// Model parameters in the (a, p, q) chart. a is the vertex activity,
// p the edge probability, q the cluster weight. The spin-side chart
// (K, Delta) is tied by p = 1 - exp(-2K) and a/(1-a) = exp(-Delta);
// r = sqrt(1-p) shows up in every configuration weight.
//
// a = 1 is the fully-open boundary of the parameter space: every vertex is
// forced open and the vertex activity drops out of the weights.
struct ModelParams {
  double a = 0.5;
  double p = 0.5;
  double q = 1.0;

  static ModelParams from_ap(double a, double p, double q) {
    if (!(a > 0.0) || a > 1.0) throw validation_error("params: need a in (0, 1]");
    if (!(p >= 0.0) || p >= 1.0) throw validation_error("params: need p in [0, 1)");
    if (!(q > 0.0)) throw validation_error("params: need q > 0");
    return ModelParams{a, p, q};
  }

  static ModelParams from_coupling(double K, double Delta, double q) {
    if (!(K >= 0.0)) throw validation_error("params: need K >= 0");
    if (!std::isfinite(Delta)) throw validation_error("params: Delta must be finite");
    double p = -std::expm1(-2.0 * K);        // 1 - e^{-2K}
    double a = 1.0 / (1.0 + std::exp(Delta));  // a/(1-a) = e^{-Delta}
    return from_ap(a, p, q);
  }

  double r() const { return std::sqrt(1.0 - p); }

  double K() const { return -0.5 * std::log1p(-p); }

  double Delta() const {
    if (a >= 1.0) return -std::numeric_limits<double>::infinity();
    return std::log((1.0 - a) / a);
  }

  // log(a / (1-a)); only valid for a < 1 (the a = 1 case never multiplies
  // by the activity, callers branch on it).
  double log_vertex_ratio() const {
    if (a >= 1.0) throw validation_error("params: vertex ratio undefined at a = 1");
    return std::log(a) - std::log1p(-a);
  }

  // log(p / (1-p)); -inf at p = 0, callers skip open-edge terms there.
  double log_edge_ratio() const {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(p) - std::log1p(-p);
  }
};

}  // namespace bcp
