#ifndef ASYMFLOW_SAMPLED_CURVE_HPP
#define ASYMFLOW_SAMPLED_CURVE_HPP

#include <vector>

#include "asymflow/errors.hpp"
#include "asymflow/linalg.hpp"

namespace asymflow {

/// A curve gamma : [t0, tK] -> M given by samples at strictly increasing times.
/// Analysis routines treat consecutive samples as the finest available
/// resolution; nothing is interpolated behind the caller's back.
struct SampledCurve {
  Vec times;
  std::vector<Vec> points;

  int segments() const { return static_cast<int>(times.size()) - 1; }

  void validate() const {
    if (times.size() != points.size())
      throw InputError("sampled curve: times/points length mismatch");
    if (times.size() < 2) throw InputError("sampled curve needs at least two samples");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw InputError("sampled curve times must be strictly increasing");
  }
};

/// Output of the geodesic integrator. `exited` is set when the trajectory
/// left the model domain and was truncated at `exit_time`. Velocities are the
/// integrator's own states, one per sample.
struct GeodesicResult {
  SampledCurve curve;
  std::vector<Vec> velocities;
  bool exited = false;
  double exit_time = 0.0;
};

}  // namespace asymflow

#endif
