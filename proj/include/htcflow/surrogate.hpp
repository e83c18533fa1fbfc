#pragma once

#include <cstdint>

#include "htcflow/domain.hpp"

namespace htc {

enum class CostMode { none, sleep, spin };

/// Parameters of the synthetic HTC generator standing in for the CFD run.
struct SurrogateParams {
  double base = 10.0;          // W/(m^2 K), free-convection floor
  double vel_coeff = 6.0;      // W/(m^2 K) / (m/s)^vel_exponent
  double vel_exponent = 0.8;
  double temp_coeff = 0.5;     // W/(m^2 K) / degC
  double edge_amp = 0.5;
  double edge_scale = 0.05;    // m
  std::int64_t face_phase = 0;

  /// Artificial per-invocation cost, for reproducing runtime accounting.
  CostMode cost_mode = CostMode::none;
  double cost_seconds = 0.0;

  void validate() const;
};

constexpr double kMinHtc = 0.1;

/// Smooth positive modulation g(x) in [0.5, 1.5]: a product of low-frequency
/// sinusoids in face-local coordinates with phases and frequencies drawn from `face_phase`.
double smooth_modulation(const Face& face, const Point3& x, std::int64_t face_phase);

/// Upper bound on |grad g| over the face, for smoothness checks.
double modulation_lipschitz(const Face& face, std::int64_t face_phase);

/// Distance from a point on the face plane to the nearest boundary segment.
double d_edge(const Face& face, const Point3& point);

/// value(x) = [base + temp_coeff (t_air - 20) + vel_coeff v^vel_exponent g(x)]
///            * (1 + edge_amp exp(-d_edge(x) / edge_scale)), clamped below at kMinHtc.
HTCField synth_htc(const Face& face, const LoadCase& load_case, const SurrogateParams& params);

/// Burns `seconds` according to `mode`; shared by the surrogate and synthetic workloads.
void burn(CostMode mode, double seconds);

}  // namespace htc
