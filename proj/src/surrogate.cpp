#include "htcflow/surrogate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "htcflow/error.hpp"
#include "htcflow/rng.hpp"

namespace htc {

void SurrogateParams::validate() const {
  if (!(base > 0.0)) throw Error(Errc::invalid_argument, "surrogate: base must be > 0");
  if (!(edge_scale > 0.0)) throw Error(Errc::invalid_argument, "surrogate: edge_scale must be > 0");
  if (!(vel_exponent > 0.0 && vel_exponent <= 1.5)) {
    throw Error(Errc::invalid_argument, "surrogate: vel_exponent must lie in (0, 1.5]");
  }
  if (!(edge_amp >= 0.0)) throw Error(Errc::invalid_argument, "surrogate: edge_amp must be >= 0");
  if (!std::isfinite(vel_coeff) || !std::isfinite(temp_coeff)) {
    throw Error(Errc::non_finite_value, "surrogate: coefficients must be finite");
  }
  if (!(cost_seconds >= 0.0)) throw Error(Errc::invalid_argument, "surrogate: cost_seconds must be >= 0");
}

namespace {

struct Modulation {
  double ku, kv;  // rad/m
  double pu, pv;  // rad
};

Modulation modulation_for(const Face& face, std::int64_t face_phase) {
  double lu = 0.0;
  double lv = 0.0;
  for (const auto& b : face.boundary()) {
    const auto q = face.frame().to_local(b);
    lu = std::max(lu, std::abs(q.x()));
    lv = std::max(lv, std::abs(q.y()));
  }
  lu = std::max(lu, 1e-12);
  lv = std::max(lv, 1e-12);
  const auto seed = static_cast<std::uint64_t>(face_phase);
  auto unit = [](std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; };
  const double au = 0.5 + unit(derive_seed(seed, 1));
  const double av = 0.5 + unit(derive_seed(seed, 2));
  const double two_pi = 2.0 * std::numbers::pi;
  return {std::numbers::pi * au / lu, std::numbers::pi * av / lv, two_pi * unit(derive_seed(seed, 3)),
          two_pi * unit(derive_seed(seed, 4))};
}

}  // namespace

double smooth_modulation(const Face& face, const Point3& x, std::int64_t face_phase) {
  const Modulation m = modulation_for(face, face_phase);
  const auto q = face.frame().to_local(x);
  return 1.0 + 0.5 * std::sin(m.ku * q.x() + m.pu) * std::sin(m.kv * q.y() + m.pv);
}

double modulation_lipschitz(const Face& face, std::int64_t face_phase) {
  const Modulation m = modulation_for(face, face_phase);
  return 0.5 * std::hypot(m.ku, m.kv);
}

double d_edge(const Face& face, const Point3& point) {
  const double scale = std::max(1.0, (face.boundary()[0] - face.boundary()[face.boundary().size() / 2]).norm());
  if (std::abs(face.frame().signed_distance(point)) > Face::kPlaneTolerance * 1e3 * scale) {
    throw Error(Errc::off_plane, "d_edge: point is off the plane of face " + std::to_string(face.face_id()));
  }
  return distance_to_polygon_boundary(point, face.boundary());
}

void burn(CostMode mode, double seconds) {
  if (mode == CostMode::none || !(seconds > 0.0)) return;
  const auto duration = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(seconds));
  if (mode == CostMode::sleep) {
    std::this_thread::sleep_for(duration);
    return;
  }
  const auto until = std::chrono::steady_clock::now() + duration;
  volatile double sink = 0.0;
  while (std::chrono::steady_clock::now() < until) {
    for (int i = 0; i < 256; ++i) sink = sink + 1e-9;
  }
}

HTCField synth_htc(const Face& face, const LoadCase& load_case, const SurrogateParams& params) {
  params.validate();
  load_case.validate();
  const Modulation m = modulation_for(face, params.face_phase);
  const double floor_part = params.base + params.temp_coeff * (load_case.t_air - 20.0);
  const double vel_part = params.vel_coeff * std::pow(load_case.v, params.vel_exponent);

  HTCField field{face.face_id(), load_case.case_id, {}};
  field.values.reserve(face.size());
  for (const auto& node : face.nodes()) {
    const auto q = face.frame().to_local(node.position);
    const double g = 1.0 + 0.5 * std::sin(m.ku * q.x() + m.pu) * std::sin(m.kv * q.y() + m.pv);
    const double edge = 1.0 + params.edge_amp * std::exp(-distance_to_polygon_boundary(node.position, face.boundary()) /
                                                         params.edge_scale);
    field.values.push_back(std::max((floor_part + vel_part * g) * edge, kMinHtc));
  }
  burn(params.cost_mode, params.cost_seconds);
  return field;
}

}  // namespace htc
