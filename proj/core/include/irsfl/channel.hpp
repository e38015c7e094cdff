#ifndef IRSFL_CHANNEL_HPP_
#define IRSFL_CHANNEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsfl/system.hpp"

namespace irsfl {

enum class ScenarioKind {
  PowerHomogeneous,  // pure LoS, blocked direct link, devices on a half-circle
  PhaseHomogeneous,  // pure LoS, blocked direct link, devices below the IRS
  General,           // Rician fading on all links, direct link present
};

const char* scenario_name(ScenarioKind kind);
ScenarioKind scenario_from_name(const std::string& name);

/// Canonical two-dimensional geometry: AP at the origin, IRS a uniform
/// linear array along x at irs_position, devices placed by `kind`.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::General;
  int num_devices = 1;   // K
  int num_elements = 1;  // N
  std::uint64_t seed = 0;

  Position2D ap_position{0.0, 0.0};
  Position2D irs_position{100.0, 5.0};
  double half_circle_radius_m = 10.0;  // PowerHomogeneous
  double segment_x_m = 100.0;          // PhaseHomogeneous: x fixed,
  double segment_y_min_m = -30.0;      // y uniform on [y_min, y_max]
  double segment_y_max_m = 0.0;
  double disc_radius_m = 20.0;         // General
  double rician_factor_db = 3.0;       // General
  double carrier_hz = 2.4e9;
  double pathloss_exponent_irs = 2.0;     // AP-IRS and IRS-device links
  double pathloss_exponent_direct = 3.4;  // AP-device link
  double ref_loss_db = 30.0;              // at 1 m

  void validate() const;
};

/// One draw of all channels plus the cascades the phase shifts act on.
struct ChannelRealization {
  int num_devices = 0;
  int num_elements = 0;
  std::vector<std::complex<double>> h_direct;  // per device
  std::vector<cvec> h_ris;                     // per device, length N
  cvec g;                                      // IRS -> AP, length N
  std::vector<cvec> cascade;  // cascade[k][n] = conj(g[n]) * h_ris[k][n]
  std::vector<Position2D> device_positions;
};

/// Linear power gain 10^(-ref_loss_db/10) * d^(-exponent); the reference
/// distance is 1 m and distances below it are a domain error.
double pathloss_gain(double distance_m, double exponent, double ref_loss_db);

/// Deterministic per (spec, seed); draw order is fixed and documented in
/// the README so realizations replay across platforms.
ChannelRealization generate_realization(const ScenarioSpec& spec);

/// |h_direct_k + sum_n cascade_k[n] v[n]|^2 for a unit-modulus v.
/// Throws std::invalid_argument if any |v[n]| is off the unit circle by
/// more than 1e-9.
double effective_gain(const ChannelRealization& ch, int device, const cvec& v);

/// JSON replay format: complex numbers as [re, im] pairs.
std::string realization_to_json(const ChannelRealization& ch);
ChannelRealization realization_from_json(const std::string& text);

}  // namespace irsfl

#endif  // IRSFL_CHANNEL_HPP_
