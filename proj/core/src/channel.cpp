#include "irsfl/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "irsfl/rng.hpp"
#include "json.hpp"

namespace irsfl {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double distance(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Far-field ULA steering phase for element n (array along x, spacing
// lambda/2, centered on the IRS): pi * n_c * cos(angle to the source).
cvec steering_vector(int n_elements, const Position2D& irs, const Position2D& src) {
  cvec v(n_elements);
  const double cos_phi = (src.x - irs.x) / distance(irs, src);
  for (int n = 0; n < n_elements; ++n) {
    const double n_c = n - 0.5 * (n_elements - 1);
    const double phase = std::numbers::pi * n_c * cos_phi;
    v[n] = std::polar(1.0, phase);
  }
  return v;
}

std::complex<double> los_phasor(double d, double wavelength) {
  return std::polar(1.0, -2.0 * std::numbers::pi * d / wavelength);
}

}  // namespace

const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::PowerHomogeneous: return "power_homogeneous";
    case ScenarioKind::PhaseHomogeneous: return "phase_homogeneous";
    case ScenarioKind::General: return "general";
  }
  return "?";
}

ScenarioKind scenario_from_name(const std::string& name) {
  if (name == "power_homogeneous") return ScenarioKind::PowerHomogeneous;
  if (name == "phase_homogeneous") return ScenarioKind::PhaseHomogeneous;
  if (name == "general") return ScenarioKind::General;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

void ScenarioSpec::validate() const {
  if (num_devices < 1) throw std::invalid_argument("scenario needs at least one device");
  if (num_elements < 1) throw std::invalid_argument("scenario needs at least one IRS element");
  if (rician_factor_db < 0.0) throw std::invalid_argument("Rician factor must be >= 0 dB");
  if (carrier_hz <= 0.0) throw std::invalid_argument("carrier frequency must be positive");
}

double pathloss_gain(double distance_m, double exponent, double ref_loss_db) {
  if (distance_m < 1.0) {
    throw std::domain_error("pathloss_gain: distance below the 1 m reference");
  }
  return std::pow(10.0, -ref_loss_db / 10.0) * std::pow(distance_m, -exponent);
}

ChannelRealization generate_realization(const ScenarioSpec& spec) {
  spec.validate();
  const int K = spec.num_devices;
  const int N = spec.num_elements;
  const double wavelength = kSpeedOfLight / spec.carrier_hz;

  Rng rng(spec.seed);

  ChannelRealization ch;
  ch.num_devices = K;
  ch.num_elements = N;
  ch.h_direct.assign(K, {0.0, 0.0});
  ch.h_ris.assign(K, cvec(N));
  ch.g.resize(N);
  ch.cascade.assign(K, cvec(N));
  ch.device_positions.resize(K);

  // Draw order: device placements first, then (General only) the scatter
  // components for g, then per device h_ris and h_direct.
  for (int k = 0; k < K; ++k) {
    Position2D pos;
    switch (spec.kind) {
      case ScenarioKind::PowerHomogeneous: {
        const double angle = rng.uniform(-std::numbers::pi, 0.0);
        pos.x = spec.irs_position.x + spec.half_circle_radius_m * std::cos(angle);
        pos.y = spec.irs_position.y + spec.half_circle_radius_m * std::sin(angle);
        break;
      }
      case ScenarioKind::PhaseHomogeneous: {
        pos.x = spec.segment_x_m;
        pos.y = rng.uniform(spec.segment_y_min_m, spec.segment_y_max_m);
        break;
      }
      case ScenarioKind::General: {
        const double r = spec.disc_radius_m * std::sqrt(rng.uniform());
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        pos.x = spec.irs_position.x + r * std::cos(angle);
        pos.y = spec.irs_position.y + r * std::sin(angle);
        break;
      }
    }
    ch.device_positions[k] = pos;
  }

  const bool rician = spec.kind == ScenarioKind::General;
  const double kappa = std::pow(10.0, spec.rician_factor_db / 10.0);
  const double los_w = rician ? std::sqrt(kappa / (1.0 + kappa)) : 1.0;
  const double nlos_w = rician ? std::sqrt(1.0 / (1.0 + kappa)) : 0.0;

  // IRS -> AP link.
  {
    const double d = distance(spec.irs_position, spec.ap_position);
    const double amp = std::sqrt(pathloss_gain(d, spec.pathloss_exponent_irs, spec.ref_loss_db));
    const cvec steer = steering_vector(N, spec.irs_position, spec.ap_position);
    const auto phasor = los_phasor(d, wavelength);
    for (int n = 0; n < N; ++n) {
      std::complex<double> h = los_w * phasor * steer[n];
      if (rician) h += nlos_w * rng.cn01();
      ch.g[n] = amp * h;
    }
  }

  for (int k = 0; k < K; ++k) {
    const auto& pos = ch.device_positions[k];
    const double d_irs = std::max(1.0, distance(pos, spec.irs_position));
    const double amp_irs =
        std::sqrt(pathloss_gain(d_irs, spec.pathloss_exponent_irs, spec.ref_loss_db));
    const cvec steer = steering_vector(N, spec.irs_position, pos);
    const auto phasor = los_phasor(d_irs, wavelength);
    for (int n = 0; n < N; ++n) {
      std::complex<double> h = los_w * phasor * steer[n];
      if (rician) h += nlos_w * rng.cn01();
      ch.h_ris[k][n] = amp_irs * h;
    }

    if (rician) {
      const double d_ap = std::max(1.0, distance(pos, spec.ap_position));
      const double amp_d =
          std::sqrt(pathloss_gain(d_ap, spec.pathloss_exponent_direct, spec.ref_loss_db));
      std::complex<double> h = los_w * los_phasor(d_ap, wavelength) + nlos_w * rng.cn01();
      ch.h_direct[k] = amp_d * h;
    }

    for (int n = 0; n < N; ++n) {
      ch.cascade[k][n] = std::conj(ch.g[n]) * ch.h_ris[k][n];
    }
  }
  return ch;
}

double effective_gain(const ChannelRealization& ch, int device, const cvec& v) {
  if (device < 0 || device >= ch.num_devices) {
    throw std::invalid_argument("effective_gain: device index out of range");
  }
  if (static_cast<int>(v.size()) != ch.num_elements) {
    throw std::invalid_argument("effective_gain: phase vector size mismatch");
  }
  std::complex<double> sum = ch.h_direct[device];
  for (int n = 0; n < ch.num_elements; ++n) {
    if (std::fabs(std::abs(v[n]) - 1.0) > 1e-9) {
      throw std::invalid_argument("effective_gain: phase element off the unit circle");
    }
    sum += ch.cascade[device][n] * v[n];
  }
  return std::norm(sum);
}

namespace {

nlohmann::json complex_to_json(const std::complex<double>& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

std::complex<double> complex_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json cvec_to_json(const cvec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& z : v) arr.push_back(complex_to_json(z));
  return arr;
}

cvec cvec_from_json(const nlohmann::json& j) {
  cvec v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(complex_from_json(e));
  return v;
}

}  // namespace

std::string realization_to_json(const ChannelRealization& ch) {
  nlohmann::json j;
  j["num_devices"] = ch.num_devices;
  j["num_elements"] = ch.num_elements;
  j["h_direct"] = cvec_to_json(ch.h_direct);
  j["g"] = cvec_to_json(ch.g);
  j["h_ris"] = nlohmann::json::array();
  for (const auto& v : ch.h_ris) j["h_ris"].push_back(cvec_to_json(v));
  j["positions"] = nlohmann::json::array();
  for (const auto& p : ch.device_positions) {
    j["positions"].push_back(nlohmann::json::array({p.x, p.y}));
  }
  return j.dump();
}

ChannelRealization realization_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ChannelRealization ch;
  ch.num_devices = j.at("num_devices").get<int>();
  ch.num_elements = j.at("num_elements").get<int>();
  ch.h_direct = cvec_from_json(j.at("h_direct"));
  ch.g = cvec_from_json(j.at("g"));
  for (const auto& v : j.at("h_ris")) ch.h_ris.push_back(cvec_from_json(v));
  for (const auto& p : j.at("positions")) {
    ch.device_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  ch.cascade.assign(ch.num_devices, cvec(ch.num_elements));
  for (int k = 0; k < ch.num_devices; ++k) {
    for (int n = 0; n < ch.num_elements; ++n) {
      ch.cascade[k][n] = std::conj(ch.g[n]) * ch.h_ris[k][n];
    }
  }
  return ch;
}

}  // namespace irsfl
