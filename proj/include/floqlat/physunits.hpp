#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace floqlat {

inline constexpr double hbar_si = 1.054571817e-34;  // J s

/// Device parameters of the diamond phononic-crystal network, SI units
/// with angular frequencies. The detuning default is the preset derived
/// from the stated bare rate, not a measured constant.
struct PhysicalParams {
  double strain_sensitivity = 2.0 * std::numbers::pi * 1e15;  // d [rad/s per strain]
  double sound_speed = 1.71e4;                                // v_l [m/s]
  double mass_density = 3539.0;                               // [kg/m^3]
  double lattice_const = 100e-9;                              // a [m]
  double cross_section = 100e-9 * 20e-9;                      // A [m^2]
  double band_edge = 2.0 * std::numbers::pi * 44.933e9;       // omega_BE [rad/s]
  double strain_profile = 1.0;                                // xi, dimensionless
  double raman_factor = 0.1;                                  // g / g_k
  double decay_length_ratio = 1.0;                            // L_c / a
  double detuning = 2.0 * std::numbers::pi * 76e6;            // Delta_BE [rad/s]
  double spin_dephasing = 2.0 * std::numbers::pi * 100.0;     // gamma_s [rad/s]
  double mech_q = 1e7;
  double coherence_t2 = 10e-3;                                // T2* [s]

  void validate() const {
    if (strain_sensitivity <= 0 || sound_speed <= 0 || mass_density <= 0 ||
        lattice_const <= 0 || cross_section <= 0 || band_edge <= 0 ||
        raman_factor < 0 || decay_length_ratio <= 0 || spin_dephasing < 0 ||
        mech_q <= 0 || coherence_t2 <= 0)
      throw std::domain_error("PhysicalParams: rates and lengths must be positive");
    if (strain_profile < 0)
      throw std::domain_error("PhysicalParams: strain profile must be >= 0");
  }
};

/// Spin-phonon coupling g_k = (d / v_l) sqrt(hbar omega_BE / (4 pi rho a A)) xi.
inline double spin_phonon_coupling(const PhysicalParams& p) {
  p.validate();
  double under = hbar_si * p.band_edge /
                 (4.0 * std::numbers::pi * p.mass_density * p.lattice_const * p.cross_section);
  return p.strain_sensitivity / p.sound_speed * std::sqrt(under) * p.strain_profile;
}

/// Band-gap engineered coupling g_c = (g/g_k) g_k sqrt(2 pi a / L_c).
inline double bandgap_coupling(const PhysicalParams& p) {
  return p.raman_factor * spin_phonon_coupling(p) *
         std::sqrt(2.0 * std::numbers::pi / p.decay_length_ratio);
}

struct FeasibilityReport {
  double g_k = 0.0;            // rad/s
  double g_c = 0.0;            // rad/s
  double j0 = 0.0;             // g_c^2 / (2 Delta_BE), rad/s
  double gamma_m = 0.0;        // omega_BE / Q, rad/s
  double gamma_s = 0.0;        // rad/s
  double transfer_time = 0.0;  // 900 / J0, s
  double coherence_t2 = 0.0;   // s
  bool coupling_dominates = false;  // g_c >> gamma_s, gamma_m (factor 100)
  bool fits_coherence = false;      // transfer_time < T2*
};

/// Bare spin-spin rate J0 = g_c^2 / (2 Delta_BE) plus the decoherence
/// hierarchy used to argue feasibility.
inline FeasibilityReport bare_rate(const PhysicalParams& p) {
  p.validate();
  if (p.detuning <= 0.0)
    throw std::domain_error("bare_rate: Delta_BE must be > 0 (spin above the band edge)");
  FeasibilityReport r;
  r.g_k = spin_phonon_coupling(p);
  r.g_c = bandgap_coupling(p);
  r.j0 = r.g_c * r.g_c / (2.0 * p.detuning);
  r.gamma_m = p.band_edge / p.mech_q;
  r.gamma_s = p.spin_dephasing;
  r.transfer_time = 900.0 / r.j0;
  r.coherence_t2 = p.coherence_t2;
  r.coupling_dominates = r.g_c > 100.0 * r.gamma_s && r.g_c > 100.0 * r.gamma_m;
  r.fits_coherence = r.transfer_time < p.coherence_t2;
  return r;
}

}  // namespace floqlat
