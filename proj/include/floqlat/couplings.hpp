#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace floqlat {

using Complex = std::complex<double>;

namespace detail {

/// sin(x)/x, series near zero so the result never exceeds 1 in magnitude.
inline double sinc(double x) {
  double ax = std::abs(x);
  if (ax < 1e-4) {
    double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

}  // namespace detail

/// Spin placement and the bare phonon-mediated rate. Lengths are in units
/// of the phononic lattice constant a, energies in units of j0.
struct GeometryConfig {
  double spacing = 1.0;       // nearest-neighbor spin distance
  double decay_length = 1.0;  // L_c
  double j0 = 1.0;            // g_c^2 / (2 Delta_BE), the energy unit

  void validate() const {
    if (spacing <= 0.0) throw std::domain_error("GeometryConfig: spacing must be > 0");
    if (decay_length <= 0.0) throw std::domain_error("GeometryConfig: decay_length must be > 0");
    if (j0 <= 0.0) throw std::domain_error("GeometryConfig: j0 must be > 0");
  }
};

/// Bare coupling J0 * exp(-distance / L_c). Strictly decreasing in the
/// distance; rejects non-positive separations.
inline double bare_coupling(const GeometryConfig& g, double distance) {
  g.validate();
  if (distance <= 0.0) throw std::domain_error("bare_coupling: distance must be > 0");
  return g.j0 * std::exp(-distance / g.decay_length);
}

/// Square-wave drive. b0 is always derived as q*omega - a0 so that the
/// staircase period a0 + b0 stays commensurate with the drive.
struct DriveConfig {
  double a0 = 0.0;    // odd->even potential step, units of j0 (hbar = 1)
  double omega = 10.0;
  int q = 1;          // (a0 + b0) / omega

  double b0() const { return static_cast<double>(q) * omega - a0; }
  double period() const { return 2.0 * std::numbers::pi / omega; }

  /// Staircase on-site amplitude V_j for 1-based site index j. Consecutive
  /// differences alternate between a0 (even j) and b0 (odd j >= 3).
  double potential(int site) const {
    if (site < 1) throw std::domain_error("DriveConfig::potential: site index is 1-based");
    double half = 0.5 * (a0 + b0());
    if (site % 2 == 1) return b0() + half * (site - 1);
    return half * site;
  }

  /// Zeroth-order averaging assumes omega well above the hopping scale.
  bool high_frequency(double j0 = 1.0) const { return omega >= 5.0 * j0; }

  void validate() const {
    if (omega <= 0.0) throw std::domain_error("DriveConfig: omega must be > 0");
    if (q < 1) throw std::domain_error("DriveConfig: q must be a positive integer");
  }
};

/// Zeroth-order Floquet average of a hopping J under potential difference
/// dV = V_i - V_j:
///
///   J * (i omega / (2 pi dV)) * (exp(-i 2 pi dV / omega) - 1)
///     = J * exp(-i pi dV / omega) * sinc(pi dV / omega).
///
/// The second form is used: it is exact, continuous through dV = 0 (value J)
/// and keeps |result| <= |J| without a branch switch.
inline Complex floquet_coupling(double J, double dV, double omega) {
  if (omega <= 0.0) throw std::domain_error("floquet_coupling: omega must be > 0");
  double x = std::numbers::pi * dV / omega;
  return J * detail::sinc(x) * std::exp(Complex(0.0, -x));
}

struct QuadratureResult {
  Complex value;
  bool enough_steps = true;  // false when the caller requested < 1e3 steps
};

/// Independent oracle for floquet_coupling: trapezoidal average of
/// J * exp(2 i (Delta_i(t) - Delta_j(t))) over one drive period, with the
/// piecewise-linear integrated square wave
///   F(t) = -t           for t in [0, T/2]
///   F(t) = t - T        for t in [T/2, T]
/// so that Delta_i - Delta_j = (Vi - Vj) * F(t).
inline QuadratureResult time_averaged_coupling(double J, double Vi, double Vj,
                                               double omega, long steps) {
  if (omega <= 0.0) throw std::domain_error("time_averaged_coupling: omega must be > 0");
  QuadratureResult out;
  out.enough_steps = steps >= 1000;
  if (steps < 2) steps = 2;
  if (steps % 2 != 0) ++steps;  // put t = T/2 on the grid, where F has a kink
  double T = 2.0 * std::numbers::pi / omega;
  double dV = Vi - Vj;
  double h = T / static_cast<double>(steps);
  Complex sum = 0.0;
  for (long m = 0; m <= steps; ++m) {
    double t = h * static_cast<double>(m);
    double F = (2 * m <= steps) ? -t : t - T;
    Complex val = std::exp(Complex(0.0, 2.0 * dV * F));
    double w = (m == 0 || m == steps) ? 0.5 : 1.0;
    sum += w * val;
  }
  out.value = J * sum * h / T;
  return out;
}

/// Floquet-averaged hopping amplitudes of the driven bipartite array,
/// keyed by odd neighbor order (spin spacing in units of the chain pitch).
///
/// forward(2r+1)  : amplitude with dV = r (a0+b0) + a0, the coefficient that
///                  multiplies e^{+ikr} in the Bloch coupling f(k).
/// backward(2r'-1): amplitude with dV = a0 - r'(a0+b0), multiplying
///                  e^{-ikr'} in f(k).
/// even_residuals : same average at even orders (dV = m (a0+b0)); exactly
///                  suppressed for integer q, kept as a diagnostic.
struct HoppingTable {
  std::vector<int> orders;  // odd, ascending
  std::map<int, Complex> forward;
  std::map<int, Complex> backward;
  std::map<int, Complex> even_residuals;
  double j0 = 1.0;

  Complex forward_at(int order) const {
    auto it = forward.find(order);
    return it == forward.end() ? Complex(0.0) : it->second;
  }
  Complex backward_at(int order) const {
    auto it = backward.find(order);
    return it == backward.end() ? Complex(0.0) : it->second;
  }
};

inline HoppingTable build_hopping_table(const GeometryConfig& geometry,
                                        const DriveConfig& drive,
                                        std::vector<int> neighbor_orders = {1, 3}) {
  geometry.validate();
  drive.validate();
  if (neighbor_orders.empty())
    throw std::domain_error("build_hopping_table: neighbor_orders must be non-empty");
  for (int s : neighbor_orders) {
    if (s < 1 || s % 2 == 0)
      throw std::domain_error(
          "build_hopping_table: neighbor orders must be odd positive integers "
          "(even orders live only in even_residuals)");
  }
  std::sort(neighbor_orders.begin(), neighbor_orders.end());
  neighbor_orders.erase(std::unique(neighbor_orders.begin(), neighbor_orders.end()),
                        neighbor_orders.end());

  HoppingTable table;
  table.orders = neighbor_orders;
  table.j0 = geometry.j0;
  double cell = drive.a0 + drive.b0();  // = q * omega
  for (int s : neighbor_orders) {
    double J = bare_coupling(geometry, s * geometry.spacing);
    int r = (s - 1) / 2;
    int rp = (s + 1) / 2;
    table.forward[s] = floquet_coupling(J, r * cell + drive.a0, drive.omega);
    table.backward[s] = floquet_coupling(J, drive.a0 - rp * cell, drive.omega);
  }
  int max_even = neighbor_orders.back() + 1;
  for (int m = 1; 2 * m <= max_even; ++m) {
    double J = bare_coupling(geometry, 2 * m * geometry.spacing);
    table.even_residuals[2 * m] = floquet_coupling(J, m * cell, drive.omega);
  }
  return table;
}

}  // namespace floqlat
