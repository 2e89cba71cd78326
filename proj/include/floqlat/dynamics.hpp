#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "floqlat/errors.hpp"
#include "floqlat/lattice.hpp"

namespace floqlat {

/// Dephasing evolution control. Units: energies in j0, time in 1/j0.
struct LindbladConfig {
  double gamma_s = 0.0;        // per-spin sigma_z dephasing rate
  double t_max = 2000.0;
  double dt = 0.005;           // fixed RK4 step
  bool adaptive = false;       // embedded RK45 with tolerance below
  double adaptive_tol = 1e-8;
  int initial_site = 0;        // 0-based, default leftmost
  int target_site = -1;        // -1 = rightmost
  int samples = 2001;

  void validate() const {
    if (gamma_s < 0.0) throw std::domain_error("LindbladConfig: gamma_s must be >= 0");
    if (t_max <= 0.0) throw std::domain_error("LindbladConfig: t_max must be > 0");
    if (!adaptive && dt > 0.01)
      throw std::domain_error("LindbladConfig: fixed step must satisfy h <= 0.01/J0");
    if (dt <= 0.0) throw std::domain_error("LindbladConfig: dt must be > 0");
    if (samples < 2) throw std::domain_error("LindbladConfig: need >= 2 samples");
  }
};

struct TransferTrace {
  std::vector<double> times;
  Eigen::MatrixXd populations;        // sample x site
  std::vector<double> trace;
  std::vector<double> coherence_norm; // l2 norm of off-diagonal elements
  std::vector<double> fidelity;       // target-site population
  int target_site = 0;
  double max_trace_drift = 0.0;
  double min_density_eigenvalue = 0.0;
  double max_hermiticity_defect = 0.0;
  std::vector<Eigen::MatrixXcd> density_snapshots;  // at sample times
};

struct TransferMetrics {
  bool transfer_detected = false;
  double period = 0.0;
  double peak_fidelity = 0.0;
  double peak_time = 0.0;
};

namespace detail {

/// Single-excitation Lindblad right-hand side. The sigma_z^j channels act
/// on this subspace as diagonal involutions; summed over all sites they
/// damp every off-diagonal element at rate 4 gamma and leave populations
/// untouched.
inline Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& rho,
                                     double gamma) {
  Eigen::MatrixXcd drho = Complex(0.0, -1.0) * (h * rho - rho * h);
  if (gamma > 0.0) {
    Eigen::MatrixXcd off = rho;
    off.diagonal().setZero();
    drho -= 4.0 * gamma * off;
  }
  return drho;
}

inline void rk4_step(const Eigen::MatrixXcd& h, Eigen::MatrixXcd& rho, double dt, double gamma) {
  Eigen::MatrixXcd k1 = lindblad_rhs(h, rho, gamma);
  Eigen::MatrixXcd k2 = lindblad_rhs(h, rho + 0.5 * dt * k1, gamma);
  Eigen::MatrixXcd k3 = lindblad_rhs(h, rho + 0.5 * dt * k2, gamma);
  Eigen::MatrixXcd k4 = lindblad_rhs(h, rho + dt * k3, gamma);
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Cash-Karp embedded pair, error-controlled step from t to t + span.
inline void rk45_advance(const Eigen::MatrixXcd& h, Eigen::MatrixXcd& rho, double span,
                         double tol, double gamma) {
  static const double b5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
  static const double b4[6] = {2825.0 / 27648, 0,          18575.0 / 48384,
                               13525.0 / 55296, 277.0 / 14336, 0.25};
  static const double c[6][5] = {
      {},
      {0.2},
      {3.0 / 40, 9.0 / 40},
      {0.3, -0.9, 1.2},
      {-11.0 / 54, 2.5, -70.0 / 27, 35.0 / 27},
      {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
  double t = 0.0;
  double dt = std::min(span, 0.01);
  while (t < span) {
    dt = std::min(dt, span - t);
    Eigen::MatrixXcd k[6];
    k[0] = lindblad_rhs(h, rho, gamma);
    for (int s = 1; s < 6; ++s) {
      Eigen::MatrixXcd y = rho;
      for (int j = 0; j < s; ++j) y += dt * c[s][j] * k[j];
      k[s] = lindblad_rhs(h, y, gamma);
    }
    Eigen::MatrixXcd y5 = rho, y4 = rho;
    for (int s = 0; s < 6; ++s) {
      y5 += dt * b5[s] * k[s];
      y4 += dt * b4[s] * k[s];
    }
    double err = (y5 - y4).cwiseAbs().maxCoeff();
    if (err <= tol || dt < 1e-12) {
      rho = y5;
      t += dt;
      double grow = err > 0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
      dt *= std::min(2.0, std::max(0.2, grow));
    } else {
      dt *= std::max(0.2, 0.9 * std::pow(tol / err, 0.25));
    }
  }
}

}  // namespace detail

/// Integrate d rho/dt = -i[H, rho] + gamma_s sum_j D[sigma_j^z] rho in the
/// single-excitation subspace of a 1D chain, starting from a pure
/// excitation on cfg.initial_site. Records populations, trace, coherence
/// norm and target-site fidelity at every sample.
inline TransferTrace evolve_lindblad(const LatticeOperator& chain, const LindbladConfig& cfg) {
  cfg.validate();
  if (chain.cells_y != 0 || chain.ky.has_value())
    throw std::domain_error("evolve_lindblad: expected a 1D chain operator");
  int d = chain.dimension();
  if (cfg.initial_site < 0 || cfg.initial_site >= d)
    throw std::domain_error("evolve_lindblad: initial site out of range");
  int target = cfg.target_site < 0 ? d - 1 : cfg.target_site;
  if (target < 0 || target >= d)
    throw std::domain_error("evolve_lindblad: target site out of range");

  TransferTrace tr;
  tr.target_site = target;
  tr.times.reserve(cfg.samples);
  tr.populations.resize(cfg.samples, d);
  tr.trace.reserve(cfg.samples);
  tr.coherence_norm.reserve(cfg.samples);
  tr.fidelity.reserve(cfg.samples);
  tr.density_snapshots.reserve(cfg.samples);
  tr.min_density_eigenvalue = 1.0;

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  rho(cfg.initial_site, cfg.initial_site) = 1.0;

  double sample_dt = cfg.t_max / (cfg.samples - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  double t = 0.0;

  auto record = [&](int si) {
    tr.times.push_back(t);
    for (int i = 0; i < d; ++i) tr.populations(si, i) = rho(i, i).real();
    double trace = rho.trace().real();
    tr.trace.push_back(trace);
    Eigen::MatrixXcd off = rho;
    off.diagonal().setZero();
    tr.coherence_norm.push_back(off.norm());
    tr.fidelity.push_back(rho(target, target).real());
    tr.density_snapshots.push_back(rho);
    tr.max_trace_drift = std::max(tr.max_trace_drift, std::abs(trace - 1.0));
    tr.max_hermiticity_defect =
        std::max(tr.max_hermiticity_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    es.compute(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    tr.min_density_eigenvalue = std::min(tr.min_density_eigenvalue, es.eigenvalues().minCoeff());
  };

  record(0);
  for (int si = 1; si < cfg.samples; ++si) {
    double t_next = si * sample_dt;
    if (cfg.adaptive) {
      detail::rk45_advance(chain.matrix, rho, t_next - t, cfg.adaptive_tol, cfg.gamma_s);
    } else {
      double remaining = t_next - t;
      int steps = std::max(1, static_cast<int>(std::ceil(remaining / cfg.dt - 1e-12)));
      double h = remaining / steps;
      for (int s = 0; s < steps; ++s) detail::rk4_step(chain.matrix, rho, h, cfg.gamma_s);
    }
    t = t_next;
    record(si);
  }

  if (tr.max_trace_drift > 1e-6)
    throw IntegratorError("evolve_lindblad: trace drift exceeded 1e-6");
  if (tr.min_density_eigenvalue < -1e-6)
    throw PositivityError("evolve_lindblad: density matrix eigenvalue below -1e-6");
  return tr;
}

/// Period and peak of the target-site population. The period is twice the
/// time of the first local maximum (quadratic interpolation across three
/// samples); flags "no transfer" if the population never exceeds 0.1.
inline TransferMetrics transfer_metrics(const TransferTrace& tr) {
  TransferMetrics m;
  size_t n = tr.fidelity.size();
  if (n < 3) return m;

  size_t peak_idx = 0;
  for (size_t i = 0; i < n; ++i)
    if (tr.fidelity[i] > tr.fidelity[peak_idx]) peak_idx = i;
  m.peak_fidelity = tr.fidelity[peak_idx];
  m.peak_time = tr.times[peak_idx];
  if (m.peak_fidelity < 0.1) return m;  // no transfer
  m.transfer_detected = true;

  for (size_t i = 1; i + 1 < n; ++i) {
    double pm = tr.fidelity[i - 1], p0 = tr.fidelity[i], pp = tr.fidelity[i + 1];
    if (p0 >= pm && p0 >= pp && p0 > 0.1) {
      double denom = pm - 2.0 * p0 + pp;
      double shift = std::abs(denom) > 1e-300 ? 0.5 * (pm - pp) / denom : 0.0;
      double dt = tr.times[i + 1] - tr.times[i];
      m.period = 2.0 * (tr.times[i] + shift * dt);
      break;
    }
  }
  return m;
}

/// Validation oracle: evolve the same model in the full 2^(2N) Hilbert
/// space (sigma+ sigma- hops, full sigma_z dephasing) and return the max
/// element-wise deviation of its single-excitation block from
/// evolve_lindblad. Refused for N > 2.
inline double full_space_check(const LatticeOperator& chain, const LindbladConfig& cfg) {
  if (chain.cells_x > 2) throw std::domain_error("full_space_check: refused for N > 2");
  int d = chain.dimension();
  int dim = 1 << d;

  Eigen::MatrixXcd hf = Eigen::MatrixXcd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b)
    for (int j = 0; j < d; ++j) {
      if (!(b & (1 << j))) continue;
      for (int i = 0; i < d; ++i) {
        if (i == j || (b & (1 << i))) continue;
        int b2 = (b ^ (1 << j)) | (1 << i);
        hf(b2, b) += chain.matrix(i, j);
      }
    }

  auto zsign = [&](int b, int j) { return (b & (1 << j)) ? 1.0 : -1.0; };
  auto rhs = [&](const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd drho = Complex(0.0, -1.0) * (hf * rho - rho * hf);
    if (cfg.gamma_s > 0.0) {
      for (int j = 0; j < d; ++j) {
        Eigen::MatrixXcd zrz(dim, dim);
        for (int b = 0; b < dim; ++b)
          for (int c = 0; c < dim; ++c) zrz(b, c) = zsign(b, j) * zsign(c, j) * rho(b, c);
        drho += cfg.gamma_s * (zrz - rho);
      }
    }
    return drho;
  };

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  int init = 1 << cfg.initial_site;
  rho(init, init) = 1.0;

  TransferTrace sub = evolve_lindblad(chain, cfg);

  double sample_dt = cfg.t_max / (cfg.samples - 1);
  double worst = 0.0;
  std::vector<int> single(d);
  for (int j = 0; j < d; ++j) single[j] = 1 << j;

  auto compare = [&](int si) {
    const Eigen::MatrixXcd& r = sub.density_snapshots[si];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        worst = std::max(worst, std::abs(rho(single[i], single[j]) - r(i, j)));
  };

  compare(0);
  for (int si = 1; si < cfg.samples; ++si) {
    int steps = std::max(1, static_cast<int>(std::ceil(sample_dt / cfg.dt - 1e-12)));
    double h = sample_dt / steps;
    for (int s = 0; s < steps; ++s) {
      Eigen::MatrixXcd k1 = rhs(rho);
      Eigen::MatrixXcd k2 = rhs(rho + 0.5 * h * k1);
      Eigen::MatrixXcd k3 = rhs(rho + 0.5 * h * k2);
      Eigen::MatrixXcd k4 = rhs(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    compare(si);
  }
  return worst;
}

}  // namespace floqlat
