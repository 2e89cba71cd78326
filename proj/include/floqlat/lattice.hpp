#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "floqlat/bloch.hpp"
#include "floqlat/couplings.hpp"
#include "floqlat/errors.hpp"

namespace floqlat {

enum class Boundary { Open, Periodic };

/// Site descriptor: cell indices (0-based) and sublattice letter.
/// 1D uses x only with sublattice A/B; the 2D network and the strip use
/// A/B/C/D with B displaced along x, C along y.
struct SiteLabel {
  int x = 0;
  int y = 0;
  char sub = 'A';
};

inline int chiral_sign(const SiteLabel& s) {
  return (s.sub == 'A' || s.sub == 'D') ? +1 : -1;
}

/// Dense single-excitation Hamiltonian with a labeled site basis.
struct LatticeOperator {
  Eigen::MatrixXcd matrix;
  std::vector<SiteLabel> labels;
  Boundary boundary_x = Boundary::Open;
  Boundary boundary_y = Boundary::Open;
  int cells_x = 0;
  int cells_y = 0;                 // 0 for 1D chains
  std::optional<double> ky;        // set for strip operators
  bool ky_wrapped = false;         // |ky| > pi input was folded back

  int dimension() const { return static_cast<int>(matrix.rows()); }
};

inline double hermiticity_defect(const LatticeOperator& op) {
  return (op.matrix - op.matrix.adjoint()).cwiseAbs().maxCoeff();
}

/// max |(Gamma H Gamma + H)_{ij}| with Gamma = chiral signs on the basis.
inline double chiral_defect(const LatticeOperator& op) {
  int d = op.dimension();
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double g = chiral_sign(op.labels[i]) * chiral_sign(op.labels[j]);
      worst = std::max(worst, std::abs(g * op.matrix(i, j) + op.matrix(i, j)));
    }
  return worst;
}

namespace detail {

constexpr int kMaxDenseDim = 10000;
constexpr int kMaxNetworkCells = 12;  // documented override via allow_large

/// Open or periodic bipartite chain, 2N sites. Upper triangle gets
/// forward(s) when the left partner sits on sublattice A (even 0-based
/// index), conj(backward(s)) when it sits on B; Hermitian completion.
inline Eigen::MatrixXcd chain_matrix(int n_cells, const HoppingTable& table,
                                     Boundary boundary) {
  int d = 2 * n_cells;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int s : table.orders) {
      int j = i + s;
      if (boundary == Boundary::Open) {
        if (j >= d) continue;
      } else {
        j %= d;
      }
      Complex amp = (i % 2 == 0) ? table.forward_at(s) : std::conj(table.backward_at(s));
      h(i, j) += amp;
      h(j, i) += std::conj(amp);
    }
  }
  return h;
}

}  // namespace detail

/// 1D driven chain with N unit cells (2N spins).
inline LatticeOperator build_chain(int n_cells, const HoppingTable& table,
                                   Boundary boundary = Boundary::Open) {
  if (n_cells < 2) throw std::domain_error("build_chain: need N >= 2 cells");
  if (2 * n_cells > detail::kMaxDenseDim)
    throw std::domain_error("build_chain: dimension exceeds dense cap");
  LatticeOperator op;
  op.matrix = detail::chain_matrix(n_cells, table, boundary);
  op.boundary_x = boundary;
  op.cells_x = n_cells;
  op.labels.resize(2 * n_cells);
  for (int i = 0; i < 2 * n_cells; ++i)
    op.labels[i] = {i / 2, 0, i % 2 == 0 ? 'A' : 'B'};
  return op;
}

/// 2D square network with N x N unit cells ((2N)^2 spins): Kronecker sum
/// of the x and y chains, couplings only along rows (A-B, C-D) and columns
/// (A-C, B-D), same table on both axes.
inline LatticeOperator build_network(int n_cells, const HoppingTable& table,
                                     Boundary boundary_x = Boundary::Open,
                                     Boundary boundary_y = Boundary::Open,
                                     bool allow_large = false) {
  if (n_cells < 2) throw std::domain_error("build_network: need N >= 2 cells");
  if (n_cells > detail::kMaxNetworkCells && !allow_large)
    throw std::domain_error("build_network: N > 12 requires allow_large");
  int d1 = 2 * n_cells;
  if (d1 * d1 > detail::kMaxDenseDim)
    throw std::domain_error("build_network: dimension exceeds dense cap");
  Eigen::MatrixXcd hx = detail::chain_matrix(n_cells, table, boundary_x);
  Eigen::MatrixXcd hy = detail::chain_matrix(n_cells, table, boundary_y);
  int d = d1 * d1;
  LatticeOperator op;
  op.matrix = Eigen::MatrixXcd::Zero(d, d);
  // basis index = iy * d1 + ix (x fastest)
  for (int iy = 0; iy < d1; ++iy)
    op.matrix.block(iy * d1, iy * d1, d1, d1) = hx;
  for (int iy = 0; iy < d1; ++iy)
    for (int jy = 0; jy < d1; ++jy) {
      if (hy(iy, jy) == Complex(0.0)) continue;
      for (int ix = 0; ix < d1; ++ix) op.matrix(iy * d1 + ix, jy * d1 + ix) += hy(iy, jy);
    }
  op.boundary_x = boundary_x;
  op.boundary_y = boundary_y;
  op.cells_x = n_cells;
  op.cells_y = n_cells;
  op.labels.resize(d);
  for (int iy = 0; iy < d1; ++iy)
    for (int ix = 0; ix < d1; ++ix) {
      char sub;
      if (ix % 2 == 0)
        sub = (iy % 2 == 0) ? 'A' : 'C';
      else
        sub = (iy % 2 == 0) ? 'B' : 'D';
      op.labels[iy * d1 + ix] = {ix / 2, iy / 2, sub};
    }
  return op;
}

/// Strip: Nx cells open along x, Fourier-resolved along y. 4Nx states,
/// x hops from the table, the y direction enters as the on-site 2x2 Bloch
/// block [[0, f(ky)], [conj f, 0]] joining (A,B) to (C,D).
inline LatticeOperator build_strip(int nx_cells, double ky, const HoppingTable& table) {
  if (nx_cells < 2) throw std::domain_error("build_strip: need Nx >= 2 cells");
  bool wrapped = false;
  if (ky > std::numbers::pi || ky < -std::numbers::pi) {
    ky = std::remainder(ky, 2.0 * std::numbers::pi);
    wrapped = true;
  }
  int d1 = 2 * nx_cells;
  Eigen::MatrixXcd hx = detail::chain_matrix(nx_cells, table, Boundary::Open);
  Complex fy = BlochMap1D{table}.f(ky);
  LatticeOperator op;
  op.matrix = Eigen::MatrixXcd::Zero(2 * d1, 2 * d1);
  op.matrix.block(0, 0, d1, d1) = hx;
  op.matrix.block(d1, d1, d1, d1) = hx;
  for (int ix = 0; ix < d1; ++ix) {
    op.matrix(ix, d1 + ix) = fy;
    op.matrix(d1 + ix, ix) = std::conj(fy);
  }
  op.boundary_x = Boundary::Open;
  op.boundary_y = Boundary::Periodic;
  op.cells_x = nx_cells;
  op.ky = ky;
  op.ky_wrapped = wrapped;
  op.labels.resize(2 * d1);
  for (int sy = 0; sy < 2; ++sy)
    for (int ix = 0; ix < d1; ++ix) {
      char sub;
      if (sy == 0)
        sub = (ix % 2 == 0) ? 'A' : 'B';
      else
        sub = (ix % 2 == 0) ? 'C' : 'D';
      op.labels[sy * d1 + ix] = {ix / 2, sy, sub};
    }
  return op;
}

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors; // columns aligned with eigenvalues
  double residual = 0.0;         // max ||H v - lambda v||
};

inline SpectrumResult diagonalize(const LatticeOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix);
  SpectrumResult res;
  res.eigenvalues = es.eigenvalues();
  res.eigenvectors = es.eigenvectors();
  Eigen::MatrixXcd r = op.matrix * res.eigenvectors -
                       res.eigenvectors * res.eigenvalues.asDiagonal();
  res.residual = r.colwise().norm().maxCoeff();
  return res;
}

/// Simple ordered parallel map used by parameter sweeps.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t workers = std::min<std::size_t>(jobs, n);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct SweepRow {
  double a0;
  Eigen::VectorXd eigenvalues;
};

/// Quasienergy spectrum of the open chain as a function of the drive step
/// a0 (b0 follows as q*omega - a0), rows ordered by a0.
inline std::vector<SweepRow> sweep_spectrum(int n_cells, const GeometryConfig& geometry,
                                            const DriveConfig& drive_template,
                                            const std::vector<double>& a0_grid,
                                            const std::vector<int>& orders = {1, 3},
                                            Boundary boundary = Boundary::Open,
                                            int jobs = 1) {
  if (a0_grid.empty()) throw std::domain_error("sweep_spectrum: empty a0 grid");
  std::vector<double> grid = a0_grid;
  std::sort(grid.begin(), grid.end());
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    DriveConfig d = drive_template;
    d.a0 = grid[i];
    auto table = build_hopping_table(geometry, d, orders);
    auto op = build_chain(n_cells, table, boundary);
    rows[i] = {grid[i], diagonalize(op).eigenvalues};
  });
  return rows;
}

struct ZeroMode {
  double eigenvalue = 0.0;
  int eigenvector_index = -1;
  double edge_weight = 0.0;              // mass in the outer 10% of sites, both ends
  double sublattice_polarization = 0.0;  // |P_A - P_B| (A,D vs B,C in 2D)
  double corner_weight = 0.0;            // 2D open networks only
  Eigen::VectorXcd vector;
};

struct EdgeReport {
  std::vector<ZeroMode> zero_modes;
};

namespace detail {

inline ZeroMode annotate_mode(const LatticeOperator& op, const Eigen::VectorXcd& v,
                              double eigenvalue, int index) {
  ZeroMode m;
  m.eigenvalue = eigenvalue;
  m.eigenvector_index = index;
  m.vector = v;
  int d = op.dimension();

  double p_plus = 0.0, p_minus = 0.0;
  for (int i = 0; i < d; ++i) {
    double w = std::norm(v[i]);
    (chiral_sign(op.labels[i]) > 0 ? p_plus : p_minus) += w;
  }
  m.sublattice_polarization = std::abs(p_plus - p_minus);

  if (op.cells_y == 0) {
    // chain or strip: outermost 10% of x sites on each side
    int sites_x = 2 * op.cells_x;
    int edge = std::max(1, static_cast<int>(std::floor(0.1 * sites_x)));
    double w = 0.0;
    for (int i = 0; i < d; ++i) {
      int ix = op.ky.has_value() ? (i % sites_x) : i;
      if (ix < edge || ix >= sites_x - edge) w += std::norm(v[i]);
    }
    m.edge_weight = w;
  } else {
    int sites = 2 * op.cells_x;
    int edge = std::max(1, static_cast<int>(std::floor(0.1 * sites)));
    double w = 0.0, corner = 0.0;
    for (int iy = 0; iy < sites; ++iy)
      for (int ix = 0; ix < sites; ++ix) {
        double p = std::norm(v[iy * sites + ix]);
        bool ex = ix < edge || ix >= sites - edge;
        bool ey = iy < edge || iy >= sites - edge;
        if (ex || ey) w += p;
        if (ex && ey) corner += p;
      }
    m.edge_weight = w;
    m.corner_weight = corner;
  }
  return m;
}

}  // namespace detail

/// Modes with |E| < tol, annotated with edge weight and sublattice
/// polarization. Empty report allowed.
///
/// The near-kernel subspace of a finite chiral chain is (numerically)
/// degenerate, so the eigensolver's basis inside it is an arbitrary
/// unitary mixture. The span is rotated into the chiral eigenbasis before
/// annotating; each returned vector still satisfies ||H v|| < tol.
inline EdgeReport zero_modes(const LatticeOperator& op, const SpectrumResult& spec,
                             double tol) {
  if (tol <= 0.0) throw std::domain_error("zero_modes: tol must be > 0");
  std::vector<int> idx;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    if (std::abs(spec.eigenvalues[i]) < tol) idx.push_back(i);

  EdgeReport rep;
  if (idx.empty()) return rep;
  int d = op.dimension();
  int k = static_cast<int>(idx.size());

  Eigen::MatrixXcd span(d, k);
  for (int c = 0; c < k; ++c) span.col(c) = spec.eigenvectors.col(idx[c]);

  if (k > 1) {
    Eigen::VectorXd gamma(d);
    for (int i = 0; i < d; ++i) gamma[i] = chiral_sign(op.labels[i]);
    Eigen::MatrixXcd g = span.adjoint() * gamma.asDiagonal() * span;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (g + g.adjoint()));
    span = span * es.eigenvectors();
  }
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXcd v = span.col(c);
    double ev = (v.adjoint() * op.matrix * v)(0, 0).real();
    rep.zero_modes.push_back(detail::annotate_mode(op, v, ev, idx[c]));
  }
  return rep;
}

/// Analytic zero modes of a chiral operator: reorder into (positive,
/// negative) chiral blocks, take the off-diagonal block h and return
/// null(h) and null(h^dag) by singular-value thresholding at 1e-10 ||h||.
/// null(h) modes live on the negative block, null(h^dag) on the positive.
inline EdgeReport chiral_zero_mode_solver(const LatticeOperator& op) {
  double scale = op.matrix.cwiseAbs().maxCoeff();
  if (chiral_defect(op) > 1e-10 * std::max(1.0, scale))
    throw PreconditionError("chiral_zero_mode_solver: operator is not chiral-symmetric");

  int d = op.dimension();
  std::vector<int> plus, minus;
  for (int i = 0; i < d; ++i)
    (chiral_sign(op.labels[i]) > 0 ? plus : minus).push_back(i);

  Eigen::MatrixXcd h(plus.size(), minus.size());
  for (size_t a = 0; a < plus.size(); ++a)
    for (size_t b = 0; b < minus.size(); ++b) h(a, b) = op.matrix(plus[a], minus[b]);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double thresh = 1e-10 * (svd.singularValues().size() ? svd.singularValues()[0] : 0.0);

  EdgeReport rep;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > thresh) ++rank;

  // right singular vectors beyond the rank span null(h) -> minus block
  for (int i = rank; i < svd.matrixV().cols(); ++i) {
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(d);
    for (size_t b = 0; b < minus.size(); ++b) full[minus[b]] = svd.matrixV()(b, i);
    rep.zero_modes.push_back(detail::annotate_mode(op, full, 0.0, -1));
  }
  // left singular vectors beyond the rank span null(h^dag) -> plus block
  for (int i = rank; i < svd.matrixU().cols(); ++i) {
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(d);
    for (size_t a = 0; a < plus.size(); ++a) full[plus[a]] = svd.matrixU()(a, i);
    rep.zero_modes.push_back(detail::annotate_mode(op, full, 0.0, -1));
  }
  return rep;
}

struct StripRow {
  double ky;
  Eigen::VectorXd eigenvalues;
  std::vector<bool> edge_flags;  // weight > 0.5 in the outermost cell on either side
};

/// Bulk bands of the infinite strip at fixed ky: the four intervals
/// s1 |f(kx)| + s2 |f(ky)| with |f(kx)| swept over the zone.
struct BulkIntervals {
  std::array<std::pair<double, double>, 4> bands;

  bool in_gap(double e, double margin = 1e-9) const {
    for (const auto& [lo, hi] : bands)
      if (e >= lo - margin && e <= hi + margin) return false;
    return true;
  }
};

inline BulkIntervals strip_bulk_intervals(const HoppingTable& table, double ky,
                                          int kx_points = 1024) {
  BlochMap1D map{table};
  double fx_min = std::numeric_limits<double>::infinity(), fx_max = 0.0;
  for (double kx : bz_grid(kx_points)) {
    double a = std::abs(map.f(kx));
    fx_min = std::min(fx_min, a);
    fx_max = std::max(fx_max, a);
  }
  double fy = std::abs(map.f(ky));
  BulkIntervals b;
  b.bands[0] = {-fx_max - fy, -fx_min - fy};
  b.bands[1] = {-fx_max + fy, -fx_min + fy};
  b.bands[2] = {fx_min - fy, fx_max - fy};
  b.bands[3] = {fx_min + fy, fx_max + fy};
  for (auto& [lo, hi] : b.bands)
    if (lo > hi) std::swap(lo, hi);
  return b;
}

/// Projected band structure of the strip: per ky, sorted eigenvalues with
/// a per-state edge classification.
inline std::vector<StripRow> projected_bands(int nx_cells, const HoppingTable& table,
                                             const std::vector<double>& ky_grid,
                                             int jobs = 1) {
  std::vector<StripRow> rows(ky_grid.size());
  parallel_for(ky_grid.size(), jobs, [&](std::size_t i) {
    auto op = build_strip(nx_cells, ky_grid[i], table);
    auto spec = diagonalize(op);
    int d1 = 2 * nx_cells;
    StripRow row;
    row.ky = ky_grid[i];
    row.eigenvalues = spec.eigenvalues;
    row.edge_flags.resize(spec.eigenvalues.size());
    for (int s = 0; s < spec.eigenvalues.size(); ++s) {
      // weight in the outermost cell on either side (left and right ends
      // combined; hybridized edge pairs split their mass between the two)
      double w = 0.0;
      for (int sy = 0; sy < 2; ++sy)
        for (int ix : {0, 1, d1 - 2, d1 - 1}) w += std::norm(spec.eigenvectors(sy * d1 + ix, s));
      row.edge_flags[s] = w > 0.5;
    }
    rows[i] = std::move(row);
  });
  return rows;
}

}  // namespace floqlat
