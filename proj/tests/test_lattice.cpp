#include <catch2/catch.hpp>
#include <numbers>
#include <random>

#include "floqlat/lattice.hpp"

using namespace floqlat;
using std::numbers::pi;

namespace {

const GeometryConfig kGeo{1.0, 1.0, 1.0};

HoppingTable table_for(double a0, double omega = 10.0, int q = 1,
                       std::vector<int> orders = {1, 3}) {
  return build_hopping_table(kGeo, DriveConfig{a0, omega, q}, orders);
}

double spectral_asymmetry(const Eigen::VectorXd& e) {
  double worst = 0.0;
  int d = static_cast<int>(e.size());
  for (int i = 0; i < d; ++i) worst = std::max(worst, std::abs(e[i] + e[d - 1 - i]));
  return worst;
}

// independent assembly straight from the staircase: every matrix element is
// the averaged hop with dV = V_i - V_j, no forward/backward table involved
Eigen::MatrixXcd chain_from_staircase(int n_cells, double a0, double omega, int q,
                                      const std::vector<int>& orders) {
  DriveConfig drive{a0, omega, q};
  int d = 2 * n_cells;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) {
      if (i == j) continue;
      int s = std::abs(i - j);
      if (std::find(orders.begin(), orders.end(), s) == orders.end()) continue;
      double J = bare_coupling(kGeo, s);
      // destination row i, source column j
      h(i - 1, j - 1) = floquet_coupling(J, drive.potential(j) - drive.potential(i), omega);
    }
  return h;
}

}  // namespace

TEST_CASE("chain_matches_staircase_assembly") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> adist(-25.0, 25.0);
  for (int i = 0; i < 20; ++i) {
    double a0 = adist(rng);
    auto op = build_chain(4, table_for(a0));
    auto ref = chain_from_staircase(4, a0, 10.0, 1, {1, 3});
    // same Hamiltonian up to overall complex conjugation of the site basis;
    // the builder fixes the orientation that the momentum-space map uses
    double dev_conj = (op.matrix - ref.conjugate()).cwiseAbs().maxCoeff();
    double dev_direct = (op.matrix - ref).cwiseAbs().maxCoeff();
    CHECK(std::min(dev_conj, dev_direct) < 1e-14);
  }
}

TEST_CASE("chain_shape_and_symmetries") {
  auto op = build_chain(5, table_for(4.0));
  CHECK(op.dimension() == 10);
  CHECK(hermiticity_defect(op) < 1e-14);
  CHECK(chiral_defect(op) < 1e-12);
  CHECK(op.labels[0].sub == 'A');
  CHECK(op.labels[1].sub == 'B');
  CHECK(op.labels[9].sub == 'B');

  auto spec = diagonalize(op);
  CHECK(spectral_asymmetry(spec.eigenvalues) < 1e-10);
  CHECK(spec.residual < 1e-10);
  Eigen::MatrixXcd gram = spec.eigenvectors.adjoint() * spec.eigenvectors;
  CHECK((gram - Eigen::MatrixXcd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(build_chain(1, table_for(4.0)), std::domain_error);
}

TEST_CASE("chain_random_draws_stay_hermitian_and_chiral") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> adist(-20.0, 30.0);
  for (int i = 0; i < 50; ++i) {
    auto op = build_chain(5, table_for(adist(rng)));
    CHECK(hermiticity_defect(op) < 1e-14);
    CHECK(chiral_defect(op) < 1e-12);
    CHECK(spectral_asymmetry(diagonalize(op).eigenvalues) < 1e-10);
  }
}

TEST_CASE("chain_dimerized_limits") {
  // a0 = 0 with only the first order: disconnected strong dimers
  auto op = build_chain(2, build_hopping_table(kGeo, DriveConfig{0.0, 10.0, 1}, {1}));
  auto e = diagonalize(op).eigenvalues;
  double j = std::exp(-1.0);
  CHECK(e[0] == Approx(-j).epsilon(1e-12));
  CHECK(e[1] == Approx(-j).epsilon(1e-12));
  CHECK(e[2] == Approx(j).epsilon(1e-12));
  CHECK(e[3] == Approx(j).epsilon(1e-12));

  // empty table: free sites
  HoppingTable empty;
  empty.j0 = 1.0;
  auto zero = build_chain(3, empty);
  CHECK(zero.matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(diagonalize(zero).eigenvalues.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sweep_spectrum_rows_and_degenerate_points") {
  auto rows = sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, {-1.0, 0.5, 2.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].a0 == -1.0);
  CHECK(rows[2].a0 == 2.0);
  for (const auto& r : rows) CHECK(spectral_asymmetry(r.eigenvalues) < 1e-10);

  // a0 = omega keeps the intercell bond alive: dimer spectrum, two free ends
  auto dimer = sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, {10.0})[0];
  double j = std::exp(-1.0);
  int zero_count = 0, dimer_count = 0;
  for (int i = 0; i < dimer.eigenvalues.size(); ++i) {
    if (std::abs(dimer.eigenvalues[i]) < 1e-12) ++zero_count;
    if (std::abs(std::abs(dimer.eigenvalues[i]) - j) < 1e-12) ++dimer_count;
  }
  CHECK(zero_count == 2);
  CHECK(dimer_count == 8);

  // a0 = 3 omega kills every order-{1,3} hop
  auto dead = sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, {30.0})[0];
  CHECK(dead.eigenvalues.cwiseAbs().maxCoeff() < 1e-12);

  // near-zero edge quartet in the double-winding phase at small N
  auto w2 = sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, {21.0})[0];
  int below_1e2 = 0, below_1e3 = 0;
  for (int i = 0; i < w2.eigenvalues.size(); ++i) {
    if (std::abs(w2.eigenvalues[i]) < 1e-2) ++below_1e2;
    if (std::abs(w2.eigenvalues[i]) < 1e-3) ++below_1e3;
  }
  CHECK(below_1e2 == 4);
  CHECK(below_1e3 >= 2);

  CHECK_THROWS_AS(sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, {}), std::domain_error);
}

TEST_CASE("zero_modes_counts_weights_polarizations") {
  struct Case {
    double a0;
    size_t count;
  } cases[] = {{-11.0, 2}, {19.0, 2}, {21.0, 4}, {26.0, 2}};
  for (const auto& c : cases) {
    auto op = build_chain(50, table_for(c.a0));
    auto spec = diagonalize(op);
    auto rep = zero_modes(op, spec, 1e-6);
    INFO("a0 = " << c.a0);
    REQUIRE(rep.zero_modes.size() == c.count);
    for (const auto& m : rep.zero_modes) {
      CHECK(std::abs(m.eigenvalue) < 1e-6);
      CHECK(m.edge_weight > 0.95);
      CHECK(m.sublattice_polarization > 0.99);
      CHECK(m.edge_weight <= 1.0 + 1e-9);
      // mass concentrates in the outer 10 sites of a single end
      double left = 0.0, right = 0.0;
      for (int i = 0; i < 10; ++i) left += std::norm(m.vector[i]);
      for (int i = 90; i < 100; ++i) right += std::norm(m.vector[i]);
      CHECK(std::max(left, right) > 0.95);
    }
  }
  // trivial phase: no gapless modes
  auto op4 = build_chain(50, table_for(4.0));
  CHECK(zero_modes(op4, diagonalize(op4), 1e-6).zero_modes.empty());
}

TEST_CASE("chiral_solver_nullspace_counts") {
  for (double a0 : {-11.0, 19.0, 21.0}) {
    auto op = build_chain(50, table_for(a0));
    auto rep = chiral_zero_mode_solver(op);
    auto dense = zero_modes(op, diagonalize(op), 1e-6);
    INFO("a0 = " << a0);
    CHECK(rep.zero_modes.size() == dense.zero_modes.size());
    for (const auto& m : rep.zero_modes) {
      CHECK(m.sublattice_polarization > 1.0 - 1e-9);
      CHECK(m.edge_weight > 0.95);
    }
  }
  auto trivial = chiral_zero_mode_solver(build_chain(50, table_for(4.0)));
  CHECK(trivial.zero_modes.empty());

  // known mismatch: at a0 = 26 the finite-size splitting (~9e-10) exceeds the
  // 1e-10 * ||h|| singular-value threshold, so the nullspace is empty while
  // the dense solver at tol 1e-6 still reports the pair
  auto op26 = build_chain(50, table_for(26.0));
  CHECK(chiral_zero_mode_solver(op26).zero_modes.empty());
  CHECK(zero_modes(op26, diagonalize(op26), 1e-6).zero_modes.size() == 2);

  // non-chiral operator is refused
  auto op = build_chain(4, table_for(4.0));
  op.matrix(0, 0) = 1.0;
  CHECK_THROWS_AS(chiral_zero_mode_solver(op), PreconditionError);
}

TEST_CASE("zero_mode_exponential_protection") {
  auto min_abs = [](const Eigen::VectorXd& e) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < e.size(); ++i) m = std::min(m, std::abs(e[i]));
    return m;
  };
  double e25 = min_abs(diagonalize(build_chain(25, table_for(-11.0))).eigenvalues);
  double e50 = min_abs(diagonalize(build_chain(50, table_for(-11.0))).eigenvalues);
  CHECK(e50 * 10.0 < e25);
}

TEST_CASE("periodic_chain_equals_bloch_multiset") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> adist(-20.0, 30.0);
  int tested = 0;
  while (tested < 5) {
    double a0 = adist(rng);
    auto tab = table_for(a0);
    BlochMap1D map{tab};
    if (gap_minimum(map, 256) < 1e-3) continue;
    ++tested;
    for (int n : {6, 9}) {
      auto spec = diagonalize(build_chain(n, tab, Boundary::Periodic));
      std::vector<double> expect;
      for (int m = 0; m < n; ++m) {
        double k = 2.0 * pi * m / n;
        expect.push_back(-std::abs(map.f(k)));
        expect.push_back(std::abs(map.f(k)));
      }
      std::sort(expect.begin(), expect.end());
      for (int i = 0; i < spec.eigenvalues.size(); ++i)
        CHECK(std::abs(spec.eigenvalues[i] - expect[i]) < 1e-8);
    }
  }
}

TEST_CASE("network_kronecker_structure") {
  auto op = build_network(3, table_for(4.0));
  CHECK(op.dimension() == 36);
  CHECK(hermiticity_defect(op) < 1e-14);
  CHECK(chiral_defect(op) < 1e-12);
  CHECK(spectral_asymmetry(diagonalize(op).eigenvalues) < 1e-10);

  // sublattice lettering: B displaced along x, C along y
  CHECK(op.labels[0].sub == 'A');
  CHECK(op.labels[1].sub == 'B');
  CHECK(op.labels[6].sub == 'C');
  CHECK(op.labels[7].sub == 'D');

  CHECK_THROWS_AS(build_network(1, table_for(4.0)), std::domain_error);
  CHECK_THROWS_AS(build_network(13, table_for(4.0)), std::domain_error);
  CHECK_NOTHROW(build_network(13, table_for(4.0), Boundary::Open, Boundary::Open, true));
}

TEST_CASE("network_dimer_spectrum_against_brute_force") {
  auto t1 = build_hopping_table(kGeo, DriveConfig{0.0, 10.0, 1}, {1});
  auto op = build_network(2, t1);
  auto e = diagonalize(op).eigenvalues;
  double twoj = 2.0 * std::exp(-1.0);
  for (int i = 0; i < 4; ++i) CHECK(e[i] == Approx(-twoj).epsilon(1e-12));
  for (int i = 4; i < 12; ++i) CHECK(std::abs(e[i]) < 1e-12);
  for (int i = 12; i < 16; ++i) CHECK(e[i] == Approx(twoj).epsilon(1e-12));

  // brute-force element assembly over explicit 2D site coordinates
  DriveConfig drive{0.0, 10.0, 1};
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(16, 16);
  auto idx = [](int ix, int iy) { return iy * 4 + ix; };
  for (int iy = 0; iy < 4; ++iy)
    for (int ix = 0; ix < 4; ++ix)
      for (int jy = 0; jy < 4; ++jy)
        for (int jx = 0; jx < 4; ++jx) {
          if (ix == jx && iy == jy) continue;
          int dx = std::abs(ix - jx), dy = std::abs(iy - jy);
          if (dx == 1 && dy == 0)
            ref(idx(ix, iy), idx(jx, jy)) = floquet_coupling(
                bare_coupling(kGeo, 1),
                drive.potential(jx + 1) - drive.potential(ix + 1), 10.0);
          else if (dx == 0 && dy == 1)
            ref(idx(ix, iy), idx(jx, jy)) = floquet_coupling(
                bare_coupling(kGeo, 1),
                drive.potential(jy + 1) - drive.potential(iy + 1), 10.0);
        }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ref);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(es.eigenvalues()[i] - e[i]) < 1e-12);
}

TEST_CASE("periodic_network_matches_momentum_grid") {
  auto tab = table_for(4.0);
  auto per = diagonalize(build_network(3, tab, Boundary::Periodic, Boundary::Periodic));
  std::vector<double> expect;
  BlochMap1D map{tab};
  for (int mx = 0; mx < 3; ++mx)
    for (int my = 0; my < 3; ++my) {
      double ax = std::abs(map.f(2.0 * pi * mx / 3.0));
      double ay = std::abs(map.f(2.0 * pi * my / 3.0));
      for (double e : {-ax - ay, -ax + ay, ax - ay, ax + ay}) expect.push_back(e);
    }
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < per.eigenvalues.size(); ++i)
    CHECK(std::abs(per.eigenvalues[i] - expect[i]) < 1e-8);
}

TEST_CASE("network_and_strip_random_draws_stay_hermitian_and_chiral") {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> adist(-20.0, 30.0), kdist(-pi, pi);
  for (int i = 0; i < 10; ++i) {
    auto tab = table_for(adist(rng));
    auto net = build_network(3, tab);
    CHECK(hermiticity_defect(net) < 1e-14);
    CHECK(chiral_defect(net) < 1e-12);
    auto strip = build_strip(5, kdist(rng), tab);
    CHECK(hermiticity_defect(strip) < 1e-14);
    CHECK(chiral_defect(strip) < 1e-12);
    CHECK(spectral_asymmetry(diagonalize(strip).eigenvalues) < 1e-10);
  }
}

TEST_CASE("open_network_corner_weights_reported") {
  // the Kronecker sum pairs every +lambda of one axis with -lambda of the
  // other, so the open network carries a large exact zero-energy space;
  // corner weights are reported as diagnostics without a pinned value
  auto op = build_network(3, table_for(-11.0));
  auto rep = zero_modes(op, diagonalize(op), 1e-6);
  CHECK(rep.zero_modes.size() >= 4);
  for (const auto& m : rep.zero_modes) {
    CHECK(m.corner_weight >= 0.0);
    CHECK(m.corner_weight <= 1.0 + 1e-9);
    CHECK(m.edge_weight <= 1.0 + 1e-9);
  }
}

TEST_CASE("strip_structure_and_symmetries") {
  auto tab = table_for(-11.0);
  auto op = build_strip(11, 0.7, tab);
  CHECK(op.dimension() == 44);
  CHECK(hermiticity_defect(op) < 1e-14);
  CHECK(chiral_defect(op) < 1e-12);
  CHECK(spectral_asymmetry(diagonalize(op).eigenvalues) < 1e-10);
  CHECK_FALSE(op.ky_wrapped);

  auto wrapped = build_strip(11, 1.5 * pi, tab);
  CHECK(wrapped.ky_wrapped);
  CHECK(std::abs(*wrapped.ky - (1.5 * pi - 2.0 * pi)) < 1e-12);

  // strip spectrum is the x-chain spectrum shifted by +/- |f(ky)|
  auto chain = diagonalize(build_chain(11, tab));
  BlochMap1D map{tab};
  double fy = std::abs(map.f(0.7));
  std::vector<double> expect;
  for (int i = 0; i < chain.eigenvalues.size(); ++i) {
    expect.push_back(chain.eigenvalues[i] + fy);
    expect.push_back(chain.eigenvalues[i] - fy);
  }
  std::sort(expect.begin(), expect.end());
  auto strip = diagonalize(op);
  for (int i = 0; i < strip.eigenvalues.size(); ++i)
    CHECK(std::abs(strip.eigenvalues[i] - expect[i]) < 1e-10);

  CHECK_THROWS_AS(build_strip(1, 0.0, tab), std::domain_error);
}

TEST_CASE("projected_bands_edge_classification") {
  auto ky = bz_grid(64);

  auto trivial = projected_bands(11, table_for(4.0), ky);
  int flagged = 0;
  for (const auto& r : trivial)
    for (bool f : r.edge_flags) flagged += f;
  CHECK(flagged == 0);

  for (double a0 : {-11.0, 21.0}) {
    auto tab = table_for(a0);
    auto rows = projected_bands(11, tab, ky);
    int edge_in_gap = 0;
    for (const auto& r : rows) {
      auto bulk = strip_bulk_intervals(tab, r.ky);
      for (int i = 0; i < r.eigenvalues.size(); ++i)
        if (r.edge_flags[i] && bulk.in_gap(r.eigenvalues[i], 1e-6)) ++edge_in_gap;
    }
    INFO("a0 = " << a0);
    CHECK(edge_in_gap > 0);
  }
}

TEST_CASE("projected_bulk_converges_to_momentum_bands") {
  auto tab = table_for(-11.0);
  double ky = 0.7;
  auto bulk = strip_bulk_intervals(tab, ky);
  auto spec = diagonalize(build_strip(40, ky, tab));
  auto chain = diagonalize(build_chain(40, tab));
  // drop the four edge-branch states (x-chain zero modes paired with +/- fy)
  int edge_like = 0;
  for (int i = 0; i < chain.eigenvalues.size(); ++i)
    if (std::abs(chain.eigenvalues[i]) < 1e-6) ++edge_like;
  int expected_edge_states = 2 * edge_like;
  int outside = 0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i)
    if (bulk.in_gap(spec.eigenvalues[i], 1e-2)) ++outside;
  CHECK(outside <= expected_edge_states);
}

TEST_CASE("parallel_sweeps_are_deterministic") {
  std::vector<double> grid;
  for (double a0 = -5.0; a0 <= 5.0; a0 += 0.5) grid.push_back(a0);
  auto seq = sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, grid, {1, 3}, Boundary::Open, 1);
  auto par = sweep_spectrum(5, kGeo, DriveConfig{0.0, 10.0, 1}, grid, {1, 3}, Boundary::Open, 4);
  REQUIRE(seq.size() == par.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].a0 == par[i].a0);
    CHECK((seq[i].eigenvalues - par[i].eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  }

  auto rows1 = projected_bands(7, table_for(21.0), bz_grid(32), 1);
  auto rows4 = projected_bands(7, table_for(21.0), bz_grid(32), 4);
  for (size_t i = 0; i < rows1.size(); ++i) {
    CHECK((rows1[i].eigenvalues - rows4[i].eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rows1[i].edge_flags == rows4[i].edge_flags);
  }
}
