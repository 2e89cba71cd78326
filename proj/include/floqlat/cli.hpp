#pragma once

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "floqlat/bloch.hpp"
#include "floqlat/couplings.hpp"
#include "floqlat/dynamics.hpp"
#include "floqlat/errors.hpp"
#include "floqlat/io.hpp"
#include "floqlat/lattice.hpp"
#include "floqlat/physunits.hpp"
#include "floqlat/version.hpp"

namespace floqlat::cli {

namespace fs = std::filesystem;
using io::json;

/// Resolved run parameters: defaults <- config file <- command-line flags.
struct RunConfig {
  double a0 = 4.0;
  std::string a0_range;  // "lo:hi:step", overrides a0 for sweeps
  double omega = 10.0;
  int q = 1;
  int n = 5;
  int nx = 11;
  std::vector<int> orders = {1, 3};
  int kpoints = 1024;
  int grid = 64;
  double gamma = 0.0;
  double tmax = 2000.0;
  double spacing = 1.0;
  double decay_length = 1.0;
  double j0 = 1.0;
  double zero_tol = 1e-6;
  std::string out;
  std::vector<std::string> formats = {"csv", "json"};
  int jobs = 1;
  bool eigenvectors = false;
  std::string band = "lowest";

  GeometryConfig geometry() const { return {spacing, decay_length, j0}; }
  DriveConfig drive(double a) const { return {a, omega, q}; }
  HoppingTable table(double a) const {
    return build_hopping_table(geometry(), drive(a), orders);
  }
  bool wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
  }
};

namespace detail {

inline std::vector<double> parse_range(const std::string& spec) {
  double lo, hi, step;
  char c1, c2;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
    throw std::domain_error("bad range '" + spec + "', expected lo:hi:step");
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-12; v += step) grid.push_back(v);
  return grid;
}

inline std::vector<double> a0_values(const RunConfig& cfg) {
  if (!cfg.a0_range.empty()) return parse_range(cfg.a0_range);
  return {cfg.a0};
}

inline fs::path out_dir(const RunConfig& cfg) {
  fs::path dir;
  if (!cfg.out.empty())
    dir = cfg.out;
  else if (const char* env = std::getenv("FLOQLAT_OUT"))
    dir = env;
  else
    dir = "out";
  fs::create_directories(dir);
  return dir;
}

inline json manifest(const RunConfig& cfg, const std::string& subcommand) {
  json m;
  m["subcommand"] = subcommand;
  m["version"] = floqlat::version;
  m["a0"] = cfg.a0;
  m["a0_range"] = cfg.a0_range;
  m["omega"] = cfg.omega;
  m["q"] = cfg.q;
  m["n"] = cfg.n;
  m["nx"] = cfg.nx;
  m["orders"] = cfg.orders;
  m["kpoints"] = cfg.kpoints;
  m["grid"] = cfg.grid;
  m["gamma"] = cfg.gamma;
  m["tmax"] = cfg.tmax;
  m["spacing"] = cfg.spacing;
  m["decay_length"] = cfg.decay_length;
  m["j0"] = cfg.j0;
  m["zero_tol"] = cfg.zero_tol;
  m["formats"] = cfg.formats;
  m["jobs"] = cfg.jobs;
  return m;
}

inline void write_manifest(const RunConfig& cfg, const std::string& sub, const fs::path& dir) {
  io::write_json(dir / "manifest.json", manifest(cfg, sub));
}

}  // namespace detail

// --- subcommand bodies ----------------------------------------------------

inline int cmd_hoppings(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "hoppings", dir);
  auto table = cfg.table(cfg.a0);
  json j;
  j["a0"] = cfg.a0;
  j["b0"] = cfg.drive(cfg.a0).b0();
  j["high_frequency_ok"] = cfg.drive(cfg.a0).high_frequency(cfg.j0);
  for (int s : table.orders) {
    json row;
    row["order"] = s;
    row["forward_re"] = table.forward_at(s).real();
    row["forward_im"] = table.forward_at(s).imag();
    row["backward_re"] = table.backward_at(s).real();
    row["backward_im"] = table.backward_at(s).imag();
    j["table"].push_back(row);
  }
  for (const auto& [o, v] : table.even_residuals) {
    json row;
    row["order"] = o;
    row["magnitude"] = std::abs(v);
    j["even_residuals"].push_back(row);
  }
  io::write_json(dir / "hoppings.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_spectrum(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "spectrum", dir);
  auto grid = detail::a0_values(cfg);
  auto rows = sweep_spectrum(cfg.n, cfg.geometry(), cfg.drive(cfg.a0), grid, cfg.orders,
                             Boundary::Open, cfg.jobs);
  if (cfg.wants("csv")) {
    io::CsvWriter csv(dir / "spectrum.csv", {"a0[J0]", "energy[J0]"});
    for (const auto& r : rows)
      for (int i = 0; i < r.eigenvalues.size(); ++i) csv.row({r.a0, r.eigenvalues[i]});
  }
  if (cfg.wants("svg")) {
    double ymax = 0;
    for (const auto& r : rows) ymax = std::max(ymax, r.eigenvalues.cwiseAbs().maxCoeff());
    io::SvgPlot plot(grid.front(), grid.back(), -1.05 * ymax, 1.05 * ymax);
    std::vector<double> xs, ys;
    for (const auto& r : rows)
      for (int i = 0; i < r.eigenvalues.size(); ++i) {
        xs.push_back(r.a0);
        ys.push_back(r.eigenvalues[i]);
      }
    plot.dots(xs, ys, "steelblue", 1.0);
    plot.save(dir / "spectrum.svg");
  }
  std::cout << "spectrum: " << rows.size() << " a0 values, 2N=" << 2 * cfg.n << " levels -> "
            << (dir / "spectrum.csv").string() << "\n";
  return 0;
}

inline int cmd_dispersion(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "dispersion", dir);
  BlochMap1D map{cfg.table(cfg.a0)};
  auto rows = dispersion_1d(map, cfg.kpoints);
  if (cfg.wants("csv")) {
    io::CsvWriter csv(dir / "dispersion.csv", {"k[1/a]", "e_minus[J0]", "e_plus[J0]"});
    for (const auto& r : rows) csv.row({r.k, r.e_minus, r.e_plus});
  }
  if (cfg.wants("svg")) {
    double ymax = 0;
    for (const auto& r : rows) ymax = std::max(ymax, r.e_plus);
    io::SvgPlot plot(-std::numbers::pi, std::numbers::pi, -1.05 * ymax, 1.05 * ymax);
    std::vector<double> k, lo, hi;
    for (const auto& r : rows) {
      k.push_back(r.k);
      lo.push_back(r.e_minus);
      hi.push_back(r.e_plus);
    }
    plot.polyline(k, lo, "steelblue");
    plot.polyline(k, hi, "firebrick");
    plot.save(dir / "dispersion.svg");
  }
  std::cout << "dispersion: gap_min=" << io::fmt(gap_minimum(map, cfg.kpoints)) << "\n";
  return 0;
}

inline int cmd_dpath(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "dpath", dir);
  auto path = d_path(BlochMap1D{cfg.table(cfg.a0)}, cfg.kpoints);
  if (cfg.wants("csv")) {
    io::CsvWriter csv(dir / "dpath.csv", {"k[1/a]", "dx[J0]", "dy[J0]"});
    for (size_t i = 0; i < path.k.size(); ++i) csv.row({path.k[i], path.dx[i], path.dy[i]});
  }
  if (cfg.wants("svg")) {
    double m = 0;
    for (size_t i = 0; i < path.k.size(); ++i)
      m = std::max({m, std::abs(path.dx[i]), std::abs(path.dy[i])});
    io::SvgPlot plot(-1.1 * m, 1.1 * m, -1.1 * m, 1.1 * m, 600, 600);
    plot.polyline(path.dx, path.dy, "steelblue");
    plot.dots({0.0}, {0.0}, "firebrick", 3.0);
    plot.save(dir / "dpath.svg");
  }
  std::cout << "dpath: " << path.k.size() << " points\n";
  return 0;
}

inline int cmd_winding(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "winding", dir);
  BlochMap1D map{cfg.table(cfg.a0)};
  int w = winding_number(d_path(map, cfg.kpoints));
  json j;
  j["winding"] = w;
  j["a0"] = cfg.a0;
  j["kpoints"] = cfg.kpoints;
  j["gap_min"] = gap_minimum(map, cfg.kpoints);
  j["convention"] = "counterclockwise positive, d = (Re f, -Im f)";
  io::write_json(dir / "winding.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_zak(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "zak", dir);
  BlochMap1D map{cfg.table(cfg.a0)};
  auto z = zak_phase(map, cfg.kpoints);
  json j;
  j["zak_principal"] = z.principal;
  j["zak_winding_resolved"] = z.winding_resolved;
  j["winding"] = z.winding;
  j["a0"] = cfg.a0;
  j["kpoints"] = cfg.kpoints;
  j["gap_min"] = gap_minimum(map, cfg.kpoints);
  j["convention"] = "Wilson loop of the lower band, value in (-pi, pi]";
  io::write_json(dir / "zak.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_chern(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "chern", dir);
  auto table = cfg.table(cfg.a0);
  BandSelect sel;
  if (cfg.band == "lowest")
    sel = BandSelect::Lowest;
  else if (cfg.band == "middle")
    sel = BandSelect::MiddlePair;
  else if (cfg.band == "highest")
    sel = BandSelect::Highest;
  else if (cfg.band == "total")
    sel = BandSelect::Total;
  else
    throw std::domain_error("chern: --band must be lowest|middle|highest|total");
  int c = chern_fhs(table, sel, cfg.grid);
  auto rep = paper_chern_report(cfg.geometry(), cfg.drive(cfg.a0), cfg.orders, cfg.kpoints);
  json j;
  j["band"] = cfg.band;
  j["chern_lattice_gauge"] = c;
  j["grid"] = cfg.grid;
  j["a0"] = cfg.a0;
  j["half_winding"] = rep.half_winding;
  j["zak_vector"] = {rep.zak_x, rep.zak_y};
  j["winding"] = rep.winding;
  j["planar_diagnostic"] = planar_chern_diagnostic(table, cfg.grid);
  j["convention"] = rep.convention;
  io::write_json(dir / "chern.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_bands2d(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "bands2d", dir);
  auto table = cfg.table(cfg.a0);
  auto b = bands_2d(table, cfg.grid);
  if (cfg.wants("csv")) {
    io::CsvWriter csv(dir / "bands2d.csv",
                      {"kx[1/a]", "ky[1/a]", "e1[J0]", "e2[J0]", "e3[J0]", "e4[J0]"});
    for (size_t i = 0; i < b.kx.size(); ++i)
      for (size_t j = 0; j < b.ky.size(); ++j) {
        std::array<double, 4> e;
        for (int s = 0; s < 4; ++s) e[s] = b.sheets[s][i * b.ky.size() + j];
        std::sort(e.begin(), e.end());
        csv.row({b.kx[i], b.ky[j], e[0], e[1], e[2], e[3]});
      }
  }
  std::cout << "bands2d: " << cfg.grid << "x" << cfg.grid << " grid\n";
  return 0;
}

inline int cmd_strip(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "strip", dir);
  auto table = cfg.table(cfg.a0);
  auto rows = projected_bands(cfg.nx, table, bz_grid(cfg.kpoints), cfg.jobs);
  if (cfg.wants("csv")) {
    io::CsvWriter csv(dir / "strip.csv", {"ky[1/a]", "energy[J0]", "edge_flag"});
    for (const auto& r : rows)
      for (int i = 0; i < r.eigenvalues.size(); ++i)
        csv.row({r.ky, r.eigenvalues[i], r.edge_flags[i] ? 1.0 : 0.0});
  }
  if (cfg.wants("svg")) {
    double ymax = 0;
    for (const auto& r : rows) ymax = std::max(ymax, r.eigenvalues.cwiseAbs().maxCoeff());
    io::SvgPlot plot(-std::numbers::pi, std::numbers::pi, -1.05 * ymax, 1.05 * ymax);
    std::vector<double> bx, by, ex, ey;
    for (const auto& r : rows)
      for (int i = 0; i < r.eigenvalues.size(); ++i) {
        (r.edge_flags[i] ? ex : bx).push_back(r.ky);
        (r.edge_flags[i] ? ey : by).push_back(r.eigenvalues[i]);
      }
    plot.dots(bx, by, "steelblue", 1.0);
    plot.dots(ex, ey, "firebrick", 1.5);
    plot.save(dir / "strip.svg");
  }
  int edge_count = 0;
  for (const auto& r : rows)
    for (bool f : r.edge_flags) edge_count += f;
  std::cout << "strip: Nx=" << cfg.nx << ", " << rows.size() << " ky points, edge-flagged "
            << edge_count << "\n";
  return 0;
}

inline int cmd_edges(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "edges", dir);
  auto table = cfg.table(cfg.a0);
  auto op = build_chain(cfg.n, table);
  auto spec = diagonalize(op);
  auto rep = zero_modes(op, spec, cfg.zero_tol * cfg.j0);
  auto chiral = chiral_zero_mode_solver(op);
  if (cfg.wants("csv")) {
    io::CsvWriter csv(dir / "edges.csv",
                      {"a0[J0]", "energy[J0]", "edge_weight", "sublattice_polarization"});
    for (const auto& m : rep.zero_modes)
      csv.row({cfg.a0, m.eigenvalue, m.edge_weight, m.sublattice_polarization});
  }
  json j;
  j["a0"] = cfg.a0;
  j["n"] = cfg.n;
  j["tol"] = cfg.zero_tol * cfg.j0;
  j["zero_mode_count"] = rep.zero_modes.size();
  j["chiral_solver_count"] = chiral.zero_modes.size();
  for (const auto& m : rep.zero_modes) {
    json row;
    row["eigenvalue"] = m.eigenvalue;
    row["edge_weight"] = m.edge_weight;
    row["sublattice_polarization"] = m.sublattice_polarization;
    j["zero_modes"].push_back(row);
  }
  if (cfg.eigenvectors) {
    for (const auto& m : rep.zero_modes) {
      if (m.eigenvector_index < 0) continue;
      json vec;
      for (int i = 0; i < spec.eigenvectors.rows(); ++i)
        vec.push_back({spec.eigenvectors(i, m.eigenvector_index).real(),
                       spec.eigenvectors(i, m.eigenvector_index).imag()});
      j["eigenvectors"].push_back(vec);
    }
  }
  io::write_json(dir / "edges.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_transfer(const RunConfig& cfg) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "transfer", dir);
  auto chain = build_chain(cfg.n, cfg.table(cfg.a0));
  LindbladConfig lc;
  lc.gamma_s = cfg.gamma;
  lc.t_max = cfg.tmax;
  auto tr = evolve_lindblad(chain, lc);
  auto m = transfer_metrics(tr);
  if (cfg.wants("csv")) {
    std::vector<std::string> header = {"t[1/J0]"};
    for (int i = 0; i < tr.populations.cols(); ++i)
      header.push_back("p_site" + std::to_string(i + 1));
    header.push_back("trace");
    header.push_back("fidelity");
    io::CsvWriter csv(dir / "transfer.csv", header);
    for (size_t s = 0; s < tr.times.size(); ++s) {
      std::vector<double> row = {tr.times[s]};
      for (int i = 0; i < tr.populations.cols(); ++i) row.push_back(tr.populations(s, i));
      row.push_back(tr.trace[s]);
      row.push_back(tr.fidelity[s]);
      csv.row(row);
    }
  }
  if (cfg.wants("svg")) {
    io::SvgPlot plot(0, cfg.tmax, 0, 1.05);
    std::vector<double> t = tr.times, pl, pr;
    for (size_t s = 0; s < tr.times.size(); ++s) {
      pl.push_back(tr.populations(s, 0));
      pr.push_back(tr.fidelity[s]);
    }
    plot.polyline(t, pl, "steelblue");
    plot.polyline(t, pr, "firebrick");
    plot.save(dir / "transfer.svg");
  }
  json j;
  j["a0"] = cfg.a0;
  j["n"] = cfg.n;
  j["gamma_s"] = cfg.gamma;
  j["t_max"] = cfg.tmax;
  j["transfer_detected"] = m.transfer_detected;
  j["period"] = m.period;
  j["peak_fidelity"] = m.peak_fidelity;
  j["peak_time"] = m.peak_time;
  j["max_trace_drift"] = tr.max_trace_drift;
  j["min_density_eigenvalue"] = tr.min_density_eigenvalue;
  io::write_json(dir / "transfer_summary.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_params(const RunConfig& cfg, const PhysicalParams& p) {
  auto dir = detail::out_dir(cfg);
  detail::write_manifest(cfg, "params", dir);
  auto rep = bare_rate(p);
  double twopi = 2.0 * std::numbers::pi;
  json j;
  j["g_k"] = {{"rad_per_s", rep.g_k}, {"over_2pi_hz", rep.g_k / twopi}};
  j["g_c"] = {{"rad_per_s", rep.g_c}, {"over_2pi_hz", rep.g_c / twopi}};
  j["j0"] = {{"rad_per_s", rep.j0}, {"over_2pi_hz", rep.j0 / twopi}};
  j["gamma_m"] = {{"rad_per_s", rep.gamma_m}, {"over_2pi_hz", rep.gamma_m / twopi}};
  j["gamma_s"] = {{"rad_per_s", rep.gamma_s}, {"over_2pi_hz", rep.gamma_s / twopi}};
  j["transfer_time_s"] = rep.transfer_time;
  j["coherence_t2_s"] = rep.coherence_t2;
  j["coupling_dominates_decoherence"] = rep.coupling_dominates;
  j["transfer_fits_coherence"] = rep.fits_coherence;
  io::write_json(dir / "params_report.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

inline int cmd_reproduce(const RunConfig& base, const std::string& figure) {
  RunConfig cfg = base;
  auto dir = detail::out_dir(cfg);
  json man = detail::manifest(cfg, "reproduce " + figure);

  if (figure == "fig3") {
    std::vector<double> grid;
    for (double a0 = -20.0; a0 <= 30.0 + 1e-9; a0 += 0.1) grid.push_back(a0);
    auto rows = sweep_spectrum(5, cfg.geometry(), cfg.drive(0), grid, {1, 3}, Boundary::Open,
                               cfg.jobs);
    io::CsvWriter csv(dir / "fig3_spectrum.csv", {"a0[J0]", "energy[J0]"});
    for (const auto& r : rows)
      for (int i = 0; i < r.eigenvalues.size(); ++i) csv.row({r.a0, r.eigenvalues[i]});
  } else if (figure == "fig4") {
    json winds;
    for (double a0 : {-16.0, -11.0, 4.0, 19.0, 21.0, 26.0}) {
      BlochMap1D map{cfg.table(a0)};
      std::string tag = io::fmt(a0);
      io::CsvWriter disp(dir / ("fig4_a0_" + tag + "_dispersion.csv"),
                         {"k[1/a]", "e_minus[J0]", "e_plus[J0]"});
      for (const auto& r : dispersion_1d(map, 512)) disp.row({r.k, r.e_minus, r.e_plus});
      auto path = d_path(map, 512);
      io::CsvWriter dp(dir / ("fig4_a0_" + tag + "_dpath.csv"), {"k[1/a]", "dx[J0]", "dy[J0]"});
      for (size_t i = 0; i < path.k.size(); ++i) dp.row({path.k[i], path.dx[i], path.dy[i]});
      winds[tag] = winding_number(path);
    }
    io::write_json(dir / "fig4_winding.json", winds);
  } else if (figure == "fig5") {
    json counts;
    for (double a0 : {-11.0, 19.0, 21.0, 26.0}) {
      auto op = build_chain(50, cfg.table(a0));
      auto spec = diagonalize(op);
      std::string tag = io::fmt(a0);
      io::CsvWriter csv(dir / ("fig5_a0_" + tag + "_eigenvalues.csv"), {"index", "energy[J0]"});
      for (int i = 0; i < spec.eigenvalues.size(); ++i)
        csv.row({static_cast<double>(i), spec.eigenvalues[i]});
      auto rep = zero_modes(op, spec, 1e-6);
      counts[tag] = rep.zero_modes.size();
    }
    io::write_json(dir / "fig5_zero_mode_counts.json", counts);
  } else if (figure == "fig7") {
    auto table = cfg.table(4.0);
    auto b = bands_2d(table, 64);
    io::CsvWriter csv(dir / "fig7a_bands2d.csv",
                      {"kx[1/a]", "ky[1/a]", "e1[J0]", "e2[J0]", "e3[J0]", "e4[J0]"});
    for (size_t i = 0; i < b.kx.size(); ++i)
      for (size_t j = 0; j < b.ky.size(); ++j) {
        std::array<double, 4> e;
        for (int s = 0; s < 4; ++s) e[s] = b.sheets[s][i * b.ky.size() + j];
        std::sort(e.begin(), e.end());
        csv.row({b.kx[i], b.ky[j], e[0], e[1], e[2], e[3]});
      }
    const char* panel[] = {"fig7b", "fig7c", "fig7d"};
    double a0s[] = {4.0, -11.0, 21.0};
    for (int p = 0; p < 3; ++p) {
      auto rows = projected_bands(11, cfg.table(a0s[p]), bz_grid(256), cfg.jobs);
      io::CsvWriter sc(dir / (std::string(panel[p]) + "_strip.csv"),
                       {"ky[1/a]", "energy[J0]", "edge_flag"});
      for (const auto& r : rows)
        for (int i = 0; i < r.eigenvalues.size(); ++i)
          sc.row({r.ky, r.eigenvalues[i], r.edge_flags[i] ? 1.0 : 0.0});
    }
  } else if (figure == "fig9") {
    json summary;
    struct Panel {
      const char* name;
      double a0;
      double gamma;
    } panels[] = {{"fig9a", 12.0, 0.0},
                  {"fig9a_dephased", 12.0, 1e-4},
                  {"fig9b", 24.0, 0.0},
                  {"fig9c", -2.0, 0.0}};
    for (const auto& p : panels) {
      auto chain = build_chain(3, cfg.table(p.a0));
      LindbladConfig lc;
      lc.gamma_s = p.gamma;
      lc.t_max = 2000.0;
      auto tr = evolve_lindblad(chain, lc);
      auto m = transfer_metrics(tr);
      io::CsvWriter csv(dir / (std::string(p.name) + "_transfer.csv"),
                        {"t[1/J0]", "p_left", "p_right", "trace"});
      for (size_t s = 0; s < tr.times.size(); ++s)
        csv.row({tr.times[s], tr.populations(s, 0),
                 tr.populations(s, tr.populations.cols() - 1), tr.trace[s]});
      summary[p.name] = {{"a0", p.a0},
                         {"gamma_s", p.gamma},
                         {"period", m.period},
                         {"peak_fidelity", m.peak_fidelity},
                         {"transfer_detected", m.transfer_detected}};
    }
    io::write_json(dir / "fig9_summary.json", summary);
  } else {
    throw std::domain_error("reproduce: unknown figure '" + figure + "'");
  }
  io::write_json(dir / "manifest.json", man);
  std::cout << "reproduce " << figure << " -> " << dir.string() << "\n";
  return 0;
}

// --- argument parsing -----------------------------------------------------

inline void apply_config_file(RunConfig& cfg, PhysicalParams& phys, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot read config file " + path.string());
  json j;
  in >> j;
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j[key].get<std::decay_t<decltype(slot)>>();
  };
  get("a0", cfg.a0);
  get("a0_range", cfg.a0_range);
  get("omega", cfg.omega);
  get("q", cfg.q);
  get("n", cfg.n);
  get("nx", cfg.nx);
  get("orders", cfg.orders);
  get("kpoints", cfg.kpoints);
  get("grid", cfg.grid);
  get("gamma", cfg.gamma);
  get("tmax", cfg.tmax);
  get("spacing", cfg.spacing);
  get("decay_length", cfg.decay_length);
  get("j0", cfg.j0);
  get("zero_tol", cfg.zero_tol);
  get("out", cfg.out);
  get("formats", cfg.formats);
  get("jobs", cfg.jobs);
  get("band", cfg.band);
  get("strain_sensitivity", phys.strain_sensitivity);
  get("sound_speed", phys.sound_speed);
  get("mass_density", phys.mass_density);
  get("lattice_const", phys.lattice_const);
  get("cross_section", phys.cross_section);
  get("band_edge", phys.band_edge);
  get("strain_profile", phys.strain_profile);
  get("raman_factor", phys.raman_factor);
  get("decay_length_ratio", phys.decay_length_ratio);
  get("detuning", phys.detuning);
  get("spin_dephasing", phys.spin_dephasing);
  get("mech_q", phys.mech_q);
  get("coherence_t2", phys.coherence_t2);
}

inline int run(int argc, const char* const* argv) {
  RunConfig cfg;
  PhysicalParams phys;

  CLI::App app{"floqlat: driven spin-lattice band topology and transfer toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("--config", config_file, "flat key-value JSON config file");

  // first pass: pick up --config so file values become defaults flags override
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") apply_config_file(cfg, phys, argv[i + 1]);

  std::string orders_str, formats_str;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--a0", cfg.a0, "drive step a0 (units of J0)");
    sub->add_option("--a0-range", cfg.a0_range, "sweep lo:hi:step");
    sub->add_option("--omega", cfg.omega, "drive frequency (units of J0)");
    sub->add_option("--q", cfg.q, "(a0+b0)/omega, positive integer");
    sub->add_option("--n", cfg.n, "unit cells N (2N spins)");
    sub->add_option("--nx", cfg.nx, "strip cells Nx");
    sub->add_option("--orders", orders_str, "odd neighbor orders, e.g. 1,3");
    sub->add_option("--kpoints", cfg.kpoints, "momentum grid size");
    sub->add_option("--grid", cfg.grid, "2D BZ grid (per axis)");
    sub->add_option("--gamma", cfg.gamma, "dephasing rate gamma_s (units of J0)");
    sub->add_option("--tmax", cfg.tmax, "evolution time (units of 1/J0)");
    sub->add_option("--spacing", cfg.spacing, "spin spacing (units of a)");
    sub->add_option("--decay-length", cfg.decay_length, "L_c (units of a)");
    sub->add_option("--zero-tol", cfg.zero_tol, "zero-mode tolerance (units of J0)");
    sub->add_option("--out", cfg.out, "output directory (or FLOQLAT_OUT)");
    sub->add_option("--format", formats_str, "outputs: csv,json,svg");
    sub->add_option("--jobs", cfg.jobs, "parallel workers for sweeps");
    sub->add_option("--band", cfg.band, "chern band: lowest|middle|highest|total");
    sub->add_flag("--eigenvectors", cfg.eigenvectors, "emit zero-mode eigenvectors");
    sub->add_option("--config", config_file, "flat key-value JSON config file");
  };

  auto* hoppings = app.add_subcommand("hoppings", "Floquet-averaged hopping table");
  auto* spectrum = app.add_subcommand("spectrum", "open-chain spectrum vs a0");
  auto* dispersion = app.add_subcommand("dispersion", "1D band structure +/-|f(k)|");
  auto* dpath = app.add_subcommand("dpath", "(dx, dy) loop across the zone");
  auto* winding = app.add_subcommand("winding", "winding number of the d loop");
  auto* zak = app.add_subcommand("zak", "Wilson-loop Zak phase");
  auto* chern = app.add_subcommand("chern", "lattice-gauge Chern numbers (4x4 Bloch)");
  auto* bands2d = app.add_subcommand("bands2d", "2D band sheets over the BZ");
  auto* strip = app.add_subcommand("strip", "projected strip bands with edge flags");
  auto* edges = app.add_subcommand("edges", "zero modes of the open chain");
  auto* transfer = app.add_subcommand("transfer", "Lindblad excitation transfer");
  auto* params = app.add_subcommand("params", "device feasibility report");
  auto* reproduce = app.add_subcommand("reproduce", "emit per-panel reference data sets");
  std::string figure;
  reproduce->add_option("figure", figure, "fig3|fig4|fig5|fig7|fig9")
      ->required()
      ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig7", "fig9"}));

  for (auto* sub : {hoppings, spectrum, dispersion, dpath, winding, zak, chern, bands2d, strip,
                    edges, transfer, params, reproduce})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the error and usage hint
    return 1;
  }

  try {
    if (!orders_str.empty()) {
      cfg.orders.clear();
      std::istringstream in(orders_str);
      std::string tok;
      while (std::getline(in, tok, ',')) cfg.orders.push_back(std::stoi(tok));
    }
    if (!formats_str.empty()) {
      cfg.formats.clear();
      std::istringstream in(formats_str);
      std::string tok;
      while (std::getline(in, tok, ',')) cfg.formats.push_back(tok);
    }

    if (hoppings->parsed()) return cmd_hoppings(cfg);
    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (dispersion->parsed()) return cmd_dispersion(cfg);
    if (dpath->parsed()) return cmd_dpath(cfg);
    if (winding->parsed()) return cmd_winding(cfg);
    if (zak->parsed()) return cmd_zak(cfg);
    if (chern->parsed()) return cmd_chern(cfg);
    if (bands2d->parsed()) return cmd_bands2d(cfg);
    if (strip->parsed()) return cmd_strip(cfg);
    if (edges->parsed()) return cmd_edges(cfg);
    if (transfer->parsed()) return cmd_transfer(cfg);
    if (params->parsed()) return cmd_params(cfg, phys);
    if (reproduce->parsed()) return cmd_reproduce(cfg, figure);
  } catch (const IllDefinedInvariant& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NotIsolatedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace floqlat::cli
