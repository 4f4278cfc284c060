#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "affdim/capacity.hpp"
#include "affdim/errors.hpp"
#include "affdim/measures.hpp"
#include "affdim/orthogonal.hpp"
#include "affdim/parallel.hpp"
#include "affdim/pressure.hpp"
#include "affdim/projection.hpp"
#include "config.hpp"

#ifndef AFFDIM_VERSION
#define AFFDIM_VERSION "unknown"
#endif

namespace affdim::cli {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string csv() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }
};

struct Artifacts {
  Table main;
  Table plot{{"x", "y", "series"}, {}};
  std::vector<std::pair<std::string, std::string>> summary;
  std::map<std::string, double> numeric;
  std::vector<std::pair<std::string, std::string>> extra_files;
  std::vector<std::string> failures;  // acceptance checks that did not hold
  bool partial = false;

  void put(const std::string& key, double v) {
    summary.emplace_back(key, fmt(v));
    numeric[key] = v;
  }
  void put(const std::string& key, std::size_t v) { put(key, static_cast<double>(v)); }
  void put(const std::string& key, int v) { put(key, static_cast<double>(v)); }
  void put(const std::string& key, bool v) { put(key, v ? 1.0 : 0.0); }
  void put(const std::string& key, const std::string& v) { summary.emplace_back(key, v); }
  void put(const std::string& key, const char* v) { put(key, std::string(v)); }
  void point(double x, double y, const std::string& series) { plot.add({fmt(x), fmt(y), series}); }
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct Context {
  Section root;
  std::uint64_t seed = 1;
  std::optional<double> tol;
};

// Library errors raised while turning config values into objects are
// configuration errors: the field is named and the exit status is 2.
template <class F>
auto config_step(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const BudgetExceeded&) {
    throw;
  } catch (const Error& e) {
    throw ConfigInvalid(field + ": " + e.what());
  }
}

double tol_of(const Context& c, const Section& s, double fallback, double lo, double hi) {
  if (c.tol) {
    if (!(*c.tol >= lo && *c.tol <= hi)) {
      throw ConfigInvalid("--tol: must lie in [" + fmt(lo) + ", " + fmt(hi) + "]");
    }
    return *c.tol;
  }
  return s.in_range("tol", lo, hi, fallback);
}

struct Model {
  std::optional<AffineIFS> ifs;
  std::optional<SftSpec> set;
  std::optional<TreeMeasure> mu;
  bool explicit_translations = false;

  const SftSpec* set_ptr() const { return set ? &*set : nullptr; }
};

Model load_model(const Section& root) {
  Model md;
  const Section set = root.sub("set");
  if (set.text("kind", std::string("full")) == "example1") {
    const int d = static_cast<int>(set.count("d", 2, kMaxDim, 2));
    const int k = static_cast<int>(set.count("k", 1, d - 1, 1));
    if (std::pow(9.0, k) > 65535.0) set.fail("k", "alphabet 9^k exceeds 65535 symbols");
    md.mu = TreeMeasure::example_one(d, k);
    md.ifs = md.mu->example_one()->ifs();
    return md;
  }
  std::vector<Matrix> maps = parse_maps(root);
  const int m = static_cast<int>(maps.size());
  const int d = maps.front().dim();
  Translations a = parse_translations(root, d, m);
  md.explicit_translations = root.sub("ifs").has("translations");
  md.ifs = config_step("ifs.matrices", [&] { return AffineIFS(maps, a); });
  md.set = parse_set(root, m);
  md.mu = parse_measure(root, m, md.set_ptr());
  return md;
}

// Explicit ifs.translations gives one sample; otherwise `count` draws from
// the ball of radius ifs.rho.
std::vector<Translations> load_translations(const Context& c, const Model& md, std::size_t count) {
  if (md.explicit_translations) return {md.ifs->translations()};
  const double rho = c.root.sub("ifs").in_range("rho", 0.0, 1e6, 1.0);
  Stream stream = Stream(c.seed).child(1);
  std::vector<Translations> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sample_translation(rho, md.ifs->dim(), md.ifs->size(), stream));
  }
  return out;
}

std::size_t depth_for(const AffineIFS& ifs, const Translations& a, double finest) {
  const double big_r = ifs.radius_bound(a);
  const double target = finest / 10.0;
  if (big_r <= 0.0 || big_r < target) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(target / big_r) / std::log(ifs.alpha_plus()))) + 1;
}

void add_ifs_summary(Artifacts& out, const AffineIFS& ifs) {
  out.put("dim", ifs.dim());
  out.put("maps", ifs.size());
  out.put("alpha_plus", ifs.alpha_plus());
  out.put("alpha_minus", ifs.alpha_minus());
  out.put("transversal", ifs.transversal());
  out.put("warnings", ifs.validation().warnings.size());
}

// --- commands -------------------------------------------------------------

Artifacts cmd_affinity(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("affinity");
  const int levels = static_cast<int>(s.count("levels", 0, 64, 0));
  const double tol = tol_of(c, s, 1e-9, 1e-15, 1e-2);
  PressureBudget budget;
  budget.max_terms = static_cast<std::uint64_t>(s.count("max_terms", 1, std::int64_t{1} << 32, budget.max_terms));
  budget.max_levels_generic = static_cast<int>(s.count("max_levels_generic", 1, 64, budget.max_levels_generic));
  budget.max_levels_diagonal = static_cast<int>(s.count("max_levels_diagonal", 1, 4096, budget.max_levels_diagonal));

  const AffinityResult r = affinity_dim(*md.ifs, md.set_ptr(), levels, tol, budget);
  Artifacts out;
  out.main.header = {"quantity", "level", "value"};
  double running = std::numeric_limits<double>::infinity();
  for (const auto& lv : r.levels) {
    out.main.add({"root", fmt(lv.n), fmt(lv.root)});
    running = std::min(running, lv.root);
    out.point(lv.n, lv.root, "level_root");
    out.point(lv.n, running, "running_min");
  }
  out.main.add({"estimate", fmt(r.deepest_level), fmt(r.estimate)});
  out.main.add({"lo", fmt(r.deepest_level), fmt(r.lo)});
  out.main.add({"hi", fmt(r.deepest_level), fmt(r.hi)});
  out.main.add({"rigorous_lo", "1", fmt(r.rigorous_lo)});
  out.put("estimate", r.estimate);
  out.put("lo", r.lo);
  out.put("hi", r.hi);
  out.put("rigorous_lo", r.rigorous_lo);
  out.put("width", r.width());
  out.put("midpoint", r.midpoint());
  out.put("deepest_level", r.deepest_level);
  out.put("diagonal_fast_path", r.diagonal_fast_path);
  add_ifs_summary(out, *md.ifs);
  return out;
}

Artifacts cmd_sdim(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("sdim");
  const auto paths = static_cast<std::size_t>(s.count("paths", 1, 1'000'000, 20));
  const auto n_max = static_cast<std::size_t>(s.count("n_max", 1, 100'000, 200));
  const auto traces = static_cast<std::size_t>(s.count("trace_paths", 0, static_cast<std::int64_t>(paths), 3));
  const ScaleGrid grid = parse_grid(s, "grid", ScaleGrid{0.5, 1, 20, 1.0});
  config_step("sdim.grid", [&] { grid.validate(); });

  Stream root(c.seed);
  Stream bounds_stream = root.child(1);
  const EssentialBounds eb = essential_bounds(*md.mu, *md.ifs, bounds_stream, paths, n_max, grid);

  Artifacts out;
  out.main.header = {"path", "n", "s_n"};
  const Stream trace_root = root.child(2);
  for (std::size_t p = 0; p < traces; ++p) {
    Stream local = trace_root.child(p);
    const PathProfile path(*md.mu, *md.ifs, md.mu->sample(local, n_max), n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const double v = path.s_n(n);
      out.main.add({fmt(p), fmt(n), fmt(v)});
      out.point(static_cast<double>(n), v, "path" + fmt(p));
    }
  }
  out.put("paths", paths);
  out.put("n_max", n_max);
  out.put("s_lower", eb.s_lower);
  out.put("s_upper", eb.s_upper);
  out.put("s_q01", eb.s_q01);
  out.put("s_q99", eb.s_q99);
  add_ifs_summary(out, *md.ifs);
  return out;
}

Artifacts cmd_gpot(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("gpot");
  const auto paths = static_cast<std::size_t>(s.count("paths", 1, 1'000'000, 20));
  const auto traces = static_cast<std::size_t>(s.count("trace_paths", 0, static_cast<std::int64_t>(paths), 3));
  const ScaleGrid grid = parse_grid(s, "grid", ScaleGrid{0.5, 1, 40, 1.0});
  config_step("gpot.grid", [&] { grid.validate(); });
  const double finest = grid.radii().back();
  if (!(grid.radii().front() < 1.0)) s.fail("grid", "radii must lie below 1");
  const std::size_t depth = required_depth(finest, md.ifs->alpha_plus());
  if (depth > 100'000) s.fail("grid", "finest radius needs words longer than 100000");

  Stream root(c.seed);
  Stream bounds_stream = root.child(1);
  const EssentialBounds eb = essential_bounds(*md.mu, *md.ifs, bounds_stream, paths, 1, grid);

  Artifacts out;
  out.main.header = {"path", "r", "log_g", "ratio"};
  const Stream trace_root = root.child(2);
  for (std::size_t p = 0; p < traces; ++p) {
    Stream local = trace_root.child(p);
    const PathProfile path(*md.mu, *md.ifs, md.mu->sample(local, depth), depth);
    const TailTrace t = d_mu_estimate(path, grid);
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      const double r = t.scale[i];
      out.main.add({fmt(p), fmt(r), fmt(t.value[i] * std::log(r)), fmt(t.value[i])});
      out.point(-std::log(r), t.value[i], "path" + fmt(p));
    }
  }
  out.put("paths", paths);
  out.put("finest_radius", finest);
  out.put("depth", depth);
  out.put("d_lower", eb.d_lower);
  out.put("d_upper", eb.d_upper);
  out.put("d_q01", eb.d_q01);
  out.put("d_q99", eb.d_q99);
  add_ifs_summary(out, *md.ifs);
  return out;
}

CapacityMethod parse_method(const Section& s) {
  const std::string m = s.text("method", std::string("ultrametric"));
  if (m == "ultrametric") return CapacityMethod::ultrametric;
  if (m == "frank_wolfe") return CapacityMethod::frank_wolfe;
  s.fail("method", "must be ultrametric or frank_wolfe");
}

Artifacts cmd_capacity(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("capacity");
  CapacityOptions opt;
  opt.method = parse_method(s);
  opt.tol = tol_of(c, s, 1e-8, 1e-15, 1e-1);
  opt.max_iterations = static_cast<std::size_t>(s.count("max_iterations", 1, 100'000'000, 100'000));
  const auto max_nodes = static_cast<std::size_t>(s.count("max_nodes", 1, 100'000'000, 2'000'000));
  const ScaleGrid grid = parse_grid(s, "grid", ScaleGrid{0.5, 1, 8, 1.0});
  config_step("capacity.grid", [&] { grid.validate(); });

  const CapacityDims cd = capacity_dims(*md.ifs, md.set_ptr(), grid, opt, max_nodes);
  Artifacts out;
  out.main.header = {"r", "depth", "log_capacity", "dim_ratio", "gap", "status"};
  std::size_t k = 0;
  for (double r : grid.radii()) {
    const bool skipped = std::find(cd.skipped_radii.begin(), cd.skipped_radii.end(), r) != cd.skipped_radii.end();
    if (skipped) {
      out.main.add({fmt(r), "", "", "", "", "skipped"});
      continue;
    }
    const double ratio = r < 1.0 ? cd.log_capacity[k] / -std::log(r) : 0.0;
    out.main.add({fmt(r), fmt(cd.depths[k]), fmt(cd.log_capacity[k]), fmt(ratio), fmt(cd.gaps[k]), "ok"});
    out.point(-std::log(r), cd.log_capacity[k], "log_capacity");
    ++k;
  }
  out.put("lower", cd.lower);
  out.put("upper", cd.upper);
  out.put("computed_radii", k);
  out.put("skipped_radii", cd.skipped_radii.size());
  out.partial = !cd.skipped_radii.empty();
  add_ifs_summary(out, *md.ifs);
  return out;
}

struct CloudParams {
  std::size_t points = 200'000;
  std::size_t depth = 0;
};

CloudParams parse_cloud(const Section& s, std::int64_t default_points) {
  CloudParams p;
  p.points = static_cast<std::size_t>(s.count("points", 1, 100'000'000, default_points));
  p.depth = static_cast<std::size_t>(s.count("depth", 0, 10'000, 0));
  return p;
}

PointCloud build_cloud(const Model& md, const Translations& a, const CloudParams& p, double finest, Stream stream) {
  const std::size_t depth = p.depth ? p.depth : depth_for(*md.ifs, a, finest);
  return project_cloud(*md.ifs, a, *md.mu, p.points, depth, stream, finest);
}

Artifacts cmd_boxdim(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("boxdim");
  const CloudParams cp = parse_cloud(s, 200'000);
  const auto samples = static_cast<std::size_t>(s.count("samples", 1, 10'000, 1));
  FitOptions fit;
  fit.window = static_cast<std::size_t>(s.count("window", 2, 1000, 4));
  fit.expected_dim = s.in_range("expected_dim", 0.0, kMaxDim, 0.0);
  const ScaleGrid grid = parse_grid(s, "grid", ScaleGrid{0.5, 4, 11, 1.0});
  config_step("boxdim.grid", [&] { grid.validate(); });
  if (grid.size() < 2) s.fail("grid", "needs at least two radii");
  const auto as = load_translations(c, md, samples);

  Artifacts out;
  out.main.header = {"sample", "r", "box_count", "neg_log_r", "log_count"};
  const Stream clouds = Stream(c.seed).child(2);
  std::vector<double> slopes;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const PointCloud cloud = build_cloud(md, as[i], cp, grid.radii().back(), clouds.child(i));
    const DimensionReport rep = box_dim_fit(cloud, grid, fit);
    for (std::size_t j = 0; j < rep.radii.size(); ++j) {
      out.main.add({fmt(i), fmt(rep.radii[j]), fmt(rep.statistic[j]), fmt(rep.log_x[j]), fmt(rep.log_y[j])});
      out.point(rep.log_x[j], rep.log_y[j], "sample" + fmt(i));
    }
    const std::string p = "sample" + fmt(i) + "_";
    out.put(p + "slope", rep.slope);
    out.put(p + "lower", rep.lower);
    out.put(p + "upper", rep.upper);
    out.put(p + "depth", cloud.metadata.depth);
    slopes.push_back(rep.slope);
  }
  out.put("median_slope", median(slopes));
  add_ifs_summary(out, *md.ifs);
  return out;
}

Artifacts cmd_localdim(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("localdim");
  const CloudParams cp = parse_cloud(s, 200'000);
  const auto samples = static_cast<std::size_t>(s.count("samples", 1, 10'000, 1));
  const auto centers = static_cast<std::size_t>(s.count("centers", 1, 100'000, 50));
  LocalDimOptions lo;
  lo.window = static_cast<std::size_t>(s.count("window", 0, 1000, 0));
  const bool relative = s.flag("relative", true);
  const ScaleGrid base = parse_grid(s, "grid", ScaleGrid{0.5, 2, 16, 1.0});
  config_step("localdim.grid", [&] { base.validate(); });
  if (base.size() < 2) s.fail("grid", "needs at least two radii");
  const auto as = load_translations(c, md, samples);

  Artifacts out;
  out.main.header = {"sample", "center", "r", "mass", "lower", "upper"};
  const Stream root(c.seed);
  std::vector<double> medians;
  for (std::size_t i = 0; i < as.size(); ++i) {
    ScaleGrid grid = base;
    PointCloud cloud = build_cloud(md, as[i], cp, base.radii().back(), root.child(2).child(i));
    if (relative) {
      grid.scale = base.scale * cloud.diameter_bound();
      if (!(grid.scale > 0.0)) throw DomainError("cloud has zero diameter; use relative = false");
      const double finest = grid.radii().back();
      if (!cp.depth && depth_for(*md.ifs, as[i], finest) > cloud.metadata.depth) {
        cloud = build_cloud(md, as[i], cp, finest, root.child(2).child(i));
      }
    }
    std::vector<BallCounter> counters;
    for (double r : grid.radii()) counters.emplace_back(cloud, r);
    Stream pick = root.child(3).child(i);
    std::vector<double> lowers, uppers;
    for (std::size_t k = 0; k < centers; ++k) {
      const auto idx = static_cast<std::size_t>(pick.below(cloud.size()));
      const LocalDimEstimate est = local_dim_from_counters(counters, cloud.point(idx), lo);
      for (std::size_t j = 0; j < est.radii.size(); ++j) {
        out.main.add({fmt(i), fmt(k), fmt(est.radii[j]), fmt(est.masses[j]), fmt(est.lower), fmt(est.upper)});
      }
      lowers.push_back(est.lower);
      uppers.push_back(est.upper);
      out.point(static_cast<double>(k), est.lower, "sample" + fmt(i) + "_lower");
    }
    const std::string p = "sample" + fmt(i) + "_";
    out.put(p + "median_lower", median(lowers));
    out.put(p + "median_upper", median(uppers));
    out.put(p + "grid_scale", grid.scale);
    medians.push_back(median(lowers));
  }
  out.put("median_lower", median(medians));
  add_ifs_summary(out, *md.ifs);
  return out;
}

Artifacts cmd_covering(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("covering");
  const auto samples = static_cast<std::size_t>(s.count("samples", 1, 10'000, 5));
  CoveringOptions opt;
  opt.max_nodes = static_cast<std::size_t>(s.count("max_nodes", 1, 100'000'000, 2'000'000));
  opt.cover_depth = static_cast<std::size_t>(s.count("cover_depth", 0, 1000, 0));
  const ScaleGrid grid = parse_grid(s, "grid", ScaleGrid{0.5, 2, 10, 1.0});
  config_step("covering.grid", [&] { grid.validate(); });
  const auto as = load_translations(c, md, samples);

  Artifacts out;
  out.main.header = {"sample", "r", "depth", "cells_lower", "cells_upper", "capacity", "diameter", "c_prime",
                     "bound", "pass"};
  std::size_t passed = 0, total = 0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    for (double r : grid.radii()) {
      const CoveringCertificate cert = covering_check(*md.ifs, as[i], md.set_ptr(), r, opt);
      out.main.add({fmt(i), fmt(r), fmt(cert.depth), fmt(cert.n_cells_lower), fmt(cert.n_cells_upper),
                    fmt(cert.capacity), fmt(cert.diameter_bound), fmt(cert.c_prime), fmt(cert.bound),
                    fmt(cert.pass)});
      out.point(-std::log(r), std::log(static_cast<double>(cert.n_cells_upper)), "sample" + fmt(i) + "_cells");
      out.point(-std::log(r), std::log(cert.bound), "sample" + fmt(i) + "_bound");
      ++total;
      if (cert.pass) ++passed;
      out.check(cert.pass, "covering sample " + fmt(i) + " r=" + fmt(r));
    }
  }
  out.put("passed", passed);
  out.put("total", total);
  add_ifs_summary(out, *md.ifs);
  return out;
}

Artifacts cmd_sweep(const Context& c) {
  const Model md = load_model(c.root);
  const Section s = c.root.sub("sweep");
  SweepConfig cfg;
  cfg.maps = md.ifs->maps();
  cfg.measure = *md.mu;
  cfg.set = md.set;
  if (md.explicit_translations) cfg.translations = {md.ifs->translations()};
  cfg.n_translations = static_cast<std::size_t>(s.count("samples", 1, 10'000, 10));
  cfg.rho = c.root.sub("ifs").in_range("rho", 0.0, 1e6, 1.0);
  cfg.seed = c.seed;
  cfg.box_grid = parse_grid(s, "box_grid", cfg.box_grid);
  cfg.local_grid = parse_grid(s, "local_grid", cfg.local_grid);
  cfg.symbolic_grid = parse_grid(s, "symbolic_grid", cfg.symbolic_grid);
  config_step("sweep.box_grid", [&] { cfg.box_grid.validate(); });
  config_step("sweep.local_grid", [&] { cfg.local_grid.validate(); });
  config_step("sweep.symbolic_grid", [&] { cfg.symbolic_grid.validate(); });
  cfg.relative_grids = s.flag("relative_grids", true);
  cfg.n_points = static_cast<std::size_t>(s.count("points", 1, 100'000'000, 200'000));
  cfg.depth = static_cast<std::size_t>(s.count("depth", 0, 10'000, 0));
  cfg.n_centers = static_cast<std::size_t>(s.count("centers", 1, 100'000, 50));
  cfg.n_paths = static_cast<std::size_t>(s.count("paths", 1, 100'000, 20));
  cfg.symbolic_depth = static_cast<std::size_t>(s.count("symbolic_depth", 1, 100'000, 200));
  cfg.box_tol = s.in_range("box_tol", 0.0, 10.0, cfg.box_tol);
  cfg.local_tol = s.in_range("local_tol", 0.0, 10.0, cfg.local_tol);
  cfg.exact_tol = s.in_range("exact_tol", 0.0, 10.0, cfg.exact_tol);
  cfg.pass_fraction = s.in_range("pass_fraction", 0.0, 1.0, cfg.pass_fraction);
  cfg.box_window = static_cast<std::size_t>(s.count("box_window", 2, 1000, 4));
  const std::string check = s.text("check", std::string("both"));
  if (check != "both" && check != "box" && check != "local" && check != "none") {
    s.fail("check", "must be both, box, local or none");
  }

  const SweepReport rep = sweep_experiment(cfg);
  Artifacts out;
  const std::string csv = rep.csv();
  const auto nl = csv.find('\n');
  std::istringstream head(csv.substr(0, nl));
  for (std::string col; std::getline(head, col, ',');) out.main.header.push_back(col);
  std::istringstream body(csv.substr(nl + 1));
  for (std::string line; std::getline(body, line);) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(cell);
    out.main.add(std::move(row));
  }
  out.extra_files.emplace_back("sweep_samples.csv", rep.summary_csv());
  for (const auto& smp : rep.samples) {
    for (std::size_t j = 0; j < smp.box.log_x.size(); ++j) {
      out.point(smp.box.log_x[j], smp.box.log_y[j], "a" + fmt(smp.index));
    }
  }
  out.put("affinity_lo", rep.affinity.lo);
  out.put("affinity_hi", rep.affinity.hi);
  out.put("box_target", rep.box_target);
  out.put("box_pass_fraction", rep.box_pass_fraction);
  out.put("local_pass_fraction", rep.local_pass_fraction);
  out.put("box_pass", rep.box_pass);
  out.put("local_pass", rep.local_pass);
  if (rep.box_slope_quantiles.size() == 3) {
    out.put("box_slope_q10", rep.box_slope_quantiles[0]);
    out.put("box_slope_q50", rep.box_slope_quantiles[1]);
    out.put("box_slope_q90", rep.box_slope_quantiles[2]);
  }
  out.put("verdict", to_string(rep.verdict));
  out.put("occupancy_fraction", rep.occupancy_fraction);
  out.put("check", check);
  if (check == "both" || check == "box") out.check(rep.box_pass, "box-dimension pass fraction");
  if (check == "both" || check == "local") out.check(rep.local_pass, "local-dimension pass fraction");
  add_ifs_summary(out, *md.ifs);
  return out;
}

bool in_block_window(std::int64_t n) {
  for (std::int64_t mi = 8; mi < n; mi *= 8) {
    if (n >= mi + 1 && 4 * n <= 5 * mi) return true;
  }
  return false;
}

Artifacts cmd_example1(const Context& c) {
  const Section s = c.root.sub("example1");
  const int d = static_cast<int>(s.count("d", 2, kMaxDim, 2));
  const int k = static_cast<int>(s.count("k", 1, d - 1, 1));
  if (std::pow(9.0, k) > 65535.0) s.fail("k", "alphabet 9^k exceeds 65535 symbols");
  const auto n_max = static_cast<std::size_t>(s.count("n_max", 1, 20'000, 600));
  std::vector<std::int64_t> levels{16, 32, 64, 128, 256, 512};
  if (s.has("g_levels")) {
    levels.clear();
    for (double v : s.numbers("g_levels")) {
      if (v < 1 || v > 20'000 || v != std::floor(v)) s.fail("g_levels", "entries must be integers in [1, 20000]");
      levels.push_back(static_cast<std::int64_t>(v));
    }
  }
  const double slack = s.in_range("slack", 0.0, 1.0, 1e-12);

  const TreeMeasure mu = TreeMeasure::example_one(d, k);
  const ExampleOneSchedule& sched = *mu.example_one();
  const AffineIFS ifs = sched.ifs();
  const std::size_t depth = std::max<std::size_t>(n_max, static_cast<std::size_t>(*std::max_element(levels.begin(), levels.end())));
  Stream stream(c.seed);
  const PathProfile path(mu, ifs, mu.sample(stream, depth), depth);

  Artifacts out;
  out.main.header = {"quantity", "n", "exact", "value", "expected", "pass"};
  const Rational one(1), golden(19, 18);
  std::size_t s_checked = 0;
  double max_numeric_err = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto ni = static_cast<std::int64_t>(n);
    const Rational exact = sched.exact_s_n(ni);
    const double value = path.s_n(n);
    max_numeric_err = std::max(max_numeric_err, std::abs(value - exact.to_double()));
    std::optional<Rational> expected;
    if (!in_block_window(ni)) expected = one;
    if (d == 2 && k == 1 && (n == 72 || n == 576)) expected = golden;
    std::string pass;
    if (expected) {
      const bool ok = exact == *expected;
      pass = fmt(ok);
      out.check(ok, "S_" + fmt(n) + " = " + expected->to_string());
      ++s_checked;
    }
    out.main.add({"s_n", fmt(n), exact.to_string(), fmt(value), expected ? expected->to_string() : "", pass});
    out.point(static_cast<double>(n), value, "s_n");
  }
  out.check(max_numeric_err <= 1e-9, "numeric S_n within 1e-9 of the exact value");

  const double log3 = std::log(3.0);
  for (std::int64_t big_n : levels) {
    const double log_g = path.log_g(std::pow(3.0, -static_cast<double>(big_n)));
    const double bound = -static_cast<double>(big_n + 1) * log3;
    const bool ok = log_g >= bound - slack;
    out.check(ok, "G(x, 3^-" + std::to_string(big_n) + ") >= 3^-" + std::to_string(big_n + 1));
    out.main.add({"log3_g", std::to_string(big_n), "", fmt(log_g / log3), fmt(bound / log3), fmt(ok)});
    out.point(static_cast<double>(big_n), log_g / log3 + static_cast<double>(big_n), "log3_g_plus_n");
  }
  out.put("d", d);
  out.put("k", k);
  out.put("alphabet", sched.alphabet_size());
  out.put("s_checked", s_checked);
  out.put("max_numeric_error", max_numeric_err);
  out.put("g_levels", levels.size());
  return out;
}

Artifacts cmd_orth(const Context& c) {
  const Section s = c.root.sub("orth");
  const int m = static_cast<int>(s.count("m", 1, kMaxDim - 1, 1));
  CriterionOptions opt;
  opt.n_centers = static_cast<std::size_t>(s.count("centers", 1, 100'000, 50));
  opt.tol = tol_of(c, s, 0.1, 0.0, 10.0);
  opt.fraction = s.in_range("fraction", 0.0, 1.0, 0.9);
  opt.window = static_cast<std::size_t>(s.count("window", 0, 1000, 0));
  opt.seed = c.seed;
  const ScaleGrid grid = parse_grid(s, "grid", ScaleGrid{0.5, 2, 14, 1.0});
  config_step("orth.grid", [&] { grid.validate(); });
  if (grid.size() < 2) s.fail("grid", "needs at least two radii");

  const Section src = s.sub("cloud");
  const std::string kind = src.text("kind", std::string("ifs"));
  PointCloud cloud;
  if (kind == "points") {
    const auto pts = src.matrix("points");
    std::vector<double> coords;
    for (const auto& p : pts) coords.insert(coords.end(), p.begin(), p.end());
    std::vector<double> w = src.has("weights") ? src.numbers("weights") : std::vector<double>{};
    if (!w.empty() && w.size() != pts.size()) src.fail("weights", "needs one weight per point");
    cloud = config_step("orth.cloud.points",
                        [&] { return PointCloud(static_cast<int>(pts.front().size()), coords, w); });
  } else if (kind == "ifs") {
    const Model md = load_model(c.root);
    const CloudParams cp = parse_cloud(src, 100'000);
    const auto as = load_translations(c, md, 1);
    cloud = build_cloud(md, as.front(), cp, grid.radii().back(), Stream(c.seed).child(2));
  } else {
    src.fail("kind", "must be ifs or points");
  }
  const int embed = static_cast<int>(src.count("embed", 0, kMaxDim, 0));
  if (embed > 0) {
    if (embed < cloud.dim()) src.fail("embed", "must be at least the cloud dimension");
    std::vector<double> coords;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto p = cloud.point(i);
      coords.insert(coords.end(), p.begin(), p.end());
      coords.insert(coords.end(), static_cast<std::size_t>(embed - cloud.dim()), 0.0);
    }
    std::vector<double> w;
    if (!cloud.uniform_weights()) {
      for (std::size_t i = 0; i < cloud.size(); ++i) w.push_back(cloud.weight(i));
    }
    cloud = PointCloud(embed, std::move(coords), std::move(w));
  }
  if (m >= cloud.dim()) s.fail("m", "must be below the ambient dimension " + fmt(cloud.dim()));

  const ExactDimCriterion cr = exact_dim_criterion(cloud, m, grid, opt);
  Artifacts out;
  out.main.header = {"center", "r", "f_value", "lower_local", "upper_local", "f_slope"};
  std::vector<double> slopes;
  for (std::size_t k = 0; k < cr.centers.size(); ++k) {
    const auto& ct = cr.centers[k];
    for (std::size_t j = 0; j < cr.radii.size(); ++j) {
      out.main.add({fmt(k), fmt(cr.radii[j]), fmt(ct.f_values[j]), fmt(ct.lower_local), fmt(ct.upper_local),
                    fmt(ct.f_slope)});
    }
    out.point(static_cast<double>(k), ct.f_slope, "f_slope");
    out.point(static_cast<double>(k), ct.lower_local, "lower_local");
    slopes.push_back(ct.f_slope);
  }
  const char* verdict = cr.condition_i ? "condition_i" : cr.condition_ii ? "condition_ii" : "neither";
  out.put("ambient", cloud.dim());
  out.put("m", m);
  out.put("points", cloud.size());
  out.put("lower_hausdorff", cr.lower_hausdorff);
  out.put("median_lower", cr.median_lower);
  out.put("median_f_slope", median(slopes));
  out.put("condition_i", cr.condition_i);
  out.put("condition_ii", cr.condition_ii);
  out.put("verdict", verdict);
  return out;
}

Artifacts cmd_exbound(const Context& c) {
  const Section s = c.root.sub("exbound");
  const int m = static_cast<int>(s.count("m", 1, 64, 1));
  const double delta = s.number("delta");
  const double dim_m_e = s.number("dim_m_e");
  int d = 0;
  double tau = 0.0;
  std::optional<AffineIFS> ifs;
  if (c.root.has("ifs")) {
    const std::vector<Matrix> maps = parse_maps(c.root);
    ifs = config_step("ifs.matrices", [&] { return AffineIFS(maps); });
    d = ifs->dim();
    if (s.has("d") && s.integer("d") != d) s.fail("d", "disagrees with the matrix dimension");
    tau = anisotropy_tau(*ifs);
  } else {
    d = static_cast<int>(s.count("d", 1, kMaxDim));
    tau = s.number("tau");
  }
  const double bound = config_step("exbound", [&] { return exceptional_bound(d, m, delta, dim_m_e, tau); });
  const double dm = static_cast<double>(d) * m;
  Artifacts out;
  out.main.header = {"quantity", "value"};
  out.main.add({"tau", fmt(tau)});
  out.main.add({"anisotropic_branch", fmt(dm - delta / (1.0 - tau))});
  out.main.add({"set_branch", fmt(dm + dim_m_e - d - delta)});
  out.main.add({"bound", fmt(bound)});
  out.main.add({"generic_bound", fmt(generic_exceptional_bound(d, m, delta))});
  out.point(tau, bound, "bound");
  out.put("d", d);
  out.put("m", m);
  out.put("delta", delta);
  out.put("dim_m_e", dim_m_e);
  out.put("tau", tau);
  out.put("bound", bound);
  out.put("generic_bound", generic_exceptional_bound(d, m, delta));
  return out;
}

// Optional top-level "expect": {"key": {"value": x, "tol": t}} or
// {"key": {"equals": "text"}}, checked against the summary.
void apply_expectations(const Section& root, Artifacts& out) {
  if (!root.has("expect")) return;
  const Section ex = root.sub("expect");
  for (const auto& [key, spec] : ex.raw().items()) {
    const Section e(spec, ex.field(key));
    if (!spec.is_object()) ex.fail(key, "must be an object");
    auto it = std::find_if(out.summary.begin(), out.summary.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == out.summary.end()) ex.fail(key, "not a summary key of this command");
    bool ok = false;
    if (e.has("equals")) {
      ok = it->second == e.text("equals");
    } else {
      if (!out.numeric.count(key)) ex.fail(key, "is not numeric; use equals");
      const double want = e.number("value");
      const double tol = e.in_range("tol", 0.0, 1e300, 0.0);
      ok = std::abs(out.numeric.at(key) - want) <= tol;
    }
    out.put("expect_" + key, ok);
    out.check(ok, "expect " + key);
  }
}

using Runner = std::function<Artifacts(const Context&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r{
      {"affinity", cmd_affinity}, {"sdim", cmd_sdim},         {"gpot", cmd_gpot},
      {"capacity", cmd_capacity}, {"boxdim", cmd_boxdim},     {"localdim", cmd_localdim},
      {"covering", cmd_covering}, {"sweep", cmd_sweep},       {"example1", cmd_example1},
      {"orth", cmd_orth},         {"exbound", cmd_exbound},
  };
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("IoError", "cannot write " + p.string());
  f << content;
  if (!f) throw Error("IoError", "failed writing " + p.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"affinity", "sdim",  "gpot",     "capacity", "boxdim", "localdim",
                                              "covering", "sweep", "example1", "orth",     "exbound"};
  return names;
}

RunResult run(const std::string& command, const RunOptions& options) {
  RunResult res;
  const auto it = runners().find(command);
  if (it == runners().end()) {
    res.exit_code = kExitConfig;
    res.message = "unknown command '" + command + "'";
    return res;
  }
  try {
    if (options.threads > 0) set_thread_count(options.threads);
    const Json cfg = load_config(options.config_path);
    const Section root(cfg, "");
    Context ctx{root, 1, options.tol};
    ctx.seed = options.seed ? *options.seed : static_cast<std::uint64_t>(root.count("seed", 0, INT64_MAX, 1));

    std::filesystem::path dir(options.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir)) throw Error("IoError", "cannot create output directory " + dir.string());

    Artifacts out = it->second(ctx);
    apply_expectations(root, out);
    out.put("checks_failed", out.failures.size());
    out.put("partial", out.partial);

    Table summary{{"key", "value"}, {}};
    for (const auto& [k, v] : out.summary) summary.add({k, v});
    std::vector<std::pair<std::string, std::string>> files{
        {command + ".csv", out.main.csv()},
        {command + "_summary.csv", summary.csv()},
        {command + "_plot.csv", out.plot.csv()},
    };
    for (auto& f : out.extra_files) files.push_back(std::move(f));
    nlohmann::ordered_json manifest;
    manifest["command"] = command;
    manifest["config"] = options.config_path;
    manifest["config_hash"] = fnv1a_hex(read_file(options.config_path));
    manifest["seed"] = ctx.seed;
    manifest["version"] = AFFDIM_VERSION;
    manifest["csv_schema"] = kCsvSchema;
    manifest["threads"] = thread_count();
    manifest["outputs"] = nlohmann::json::array();
    for (const auto& [name, content] : files) {
      write_file(dir / name, content);
      res.files.push_back((dir / name).string());
      manifest["outputs"].push_back(name);
    }
    manifest["partial"] = out.partial;
    manifest["failed_checks"] = out.failures;
    manifest["timestamp"] = utc_now();
    write_file(dir / (command + "_manifest.json"), manifest.dump(2) + "\n");
    res.files.push_back((dir / (command + "_manifest.json")).string());

    if (!out.failures.empty()) {
      res.exit_code = kExitCheckFailed;
      res.message = "check failed: " + out.failures.front();
      if (out.failures.size() > 1) res.message += " (+" + std::to_string(out.failures.size() - 1) + " more)";
    } else if (out.partial) {
      res.exit_code = kExitBudget;
      res.message = "partial results: some radii exceeded the budget";
    } else {
      res.message = "ok";
    }
  } catch (const ConfigInvalid& e) {
    res.exit_code = kExitConfig;
    res.message = e.what();
  } catch (const BudgetExceeded& e) {
    res.exit_code = kExitBudget;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitError;
    res.message = e.what();
  }
  return res;
}

}  // namespace affdim::cli
