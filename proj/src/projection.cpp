#include "affdim/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "affdim/capacity.hpp"
#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"

namespace affdim {
namespace {

constexpr std::size_t kChunk = 4096;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> flatten(const Translations& a) {
  std::vector<double> out;
  for (const auto& v : a) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// Image of the word under the coding maps applied to the origin.
void code_into(const AffineIFS& ifs, const Translations& a, const Word& w, double* out) {
  const int d = ifs.dim();
  Vec p(d, 0.0);
  for (std::size_t j = w.size(); j-- > 0;) {
    Vec q = ifs.map(w[j]).apply(p);
    for (int k = 0; k < d; ++k) q[k] += a[w[j]][k];
    p = std::move(q);
  }
  std::copy(p.begin(), p.end(), out);
}

std::size_t depth_for(const AffineIFS& ifs, const Translations& a, double radius) {
  const double big_r = ifs.radius_bound(a);
  if (big_r <= 0.0) return 0;
  const double target = radius / 10.0;
  if (big_r < target) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(target / big_r) / std::log(ifs.alpha_plus()))) + 1;
}

LocalDimEstimate fit_local(std::vector<double> radii, std::vector<double> masses, std::size_t window) {
  LocalDimEstimate est;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(masses[i] > 0.0)) break;  // finer balls only get emptier
    x.push_back(std::log(radii[i]));
    y.push_back(std::log(masses[i]));
  }
  est.radii = std::move(radii);
  est.masses = std::move(masses);
  if (x.size() < 2) return est;
  const std::size_t w = std::clamp<std::size_t>(window ? window : std::max<std::size_t>(2, est.radii.size() / 2), 2,
                                                x.size());
  const SlopeProfile prof = slope_profile(x, y, w);
  est.slope = prof.global;
  est.lower = prof.window_min;
  est.upper = prof.window_max;
  return est;
}

}  // namespace

Translations sample_translation(double rho, int d, int m, Stream& stream) {
  if (!(rho >= 0.0)) throw DomainError("rho must be non-negative");
  if (d < 1 || m < 1) throw DomainError("d and m must be positive");
  const int n = d * m;
  Translations a(m, Vec(d, 0.0));
  if (rho == 0.0) return a;
  std::vector<double> g(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : g) {
      v = stream.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double radius = rho * std::pow(stream.uniform(), 1.0 / n) / std::sqrt(norm2);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < d; ++k) a[i][k] = g[i * d + k] * radius;
  return a;
}

PointCloud project_cloud(const AffineIFS& ifs, const Translations& a, const TreeMeasure& mu, std::size_t n_points,
                         std::size_t depth, Stream& stream, double finest_radius) {
  check_translations(ifs, a);
  if (mu.alphabet_size() != ifs.size()) throw DomainError("measure and IFS alphabets differ");
  const double err = std::pow(ifs.alpha_plus(), static_cast<double>(depth)) * ifs.radius_bound(a);
  if (finest_radius > 0.0 && !(err < finest_radius / 10.0)) {
    throw DepthInsufficientForGrid("depth " + std::to_string(depth) + " leaves error " + std::to_string(err) +
                                   ", need below " + std::to_string(finest_radius / 10.0));
  }
  const int d = ifs.dim();
  const std::uint64_t seed = stream.next_u64();
  const Stream root(seed);
  std::vector<double> coords(n_points * d);
  const std::size_t chunks = (n_points + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Stream local = root.child(c);
    const std::size_t end = std::min(n_points, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) code_into(ifs, a, mu.sample(local, depth), &coords[i * d]);
  });
  PointCloud cloud(d, std::move(coords));
  cloud.metadata.ifs_hash = ifs.fingerprint();
  cloud.metadata.translation = flatten(a);
  cloud.metadata.depth = depth;
  cloud.metadata.samples = n_points;
  cloud.metadata.seed = seed;
  cloud.metadata.source = to_string(mu.kind());
  return cloud;
}

std::size_t box_count(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  return occupied_cells(cloud, r / std::sqrt(static_cast<double>(cloud.dim())));
}

DimensionReport box_dim_fit(const PointCloud& cloud, const ScaleGrid& grid, const FitOptions& options) {
  grid.validate();
  if (cloud.size() == 0) throw DomainError("empty cloud");
  DimensionReport rep;
  rep.radii = grid.radii();
  if (options.expected_dim > 0.0) {
    rep.finest_supported =
        std::max(cloud.diameter_bound(), 1e-300) * std::pow(static_cast<double>(cloud.size()), -1.0 / options.expected_dim);
    if (rep.radii.back() < rep.finest_supported) {
      throw GridTooFine("finest radius " + fmt(rep.radii.back()) + " below supported " + fmt(rep.finest_supported));
    }
  }
  for (double r : rep.radii) {
    const double n = static_cast<double>(box_count(cloud, r));
    rep.statistic.push_back(n);
    rep.log_x.push_back(-std::log(r));
    rep.log_y.push_back(std::log(n));
  }
  if (rep.radii.size() >= 2) {
    rep.window = std::clamp<std::size_t>(options.window, 2, rep.radii.size());
    const SlopeProfile prof = slope_profile(rep.log_x, rep.log_y, rep.window);
    rep.slope = prof.global;
    rep.lower = prof.window_min;
    rep.upper = prof.window_max;
  }
  rep.target = options.expected_dim;
  rep.residual = rep.slope - rep.target;
  return rep;
}

LocalDimEstimate local_dim_from_counters(const std::vector<BallCounter>& counters, std::span<const double> center,
                                         const LocalDimOptions& options) {
  if (counters.empty()) throw DomainError("no radii");
  std::vector<double> radii, masses;
  for (const auto& c : counters) {
    radii.push_back(c.radius());
    masses.push_back(c.mass(center));
  }
  if (!(masses.front() > 0.0)) throw EmptyBall("ball at the coarsest radius " + fmt(radii.front()) + " is empty");
  return fit_local(std::move(radii), std::move(masses), options.window);
}

LocalDimEstimate local_dim_estimate(const PointCloud& cloud, std::span<const double> center, const ScaleGrid& grid,
                                    const LocalDimOptions& options) {
  std::vector<BallCounter> counters;
  for (double r : grid.radii()) counters.emplace_back(cloud, r);
  return local_dim_from_counters(counters, center, options);
}

double covering_constant(int d, double diameter) {
  const double u = 2.0 * std::max(1.0, diameter);
  return std::pow(2.0 * u, d) * std::pow(d + 1.0, d);
}

CoveringCertificate covering_check(const AffineIFS& ifs, const Translations& a, const SftSpec* set, double r,
                                   const CoveringOptions& options) {
  check_translations(ifs, a);
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  const int d = ifs.dim();
  const int m = ifs.size();
  const double big_r = ifs.radius_bound(a);
  const double side = r / std::sqrt(static_cast<double>(d));

  CoveringCertificate cert;
  cert.r = r;

  // Capacity at depth l(r), solved exactly on the tree.
  const DepthTree tree(ifs, r, set, options.max_nodes);
  cert.depth = tree.depth();
  cert.capacity = min_energy(tree, {CapacityMethod::ultrametric}).capacity;

  // Cylinder images at a depth where each has radius below side / 20.
  std::size_t cover_depth = options.cover_depth;
  if (cover_depth == 0 && big_r > 0.0) {
    cover_depth = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::log(side / (20.0 * big_r)) / std::log(ifs.alpha_plus()))));
  }
  const double n_words = set ? set->count_words(static_cast<int>(cover_depth))
                             : std::pow(static_cast<double>(m), static_cast<double>(cover_depth));
  if (n_words > static_cast<double>(options.max_cover_words)) {
    throw BudgetExceeded("covering needs " + fmt(n_words) + " cylinders at depth " + std::to_string(cover_depth));
  }
  std::vector<bool> ext(m, true);
  if (set) ext = set->extendable();

  // Each cylinder image pi([I] n E) lies in B(f_I(0), ||T_I|| R). Its sample
  // point f_I(f_J(0)), J a fixed admissible continuation, is within
  // alpha_+^{|I|+|J|} R of the attractor.
  std::vector<std::int64_t> upper_cells, lower_cells;
  std::vector<double> sample_points;
  std::vector<Symbol> word;
  std::vector<MatrixChain> chains(cover_depth + 1, MatrixChain(d));
  std::vector<Vec> offsets(cover_depth + 1, Vec(d, 0.0));  // f_{I|j}(0)
  std::vector<std::int64_t> lo(d), hi(d), idx(d);

  auto visit_leaf = [&](const MatrixChain& chain, const Vec& origin, Symbol last) {
    const double rad = std::exp(chain.spectrum().log_alpha[0]) * big_r;
    for (int k = 0; k < d; ++k) {
      lo[k] = static_cast<std::int64_t>(std::floor((origin[k] - rad) / side));
      hi[k] = static_cast<std::int64_t>(std::floor((origin[k] + rad) / side));
    }
    std::fill(idx.begin(), idx.end(), 0);
    for (int k = 0; k < d; ++k) idx[k] = lo[k];
    while (true) {
      for (int k = 0; k < d; ++k) upper_cells.push_back(idx[k]);
      int k = 0;
      while (k < d && ++idx[k] > hi[k]) {
        idx[k] = lo[k];
        ++k;
      }
      if (k == d) break;
    }
    // Continuation by the smallest admissible symbols.
    Word cont;
    Symbol prev = last;
    for (int j = 0; j < 60; ++j) {
      Symbol next = 0;
      while (next < m && (!ext[next] || (set && !set->allowed(prev, next)))) ++next;
      cont.push_back(next);
      prev = next;
    }
    Vec tail(d);
    code_into(ifs, a, cont, tail.data());
    const Matrix prod = chain.matrix();
    Vec pt = prod.apply(tail);
    for (int k = 0; k < d; ++k) {
      pt[k] += origin[k];
      lower_cells.push_back(static_cast<std::int64_t>(std::floor(pt[k] / side)));
      sample_points.push_back(pt[k]);
    }
  };

  std::vector<int> next_symbol(cover_depth + 1, 0);
  if (cover_depth == 0) {
    visit_leaf(chains[0], offsets[0], 0);
  } else {
    // Iterative enumeration of admissible words of length cover_depth.
    std::size_t level = 0;
    word.assign(cover_depth, 0);
    next_symbol[0] = 0;
    while (true) {
      int s = next_symbol[level];
      while (s < m && (!ext[s] || (set && level > 0 && !set->allowed(word[level - 1], s)))) ++s;
      if (s >= m) {
        if (level == 0) break;
        --level;
        continue;
      }
      next_symbol[level] = s + 1;
      word[level] = static_cast<Symbol>(s);
      // f_{I s}(0) = f_I(a_s) = T_I a_s + f_I(0)
      const Vec shift = chains[level].matrix().apply(a[s]);
      for (int k = 0; k < d; ++k) offsets[level + 1][k] = offsets[level][k] + shift[k];
      chains[level + 1] = chains[level];
      chains[level + 1].push_back(ifs.map(s), ifs.log_abs_det(s));
      if (level + 1 == cover_depth) {
        visit_leaf(chains[level + 1], offsets[level + 1], static_cast<Symbol>(s));
      } else {
        ++level;
        next_symbol[level] = 0;
      }
    }
  }

  auto count_distinct = [d](const std::vector<std::int64_t>& flat) {
    const std::size_t n = flat.size() / d;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto less = [&](std::uint32_t x, std::uint32_t y) {
      return std::lexicographical_compare(flat.begin() + x * d, flat.begin() + (x + 1) * d, flat.begin() + y * d,
                                          flat.begin() + (y + 1) * d);
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t count = n ? 1 : 0;
    for (std::size_t i = 1; i < n; ++i) count += less(order[i - 1], order[i]) ? 1 : 0;
    return count;
  };
  cert.n_cells_upper = count_distinct(upper_cells);
  cert.n_cells_lower = count_distinct(lower_cells);

  // Diameter of pi(Sigma): lower estimate from the widest coordinate spread
  // of sample points of the full attractor.
  std::size_t diam_depth = 1;
  while (std::pow(static_cast<double>(m), static_cast<double>(diam_depth + 1)) <= 65536.0 && diam_depth < 40) ++diam_depth;
  double spread = 0.0;
  {
    std::vector<double> mins(d, std::numeric_limits<double>::infinity()), maxs(d, -std::numeric_limits<double>::infinity());
    std::vector<Symbol> w(diam_depth, 0);
    const std::size_t total = static_cast<std::size_t>(std::pow(static_cast<double>(m), static_cast<double>(diam_depth)));
    Vec p(d);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t j = 0; j < diam_depth; ++j) {
        w[j] = static_cast<Symbol>(c % m);
        c /= m;
      }
      code_into(ifs, a, Word(w), p.data());
      for (int k = 0; k < d; ++k) {
        mins[k] = std::min(mins[k], p[k]);
        maxs[k] = std::max(maxs[k], p[k]);
      }
    }
    for (int k = 0; k < d; ++k) spread = std::max(spread, maxs[k] - mins[k]);
    spread -= 2.0 * std::pow(ifs.alpha_plus(), static_cast<double>(diam_depth)) * big_r;
  }
  cert.diameter_bound = std::max(0.0, spread);
  cert.u = 2.0 * std::max(1.0, cert.diameter_bound);
  cert.c_prime = covering_constant(d, cert.diameter_bound);
  cert.bound = (std::log(r) / std::log(ifs.alpha_plus()) + 2.0) * cert.c_prime * cert.capacity;
  cert.pass = static_cast<double>(cert.n_cells_upper) <= cert.bound;
  return cert;
}

// --- sweep ------------------------------------------------------------------

const char* to_string(ExactDimVerdict v) {
  switch (v) {
    case ExactDimVerdict::condition_i: return "condition_i";
    case ExactDimVerdict::condition_ii: return "condition_ii";
    case ExactDimVerdict::neither: return "neither";
  }
  return "unknown";
}

ExactDimVerdict exact_dim_verdict(std::span<const double> s_liminf, std::span<const double> d_limsup, int d,
                                  double tol, double fraction) {
  if (s_liminf.empty() || s_liminf.size() != d_limsup.size()) throw DomainError("need matching non-empty traces");
  const double n = static_cast<double>(s_liminf.size());
  std::size_t above = 0;
  for (double s : s_liminf) above += s >= d - tol ? 1 : 0;
  if (above >= fraction * n) return ExactDimVerdict::condition_i;
  const double s = median(std::vector<double>(s_liminf.begin(), s_liminf.end()));
  if (s >= d) return ExactDimVerdict::neither;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < s_liminf.size(); ++i) {
    agree += (std::abs(s_liminf[i] - s) <= tol && std::abs(d_limsup[i] - s) <= tol) ? 1 : 0;
  }
  return agree >= fraction * n ? ExactDimVerdict::condition_ii : ExactDimVerdict::neither;
}

SweepReport sweep_experiment(const SweepConfig& cfg) {
  if (cfg.translations.empty() && cfg.n_translations == 0) throw DomainError("empty translation sample");
  if (cfg.n_centers == 0 || cfg.n_points == 0) throw DomainError("need points and centres");
  const AffineIFS ifs(cfg.maps);
  const int d = ifs.dim();
  const int m = ifs.size();
  if (cfg.measure.alphabet_size() != m) throw DomainError("measure alphabet differs from the number of maps");
  const SftSpec* set = cfg.set ? &*cfg.set : nullptr;

  SweepReport rep;
  rep.affinity = affinity_dim(ifs, set);
  rep.box_target = std::min(static_cast<double>(d), rep.affinity.midpoint());

  Stream master(cfg.seed);
  const Stream a_stream = master.child(1);
  const Stream cloud_stream = master.child(2);
  const Stream center_stream = master.child(3);
  const Stream path_stream = master.child(4);

  // Symbolic traces (independent of a).
  const std::size_t sym_depth =
      std::max(cfg.symbolic_depth, required_depth(cfg.symbolic_grid.radii().back(), ifs.alpha_plus()));
  rep.s_liminf.resize(cfg.n_paths);
  rep.s_limsup.resize(cfg.n_paths);
  rep.d_limsup.resize(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t i) {
    Stream local = path_stream.child(i);
    const PathProfile path(cfg.measure, ifs, cfg.measure.sample(local, sym_depth), sym_depth);
    const SEstimate s = s_liminf_estimate(path, cfg.symbolic_depth);
    rep.s_liminf[i] = s.liminf;
    rep.s_limsup[i] = s.limsup;
    rep.d_limsup[i] = d_mu_estimate(path, cfg.symbolic_grid).tail_max;
  });
  if (cfg.n_paths > 0) {
    rep.verdict = exact_dim_verdict(rep.s_liminf, rep.d_limsup, d, cfg.exact_tol, cfg.pass_fraction);
  }

  const std::size_t n_samples = cfg.translations.empty() ? cfg.n_translations : cfg.translations.size();
  const double finest_box = cfg.box_grid.radii().back();
  double occupancy_sum = 0.0;
  for (std::size_t si = 0; si < n_samples; ++si) {
    SweepSample sample;
    sample.index = si;
    if (cfg.translations.empty()) {
      Stream s = a_stream.child(si);
      sample.a = sample_translation(cfg.rho, d, m, s);
    } else {
      sample.a = cfg.translations[si];
      check_translations(ifs, sample.a);
    }
    ScaleGrid local_grid = cfg.local_grid;
    const double finest_local = local_grid.radii().back();
    std::size_t depth = cfg.depth ? cfg.depth : depth_for(ifs, sample.a, std::min(finest_box, finest_local));
    Stream cs = cloud_stream.child(si);
    PointCloud cloud = project_cloud(ifs, sample.a, cfg.measure, cfg.n_points, depth, cs);
    if (cfg.relative_grids) {
      local_grid.scale = cfg.local_grid.scale * std::max(cloud.diameter_bound(), 1e-12);
      const std::size_t needed = depth_for(ifs, sample.a, std::min(finest_box, local_grid.radii().back()));
      if (!cfg.depth && needed > depth) {
        depth = needed;
        cs = cloud_stream.child(si);
        cloud = project_cloud(ifs, sample.a, cfg.measure, cfg.n_points, depth, cs);
      }
    }
    sample.box = box_dim_fit(cloud, cfg.box_grid, {cfg.box_window, rep.box_target});
    sample.box_pass = std::abs(sample.box.slope - rep.box_target) <= cfg.box_tol;

    {
      // Informational occupancy of the finest box grid inside the bounding box.
      const double side = finest_box / std::sqrt(static_cast<double>(d));
      double cells = 1.0;
      for (int k = 0; k < d; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          lo = std::min(lo, cloud.point(i)[k]);
          hi = std::max(hi, cloud.point(i)[k]);
        }
        cells *= std::floor(hi / side) - std::floor(lo / side) + 1.0;
      }
      occupancy_sum += sample.box.statistic.back() / cells;
    }

    std::vector<BallCounter> counters;
    for (double r : local_grid.radii()) counters.emplace_back(cloud, r);

    Stream ps = center_stream.child(si);
    const std::size_t center_depth = std::max(depth, cfg.symbolic_depth);
    sample.lower_local.resize(cfg.n_centers);
    sample.upper_local.resize(cfg.n_centers);
    sample.lower_target.resize(cfg.n_centers);
    sample.upper_target.resize(cfg.n_centers);
    std::vector<Word> words;
    for (std::size_t c = 0; c < cfg.n_centers; ++c) words.push_back(cfg.measure.sample(ps, std::max(center_depth, sym_depth)));
    parallel_for(cfg.n_centers, [&](std::size_t c) {
      Vec x(d);
      code_into(ifs, sample.a, words[c].prefix(depth), x.data());
      LocalDimEstimate est;
      try {
        est = local_dim_from_counters(counters, x, {});
      } catch (const EmptyBall&) {
      }
      sample.lower_local[c] = est.lower;
      sample.upper_local[c] = est.upper;
      const PathProfile path(cfg.measure, ifs, words[c], sym_depth);
      sample.lower_target[c] = std::min(s_liminf_estimate(path, cfg.symbolic_depth).liminf, static_cast<double>(d));
      sample.upper_target[c] = d_mu_estimate(path, cfg.symbolic_grid).tail_max;
    });
    sample.median_lower = median(sample.lower_local);
    sample.median_upper = median(sample.upper_local);
    sample.local_pass = std::abs(sample.median_lower - median(sample.lower_target)) <= cfg.local_tol;
    rep.samples.push_back(std::move(sample));
  }

  std::vector<double> slopes;
  std::size_t box_ok = 0, local_ok = 0;
  for (const auto& s : rep.samples) {
    slopes.push_back(s.box.slope);
    box_ok += s.box_pass ? 1 : 0;
    local_ok += s.local_pass ? 1 : 0;
  }
  const double n = static_cast<double>(rep.samples.size());
  rep.box_pass_fraction = box_ok / n;
  rep.local_pass_fraction = local_ok / n;
  rep.box_pass = rep.box_pass_fraction >= cfg.pass_fraction;
  rep.local_pass = rep.local_pass_fraction >= cfg.pass_fraction;
  rep.box_slope_quantiles = {quantile(slopes, 0.1), quantile(slopes, 0.5), quantile(slopes, 0.9)};
  rep.occupancy_fraction = occupancy_sum / n;
  return rep;
}

std::string SweepReport::csv() const {
  std::ostringstream os;
  os << "sample,r,box_count,neg_log_r,log_count,slope\n";
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.box.radii.size(); ++i) {
      os << s.index << ',' << fmt(s.box.radii[i]) << ',' << fmt(s.box.statistic[i]) << ',' << fmt(s.box.log_x[i])
         << ',' << fmt(s.box.log_y[i]) << ',' << fmt(s.box.slope) << '\n';
    }
  }
  return os.str();
}

std::string SweepReport::summary_csv() const {
  std::ostringstream os;
  os << "sample,box_slope,box_lower,box_upper,box_target,box_pass,median_lower_local,median_upper_local,"
        "median_lower_target,median_upper_target,local_pass\n";
  for (const auto& s : samples) {
    os << s.index << ',' << fmt(s.box.slope) << ',' << fmt(s.box.lower) << ',' << fmt(s.box.upper) << ','
       << fmt(box_target) << ',' << (s.box_pass ? 1 : 0) << ',' << fmt(s.median_lower) << ',' << fmt(s.median_upper)
       << ',' << fmt(median(s.lower_target)) << ',' << fmt(median(s.upper_target)) << ',' << (s.local_pass ? 1 : 0)
       << '\n';
  }
  return os.str();
}

}  // namespace affdim
