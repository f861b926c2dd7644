#include "specflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specflow/flow.hpp"
#include "specflow/rng.hpp"

namespace specflow::analysis {

namespace {

struct Node {
  double x, g;
};

}  // namespace

StretchReport measure_stretch(const std::function<double(double)>& g, double a, double b,
                              int windows, int samples) {
  if (!(b > a)) throw InvalidArgument("measure_stretch: empty interval");
  if (windows < 2) throw InvalidArgument("measure_stretch: windows >= 2");
  if (samples < 1000) samples = 1000;

  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(samples) + 64);
  for (int i = 0; i < samples; ++i) {
    const double x = a + (b - a) * i / (samples - 1);
    nodes.push_back({x, g(x)});
  }
  double lo = nodes[0].g, hi = nodes[0].g;
  for (const Node& nd : nodes) {
    lo = std::min(lo, nd.g);
    hi = std::max(hi, nd.g);
  }
  const double K = hi - lo;
  if (K == 0.0) throw DegenerateError("measure_stretch: constant function");

  // One refinement pass near slab-boundary crossings.
  std::vector<double> bounds(static_cast<std::size_t>(windows) + 1);
  for (int i = 0; i <= windows; ++i) {
    bounds[static_cast<std::size_t>(i)] = lo + K * i / windows;
  }
  std::vector<Node> refined;
  refined.reserve(nodes.size() * 2);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    refined.push_back(nodes[i]);
    const double g0 = nodes[i].g, g1 = nodes[i + 1].g;
    const double cell_lo = std::min(g0, g1), cell_hi = std::max(g0, g1);
    bool crosses = false;
    for (double bd : bounds) {
      if (bd > cell_lo && bd < cell_hi) {
        crosses = true;
        break;
      }
    }
    if (crosses) {
      for (int k = 1; k < 8; ++k) {
        const double x = nodes[i].x + (nodes[i + 1].x - nodes[i].x) * k / 8.0;
        refined.push_back({x, g(x)});
      }
    }
  }
  refined.push_back(nodes.back());

  const double span = std::abs(refined.back().g - refined.front().g);
  StretchReport rep;
  rep.a = a;
  rep.b = b;
  rep.K = K;
  rep.endpoint_span = span;
  if (span == 0.0) {
    rep.epsilon = std::numeric_limits<double>::infinity();
    return rep;
  }

  // lambda(I_{u,v}) over the piecewise-linear interpolant.
  auto window_measure = [&](double u, double v) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < refined.size(); ++i) {
      const double x0 = refined[i].x, x1 = refined[i + 1].x;
      const double g0 = refined[i].g, g1 = refined[i + 1].g;
      const double glo = std::min(g0, g1), ghi = std::max(g0, g1);
      if (ghi < u || glo > v) continue;
      if (ghi == glo) {
        acc += x1 - x0;  // flat inside the window
        continue;
      }
      const double cl = std::max(glo, u), ch = std::min(ghi, v);
      if (ch > cl) acc += (x1 - x0) * (ch - cl) / (ghi - glo);
    }
    return acc;
  };

  double worst = 0.0;
  for (int i = 0; i < windows; ++i) {
    for (int j = i + 1; j <= windows; ++j) {
      const double u = bounds[static_cast<std::size_t>(i)];
      const double v = bounds[static_cast<std::size_t>(j)];
      const double lam = window_measure(u, v);
      const double expected = (v - u) / span * (b - a);
      worst = std::max(worst, std::abs(lam / expected - 1.0));
    }
  }
  rep.epsilon = worst;
  return rep;
}

std::optional<CriterionResult> stretch_criterion(double inf_d1, double sup_d2, double length) {
  if (!(length > 0.0)) throw InvalidArgument("stretch_criterion: length must be > 0");
  if (!(inf_d1 > 0.0)) return std::nullopt;
  CriterionResult r;
  r.K = inf_d1 * length;
  r.epsilon = sup_d2 * length / inf_d1;
  return r;
}

StepOnePartition step_one_partition(const ceiling::LevelGeometry& g, double target_length) {
  StepOnePartition part;
  part.n = g.n;
  part.q = g.q;
  const double n = static_cast<double>(g.n);
  const double q = static_cast<double>(g.q);
  const double comp_len = (0.5 - 2.0 / n) / q;
  if (comp_len <= 0.0) throw DegenerateError("step_one_partition: J_n empty at this n");
  double L = target_length;
  if (L <= 0.0 || L > comp_len) L = comp_len;
  part.length = L;
  for (long long aidx = 0; aidx < g.q; ++aidx) {
    const double base = static_cast<double>(aidx) / q;
    const double starts[2] = {base + 1.0 / (n * q), base + (0.5 + 1.0 / n) / q};
    for (double s0 : starts) {
      const long long k = std::max<long long>(1, static_cast<long long>(std::ceil(comp_len / L)));
      for (long long i = 0; i < k; ++i) {
        part.intervals.emplace_back(s0 + comp_len * static_cast<double>(i) / static_cast<double>(k),
                                    s0 + comp_len * static_cast<double>(i + 1) / static_cast<double>(k));
      }
    }
  }
  return part;
}

std::vector<IntervalStretch> stretch_scan(const birkhoff::SumKernel& kernel,
                                          const ceiling::LevelGeometry& level, double t,
                                          const StretchScanOptions& opts) {
  // Resolve the interval length: K_target over a probed derivative scale.
  double L = opts.interval_length;
  const double comp_len = (0.5 - 2.0 / level.n) / static_cast<double>(level.q);
  if (L <= 0.0) {
    const double x_probe = 1.0 / (level.n * static_cast<double>(level.q)) + 0.25 * comp_len;
    const double y_probe = 0.375;
    const long long m_probe = flow::time_index(kernel, {x_probe, y_probe, 0.0}, t);
    std::vector<double> mags;
    for (int i = 0; i < 17; ++i) {
      const double x = x_probe + comp_len * i / 17.0;
      mags.push_back(std::abs(kernel.birkhoff_fast({x, y_probe}, m_probe, 1, 0)));
    }
    std::sort(mags.begin(), mags.end());
    const double scale = std::max(mags[mags.size() / 2], 1e-12);
    L = std::clamp(opts.k_target / scale, comp_len * 1e-6, comp_len);
  }

  StepOnePartition part = step_one_partition(level, L);
  // Evenly subsample the partition to at most max_intervals intervals.
  std::vector<std::pair<double, double>> chosen;
  const std::size_t total = part.intervals.size();
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(opts.max_intervals), total);
  for (std::size_t i = 0; i < want; ++i) {
    chosen.push_back(part.intervals[i * total / want]);
  }

  std::vector<IntervalStretch> out;
  for (const auto& [ia, ib] : chosen) {
    for (int ys = 0; ys < opts.y_samples; ++ys) {
      double y;
      long long m_mid =
          flow::time_index(kernel, {0.5 * (ia + ib), 0.31 + 0.17 * ys, 0.0}, t);
      if (opts.y_eta) {
        const double eta = *opts.y_eta;
        const double lo_band = 1.0 - static_cast<double>(m_mid) / static_cast<double>(level.b) + eta;
        const double hi_band = 1.0 - eta;
        if (!(hi_band > lo_band)) continue;  // empty restriction band
        const double u = lo_band + (hi_band - lo_band) * (ys + 1.0) / (opts.y_samples + 1.0);
        y = u / static_cast<double>(level.a);
      } else {
        y = 0.31 + 0.17 * ys;  // fixed representative fibers
      }
      IntervalStretch rec;
      rec.a = ia;
      rec.b = ib;
      rec.y = y;
      rec.m = flow::time_index(kernel, {0.5 * (ia + ib), y, 0.0}, t);

      const int dg = opts.deriv_grid;
      const auto d1 = kernel.sample_line(y, rec.m, ia, (ib - ia) / (dg - 1), dg, 1);
      const auto d2 = kernel.sample_line(y, rec.m, ia, (ib - ia) / (dg - 1), dg, 2);
      double inf_d1 = std::numeric_limits<double>::infinity();
      double sup_d2 = 0.0;
      for (int i = 0; i < dg; ++i) {
        inf_d1 = std::min(inf_d1, std::abs(d1[static_cast<std::size_t>(i)]));
        sup_d2 = std::max(sup_d2, std::abs(d2[static_cast<std::size_t>(i)]));
      }
      rec.inf_d1 = inf_d1;
      rec.sup_d2 = sup_d2;
      rec.criterion = stretch_criterion(inf_d1, sup_d2, ib - ia);
      rec.criterion_pass = rec.criterion.has_value() && rec.criterion->K >= opts.k_target;

      try {
        // dense samples via the incremental line path at 4x the measurement
        // resolution; the crossing refinement interpolates on this grid
        const int ns = std::max(opts.measure_samples, 1000);
        const int dense = 4 * ns;
        const auto grid = kernel.sample_line(y, rec.m, ia, (ib - ia) / (dense - 1), dense, 0);
        auto g_fn = [&](double x) {
          const double pos = (x - ia) / (ib - ia) * (dense - 1);
          const int k = std::clamp(static_cast<int>(pos), 0, dense - 2);
          const double frac_k = pos - k;
          return grid[static_cast<std::size_t>(k)] * (1.0 - frac_k) +
                 grid[static_cast<std::size_t>(k + 1)] * frac_k;
        };
        rec.report = measure_stretch(g_fn, ia, ib, opts.windows, ns);
        if (rec.criterion) {
          rec.definition_pass = rec.report.K >= rec.criterion->K * (1.0 - opts.grid_tolerance) &&
                                rec.report.epsilon <= rec.criterion->epsilon + opts.grid_tolerance;
        }
      } catch (const DegenerateError&) {
        rec.definition_pass = false;
      }
      out.push_back(rec);
    }
  }
  return out;
}

double staircase_deviation(const birkhoff::SumKernel& kernel, const ceiling::LevelGeometry& g,
                           long long m, long long i1, long long i2, long long j,
                           birkhoff::Point z1, birkhoff::Point z2,
                           const StaircaseOptions& opts) {
  const long long pair_cap = opts.pair_cap > 0 ? opts.pair_cap : std::max<long long>(1, g.r / 2);
  const long long m_cap =
      opts.m_cap > 0 ? opts.m_cap
                     : static_cast<long long>(2.0 * static_cast<double>(g.b) /
                                              (static_cast<double>(g.n) * g.n));
  if (i1 < 0 || i2 < i1) throw InvalidArgument("staircase_deviation: need 0 <= i1 <= i2");
  if (i2 * g.n > (g.n - 4) * g.r) {
    throw InvalidArgument("staircase_deviation: i2 beyond (1-4/n) r_n");
  }
  if (i2 - i1 > pair_cap) throw InvalidArgument("staircase_deviation: i2-i1 beyond the pair cap");
  if (j < 0 || j >= g.q * g.a) throw InvalidArgument("staircase_deviation: j out of range");
  if (m < 0 || m > m_cap) throw InvalidArgument("staircase_deviation: m outside the window");
  const double s1 = kernel.birkhoff_fast(z1, m);
  const double s2 = kernel.birkhoff_fast(z2, m);
  return std::abs(s2 - s1 - static_cast<double>(i2 - i1) * static_cast<double>(m) * g.eps);
}

double box_measure(const birkhoff::SumKernel& kernel, const towers::MBox& box, int quad_grid) {
  const double dx = box.x1 - box.x0, dy = box.y1 - box.y0;
  if (dx <= 0.0 || dy <= 0.0 || box.s1 <= box.s0) return 0.0;
  if (box.s1 <= kernel.min_value()) {
    return dx * dy * (box.s1 - box.s0);  // exact: the box sits below the ceiling
  }
  double acc = 0.0;
  for (int i = 0; i < quad_grid; ++i) {
    for (int j = 0; j < quad_grid; ++j) {
      const double x = box.x0 + dx * (i + 0.5) / quad_grid;
      const double y = box.y0 + dy * (j + 0.5) / quad_grid;
      const double phi = kernel.eval_phi({x, y});
      const double height = std::min(box.s1, phi) - box.s0;
      if (height > 0.0) acc += height;
    }
  }
  return acc * dx * dy / (static_cast<double>(quad_grid) * quad_grid);
}

CorrelationEstimate correlation(const birkhoff::SumKernel& kernel, const towers::MBox& A,
                                const towers::MBox& B, double t, std::size_t samples,
                                std::uint64_t seed) {
  if (samples < 1000) throw InvalidArgument("correlation: samples >= 1000");
  const double env = kernel.max_value();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    flow::FlowPoint z;
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng(seed, (i << 20) | attempt, 0xC0BBu);
      const double x = rng.next_double();
      const double y = rng.next_double();
      const double u = rng.next_double() * env;
      // two-stage rejection: the coarse bracket decides almost every draw
      const auto [lo, hi] = kernel.eval_phi_bounds({x, y});
      if (u >= hi) continue;
      if (u < lo || u < kernel.eval_phi({x, y})) {
        z = {x, y, u};
        break;
      }
    }
    if (!B.contains(z)) continue;
    const flow::FlowPoint w = flow::flow_map(kernel, z, t);
    if (A.contains(w)) ++hits;
  }
  CorrelationEstimate est;
  est.samples = samples;
  est.mu_a = box_measure(kernel, A);
  est.mu_b = box_measure(kernel, B);
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  est.estimate = p - est.mu_a * est.mu_b;
  est.stderr_ = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(samples)) /
                          static_cast<double>(samples));
  return est;
}

RegionSplit region_split(const ceiling::LevelGeometry& g, double t, double eta) {
  if (!(eta > 0.0 && eta < 0.5)) throw InvalidArgument("region_split: eta in (0, 1/2)");
  RegionSplit out;
  const mpq_class theta = mpq_class(t) / mpq_class(static_cast<long>(g.b));
  const mpq_class etaq(eta);
  out.theta = theta.get_d();

  // Bands in the scaled coordinate u = {a y}.
  mpq_class u_lo = 1 - theta + etaq;
  mpq_class u_hi = 1 - etaq;
  if (u_lo < 0) u_lo = 0;
  mpq_class uniform_w = u_hi - u_lo;
  if (uniform_w < 0) uniform_w = 0;
  mpq_class stair_hi = 1 - theta - etaq;
  if (stair_hi < 0) stair_hi = 0;

  out.uniform_measure = uniform_w;
  out.staircase_measure = stair_hi;
  out.remainder_measure = 1 - uniform_w - stair_hi;

  const double a = static_cast<double>(g.a);
  auto emit = [&](double lo_u, double hi_u, std::vector<towers::MBox>& dst) {
    if (!(hi_u > lo_u)) return;
    for (long long k = 0; k < g.a; ++k) {
      towers::MBox box;
      box.x0 = 0.0;
      box.x1 = 1.0;
      box.y0 = (static_cast<double>(k) + lo_u) / a;
      box.y1 = (static_cast<double>(k) + hi_u) / a;
      box.s0 = 0.0;
      box.s1 = std::numeric_limits<double>::infinity();
      dst.push_back(box);
    }
  };
  if (uniform_w > 0) emit(u_lo.get_d(), u_hi.get_d(), out.uniform_part);
  if (stair_hi > 0) emit(0.0, stair_hi.get_d(), out.staircase_part);
  return out;
}

std::vector<TimeWindow> schedule_windows(const ceiling::LevelGeometry& g,
                                         const mpz_class* q_next) {
  std::vector<TimeWindow> ws;
  const double n = static_cast<double>(g.n);
  const double b = static_cast<double>(g.b);
  const double q = static_cast<double>(g.q);
  TimeWindow w1;
  w1.name = "uniform";
  w1.lo = 2.0 * b;
  w1.hi = (q_next != nullptr) ? q_next->get_d() / ((n + 1.0) * (n + 1.0)) : 0.0;
  ws.push_back(w1);
  ws.push_back({q / (n * n), b / (n * n), "staircase", });
  ws.push_back({b / (n * n), 2.0 * b, "combined"});
  return ws;
}

}  // namespace specflow::analysis
