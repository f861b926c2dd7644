#include "specflow/towers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "specflow/rng.hpp"

namespace specflow::towers {

namespace {

mpq_class mod1(const mpq_class& x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  return x - mpq_class(fl);
}

mpq_class mq(long long v) { return mpq_class(mpz_class(static_cast<long>(v))); }

// Non-wrapping pieces [lo, hi) of a circle interval, one or two of them.
struct Pieces {
  mpq_class lo[2], hi[2];
  int count = 0;
};

Pieces pieces_of(const CircleInterval& iv) {
  Pieces p;
  mpq_class lo = mod1(iv.lo);
  mpq_class hi = lo + iv.width;
  if (hi <= 1) {
    p.lo[0] = lo;
    p.hi[0] = hi;
    p.count = 1;
  } else {
    p.lo[0] = lo;
    p.hi[0] = 1;
    p.lo[1] = 0;
    p.hi[1] = hi - 1;
    p.count = 2;
  }
  return p;
}

}  // namespace

mpq_class overlap_length(const CircleInterval& a, const CircleInterval& b) {
  const Pieces pa = pieces_of(a), pb = pieces_of(b);
  mpq_class total(0);
  for (int i = 0; i < pa.count; ++i) {
    for (int j = 0; j < pb.count; ++j) {
      mpq_class lo = std::max(pa.lo[i], pb.lo[j]);
      mpq_class hi = std::min(pa.hi[i], pb.hi[j]);
      if (hi > lo) total += hi - lo;
    }
  }
  return total;
}

bool interval_contains(const CircleInterval& outer, const CircleInterval& inner) {
  if (inner.width > outer.width) return false;
  return overlap_length(outer, inner) == inner.width;
}

mpq_class Rect::intersection_area(const Rect& other) const {
  mpq_class ox = overlap_length(x, other.x);
  if (ox == 0) return mpq_class(0);
  return ox * overlap_length(y, other.y);
}

bool Rect::contains(const Rect& other) const {
  return interval_contains(x, other.x) && interval_contains(y, other.y);
}

Rect Rect::translated(const mpq_class& dx, const mpq_class& dy) const {
  return {{mod1(x.lo + dx), x.width}, {mod1(y.lo + dy), y.width}};
}

TowerGeometry::TowerGeometry(const pairgen::YPair& pair, int level_k)
    : sched_(pair.level(level_k)) {
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), sched_.q.get_mpz_t(), sched_.q_prime_prev.get_mpz_t());
  if (g != 1) throw InvalidSchedule("tower_geometry: gcd(q, q'_{n-1}) != 1");

  alpha_ = pair.alpha_value;
  alpha_prime_ = pair.alpha_prime_value;
  const int n = sched_.n;
  inv_q_ = mpq_class(mpz_class(1), sched_.q);
  inv_a_ = mpq_class(mpz_class(1), sched_.q_prime_prev);
  inv_b_q_ = mpq_class(sched_.q, sched_.q_prime);
  inv_b_q_.canonicalize();

  mpz_class qa = sched_.q * sched_.q_prime_prev;
  if (!qa.fits_slong_p()) throw InfeasibleScale("tower_geometry: q q'_{n-1} too large");
  qa_ = static_cast<long long>(qa.get_si());

  mpz_class r = sched_.q_prime / qa - 1;
  if (r < 0) r = 0;
  if (!r.fits_slong_p()) throw InfeasibleScale("tower_geometry: r_n too large");
  mpz_class h = (mpz_class(n - 2) * r / n) * qa;
  if (!h.fits_slong_p()) throw InfeasibleScale("tower_geometry: h_n too large");

  spec_.n = n;
  spec_.r_n = static_cast<long long>(r.get_si());
  spec_.h_n = static_cast<long long>(h.get_si());
  spec_.beta_unit = mpq_class(mpz_class(1), sched_.q_prime_prev * sched_.q_prime);

  mpq_class w(n - 2, n);  // 1 - 2/n
  w.canonicalize();
  spec_.base.x = {mpq_class(1, static_cast<unsigned long>(n)) * inv_q_, w * inv_q_};
  spec_.base.y = {inv_b_q_ / n, w * inv_b_q_};
}

Rect TowerGeometry::R(long long j) const {
  mpq_class xo = mod1(mq(j) * mpq_class(sched_.p, sched_.q));
  mpq_class yo = mod1(mq(j) * mpq_class(sched_.p_prime_prev, sched_.q_prime_prev));
  return {{xo, inv_q_}, {yo, inv_a_}};
}

Rect TowerGeometry::Rbar(long long j) const {
  const int n = spec_.n;
  mpq_class wbar(n - 2, n);
  wbar.canonicalize();
  Rect r0{{mpq_class(1, static_cast<unsigned long>(n)) * inv_q_, wbar * inv_q_},
          {mpq_class(0), mpq_class(n - 1, n) * inv_a_}};
  if (j == 0) return r0;
  return r0.translated(mq(j) * alpha_, mq(j) * alpha_prime_);
}

Rect TowerGeometry::D(long long j, long long i) const {
  const int n = spec_.n;
  const mpq_class inv_n2(1, static_cast<unsigned long>(n) * static_cast<unsigned long>(n));
  CircleInterval dx{inv_n2 * inv_q_, (1 - 2 * inv_n2) * inv_q_};
  CircleInterval dy{(mq(i) + inv_n2) * inv_b_q_, (1 - 2 * inv_n2) * inv_b_q_};
  Rect d0{{mod1(dx.lo), dx.width}, {mod1(dy.lo), dy.width}};
  if (j == 0) return d0;
  mpq_class xo = mq(j) * mpq_class(sched_.p, sched_.q);
  mpq_class yo = mq(j) * mpq_class(sched_.p_prime_prev, sched_.q_prime_prev);
  return d0.translated(xo, yo);
}

Rect TowerGeometry::level_rect(long long h) const {
  if (h < 0 || h > spec_.h_n) throw InvalidArgument("level_rect: h out of range");
  if (h == 0) return spec_.base;
  return spec_.base.translated(mq(h) * alpha_, mq(h) * alpha_prime_);
}

TowerGeometry tower_geometry(const pairgen::YPair& pair, int level_k) {
  return TowerGeometry(pair, level_k);
}

DefectReport rank_one_defect(const birkhoff::SumKernel& kernel, const TowerGeometry& tower,
                             int grid, long long m_cap) {
  if (grid < 2) throw InvalidArgument("rank_one_defect: grid must be >= 2");
  const Rect base = tower.spec().base;
  std::vector<birkhoff::Point> zs;
  zs.reserve(static_cast<std::size_t>(grid) * grid);
  const double x0 = base.x0(), y0d = base.y0(), xw = base.xw(), yw = base.yw();
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      zs.push_back({x0 + xw * i / (grid - 1), y0d + yw * j / (grid - 1)});
    }
  }
  DefectReport rep;
  rep.m_max = std::min<long long>(tower.spec().h_n, m_cap);
  rep.truncated_range = rep.m_max < tower.spec().h_n;
  if (rep.m_max < 1) return rep;

  double worst = 0.0;
  long long worst_m = 1;
  double sup_prev = 1e300, inf_last = -1e300;
  const long long h_n = tower.spec().h_n;
  kernel.sweep_sums(zs, rep.m_max, [&](long long m, const std::vector<double>& sums) {
    const auto mm = std::minmax_element(sums.begin(), sums.end());
    const double spread = *mm.second - *mm.first;
    if (spread > worst) {
      worst = spread;
      worst_m = m;
    }
    if (m == h_n - 1) sup_prev = *mm.second;
    if (m == h_n) inf_last = *mm.first;
  });
  rep.defect = worst;
  rep.m_at = worst_m;
  rep.separating_height_exists = !rep.truncated_range && h_n >= 1 && sup_prev < inf_last;

  double dx_max = 0.0, dy_max = 0.0;
  for (const auto& z : zs) {
    dx_max = std::max(dx_max, std::abs(kernel.birkhoff_fast(z, worst_m, 1, 0)));
    dy_max = std::max(dy_max, std::abs(kernel.birkhoff_fast(z, worst_m, 0, 1)));
  }
  rep.upper_bracket =
      worst + 2.0 * (dx_max * xw / (2.0 * (grid - 1)) + dy_max * yw / (2.0 * (grid - 1)));
  return rep;
}

MonoReport monochromaticity_base(const TowerGeometry& tower, const std::vector<Rect>& partition,
                                 long long level_stride) {
  if (level_stride < 1) throw InvalidArgument("monochromaticity_base: stride >= 1");
  MonoReport rep;
  const mpq_class area = tower.spec().base.area();
  for (long long h = 0; h <= tower.spec().h_n; h += level_stride) {
    const Rect lv = tower.level_rect(h);
    mpq_class best(0);
    for (const Rect& atom : partition) {
      mpq_class inter = lv.intersection_area(atom);
      if (inter > best) best = inter;
    }
    rep.level_fractions.push_back(mpq_class(best / area).get_d());
  }
  std::vector<double> sorted = rep.level_fractions;
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double best_eps = 1.0;
  for (std::size_t k = 0; k <= sorted.size(); ++k) {
    const double frac_failing = static_cast<double>(k) / count;
    const double needed = (k < sorted.size()) ? 1.0 - sorted[k] : 0.0;
    best_eps = std::min(best_eps, std::max(frac_failing, needed));
  }
  rep.epsilon_star = best_eps;
  return rep;
}

MonoFlowReport monochromaticity_flow(const birkhoff::SumKernel& kernel,
                                     const TowerGeometry& tower,
                                     const std::vector<MBox>& partition, double t,
                                     std::size_t samples, std::uint64_t seed) {
  const Rect base = tower.spec().base;
  std::vector<std::size_t> counts(partition.size(), 0);
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng(seed, 0xF10Bu, i);
    const double x = base.x0() + base.xw() * rng.next_double();
    const double y = base.y0() + base.yw() * rng.next_double();
    const flow::FlowPoint p = flow::flow_map(kernel, {x, y, 0.0}, t);
    for (std::size_t a = 0; a < partition.size(); ++a) {
      if (partition[a].contains(p)) {
        ++counts[a];
        break;
      }
    }
  }
  MonoFlowReport rep;
  rep.samples = samples;
  std::size_t best = 0;
  for (std::size_t c : counts) best = std::max(best, c);
  rep.fraction = static_cast<double>(best) / static_cast<double>(samples);
  rep.stderr_ = std::sqrt(rep.fraction * (1.0 - rep.fraction) / static_cast<double>(samples));
  return rep;
}

TilingReport exact_tiling_check(const TowerGeometry& tower) {
  TilingReport rep;
  const long long count = tower.rect_count();
  std::map<mpq_class, std::vector<long long>> buckets;
  rep.total_area = 0;
  for (long long j = 0; j < count; ++j) {
    const Rect r = tower.R(j);
    rep.total_area += r.area();
    buckets[mod1(r.x.lo)].push_back(j);
  }
  rep.disjoint = true;
  for (const auto& [xlo, js] : buckets) {
    for (std::size_t i = 0; i < js.size() && rep.disjoint; ++i) {
      for (std::size_t k = i + 1; k < js.size(); ++k) {
        if (tower.R(js[i]).intersection_area(tower.R(js[k])) != 0) {
          rep.disjoint = false;
          break;
        }
      }
    }
  }
  rep.full_measure = (rep.total_area == 1);
  return rep;
}

std::vector<birkhoff::Point> interior_points(const Rect& rect, int k) {
  std::vector<birkhoff::Point> pts;
  pts.reserve(static_cast<std::size_t>(k) * k);
  for (int i = 1; i <= k; ++i) {
    for (int j = 1; j <= k; ++j) {
      pts.push_back({rect.x0() + rect.xw() * i / (k + 1), rect.y0() + rect.yw() * j / (k + 1)});
    }
  }
  return pts;
}

}  // namespace specflow::towers
