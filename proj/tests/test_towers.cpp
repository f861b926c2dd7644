#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "specflow/analysis.hpp"
#include "specflow/ceiling.hpp"
#include "specflow/rng.hpp"
#include "specflow/towers.hpp"
#include "testutil.hpp"

using namespace specflow;
using namespace specflow::towers;

TEST_CASE("circle interval arithmetic: overlap and containment") {
  CircleInterval a{mpq_class(1, 10), mpq_class(3, 10)};
  CircleInterval b{mpq_class(1, 5), mpq_class(3, 10)};
  CHECK(overlap_length(a, b) == mpq_class(1, 5));
  CircleInterval wrap{mpq_class(9, 10), mpq_class(1, 5)};  // [0.9, 1.1)
  CHECK(overlap_length(wrap, CircleInterval{mpq_class(0), mpq_class(1, 20)}) ==
        mpq_class(1, 20));
  CHECK(interval_contains(a, CircleInterval{mpq_class(15, 100), mpq_class(1, 10)}));
  CHECK_FALSE(interval_contains(a, b));
  CHECK(interval_contains(CircleInterval{mpq_class(0), mpq_class(1)}, wrap));
}

TEST_CASE("R^j family: count, area, exact tiling") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    CHECK(tower.rect_count() == lf.geom.q * lf.geom.a);
    const Rect r0 = tower.R(0);
    CHECK(r0.area() == mpq_class(mpz_class(1), mpz_class(static_cast<long>(lf.geom.q)) *
                                                   static_cast<long>(lf.geom.a)));
    if (tower.rect_count() <= 10000) {
      const auto tiling = exact_tiling_check(tower);
      CHECK(tiling.disjoint);
      CHECK(tiling.full_measure);
      CHECK(tiling.total_area == 1);
    }
  }
}

TEST_CASE("Rbar^j sits inside R^j for every j") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    for (long long j = 0; j < tower.rect_count(); ++j) {
      CHECK(tower.R(j).contains(tower.Rbar(j)));
    }
  }
}

TEST_CASE("translated inclusion: T_{0,-beta_j} B^{j+i q a} inside D^{j+i q a}") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    const auto& spec = tower.spec();
    Rng rng(101, 40 + lf.geom.k, 0);
    int tested = 0;
    for (int it = 0; it < 60; ++it) {
      const long long i = static_cast<long long>(rng.next_double() * spec.r_n);
      const long long j = static_cast<long long>(rng.next_double() * tower.rect_count());
      const long long h = j + i * tower.rect_count();
      if (h > spec.h_n) continue;
      const Rect level = tower.level_rect(h);
      const Rect shifted = level.translated(mpq_class(0), -spec.beta(j));
      CHECK(tower.D(j, i).contains(shifted));
      ++tested;
    }
    CHECK(tested >= 20);
  }
}

TEST_CASE("all tower levels are pairwise disjoint (exact sweep)") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    const long long h_n = tower.spec().h_n;
    REQUIRE(h_n >= 1);
    std::vector<std::pair<mpq_class, long long>> order;
    std::vector<Rect> rects;
    rects.reserve(static_cast<std::size_t>(h_n) + 1);
    for (long long h = 0; h <= h_n; ++h) {
      rects.push_back(tower.level_rect(h));
      order.emplace_back(rects.back().x.lo, h);
    }
    std::sort(order.begin(), order.end());
    const mpq_class width = rects[0].x.width;
    std::size_t overlapping_pairs = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t k = i + 1; k < order.size() + i; ++k) {
        const auto& cand = order[k % order.size()];
        mpq_class gap = cand.first - order[i].first;
        if (gap < 0) gap += 1;
        if (k >= order.size() && gap == 0) break;
        if (gap >= width) break;
        ++overlapping_pairs;
        CHECK(rects[static_cast<std::size_t>(order[i].second)].intersection_area(
                  rects[static_cast<std::size_t>(cand.second)]) == 0);
      }
    }
    if (h_n > 50) CHECK(overlapping_pairs > 0);
  }
}

TEST_CASE("beta shifts are monotone and bounded by q/b") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    const auto& spec = tower.spec();
    const mpq_class cap(mpz_class(static_cast<long>(lf.geom.q)),
                        mpz_class(static_cast<long>(lf.geom.b)));
    mpq_class prev(-1);
    for (long long j = 0; j < tower.rect_count(); ++j) {
      const mpq_class b = spec.beta(j);
      CHECK(b >= 0);
      CHECK(b <= cap);
      CHECK(b > prev);
      prev = b;
    }
  }
}

TEST_CASE("kappa pulled back by beta_j is constant on each sampled tower level") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    const auto& g = lf.geom;
    Rng rng(103, 50 + g.k, 0);
    for (int it = 0; it < 25; ++it) {
      const long long i =
          static_cast<long long>(rng.next_double() * ((g.n - 2) * g.r / g.n));
      const long long j = static_cast<long long>(rng.next_double() * tower.rect_count());
      const long long h = j + i * tower.rect_count();
      if (h > tower.spec().h_n) continue;
      const auto pts = interior_points(tower.level_rect(h), 3);
      const double first = ceiling::eval_kappa(g, pts[0].y - g.beta(j));
      for (const auto& z : pts) {
        const double v = ceiling::eval_kappa(g, z.y - g.beta(j));
        CHECK(v == doctest::Approx(first).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("tower measure: h_n area(B^0) within the (1-2/n)^3 slack") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    TowerGeometry tower(exp.pair, lf.geom.k);
    const double mass = static_cast<double>(tower.spec().h_n) *
                        tower.spec().base.area().get_d();
    const double n = lf.geom.n;
    const double target = std::pow(1.0 - 2.0 / n, 3);
    CHECK(mass >= target - 0.05);
    CHECK(mass <= 1.0);
  }
}

TEST_CASE("rank-one defect: constant ceiling gives zero defect") {
  auto law = pairgen::GrowthLaw::explicit_floors({mpz_class(17)});
  ceiling::AssembleOptions opts;
  opts.level_cap = 0;
  auto unit_spec = ceiling::CeilingSpec::assemble(law, testutil::mini_pair(), opts);
  birkhoff::SumKernel unit(unit_spec);
  TowerGeometry tower(testutil::mini_pair(), 1);
  const auto rep = rank_one_defect(unit, tower, 4, 1000);
  CHECK(rep.defect == 0.0);
  CHECK(rep.separating_height_exists);
}

TEST_CASE("rank-one defect: component-wise triangle inequality") {
  const auto& exp = testutil::desk_experiment();
  auto law = exp.law;
  ceiling::AssembleOptions opts = exp.spec.options();
  opts.staircase_scale = exp.spec.staircase_scale();
  opts.level_cap = 1;  // only the first usable level
  auto partial_spec = ceiling::CeilingSpec::assemble(law, exp.pair, opts);
  birkhoff::SumKernel partial(partial_spec);

  TowerGeometry tower(exp.pair, 1);
  const long long cap = 300;
  const auto full = rank_one_defect(*exp.kernel, tower, 6, cap);
  const auto part = rank_one_defect(partial, tower, 6, cap);

  std::vector<birkhoff::Point> zs;
  const auto base = tower.spec().base;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      zs.push_back({base.x0() + base.xw() * i / 5, base.y0() + base.yw() * j / 5});
    }
  }
  double diff_defect = 0.0;
  std::vector<double> diffs(zs.size());
  for (long long m = 1; m <= cap; ++m) {
    for (std::size_t i = 0; i < zs.size(); ++i) {
      diffs[i] = exp.kernel->birkhoff_fast(zs[i], m) - partial.birkhoff_fast(zs[i], m);
    }
    const auto mm = std::minmax_element(diffs.begin(), diffs.end());
    diff_defect = std::max(diff_defect, *mm.second - *mm.first);
  }
  CHECK(full.defect <= part.defect + diff_defect + 1e-9);
  CHECK(part.defect <= full.defect + diff_defect + 1e-9);
}

TEST_CASE("monochromaticity: whole space, separating halves, exact vs Monte-Carlo") {
  const auto& exp = testutil::desk_experiment();
  TowerGeometry tower(exp.pair, 1);

  std::vector<Rect> whole = {{{mpq_class(0), mpq_class(1)}, {mpq_class(0), mpq_class(1)}}};
  auto rep = monochromaticity_base(tower, whole, 1);
  for (double f : rep.level_fractions) CHECK(f == doctest::Approx(1.0));
  CHECK(rep.epsilon_star == doctest::Approx(0.0));

  std::vector<Rect> halves = {
      {{mpq_class(0), mpq_class(1, 2)}, {mpq_class(0), mpq_class(1)}},
      {{mpq_class(1, 2), mpq_class(1, 2)}, {mpq_class(0), mpq_class(1)}}};
  const Rect b0 = tower.level_rect(0);
  if (interval_contains(CircleInterval{mpq_class(0), mpq_class(1, 2)}, b0.x)) {
    auto rep0 = monochromaticity_base(tower, halves, 1);
    CHECK(rep0.level_fractions[0] == doctest::Approx(1.0));
  }

  std::vector<Rect> quads;
  for (int ix = 0; ix < 2; ++ix) {
    for (int iy = 0; iy < 2; ++iy) {
      mpq_class qx(ix, 2), qy(iy, 2);
      qx.canonicalize();
      qy.canonicalize();
      quads.push_back({{qx, mpq_class(1, 2)}, {qy, mpq_class(1, 2)}});
    }
  }
  auto exact = monochromaticity_base(tower, quads, 1);
  Rng rng(107, 60, 0);
  for (long long h : {0LL, 2LL, 5LL}) {
    if (h > tower.spec().h_n) continue;
    const Rect lv = tower.level_rect(h);
    const std::size_t n = 4000;
    std::vector<std::size_t> counts(quads.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lv.x0() + lv.xw() * rng.next_double();
      const double y = lv.y0() + lv.yw() * rng.next_double();
      for (std::size_t a = 0; a < quads.size(); ++a) {
        const double ax0 = quads[a].x0(), ay0 = quads[a].y0();
        const double x1 = ax0 + quads[a].xw(), y1 = ay0 + quads[a].yw();
        const double xr = x - std::floor(x), yr = y - std::floor(y);
        if (xr >= ax0 && xr < x1 && yr >= ay0 && yr < y1) {
          ++counts[a];
          break;
        }
      }
    }
    const double mc =
        static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n;
    const double se = std::sqrt(std::max(mc * (1 - mc), 1.0 / n) / n);
    CHECK(std::abs(mc - exact.level_fractions[static_cast<std::size_t>(h)]) <= 3.5 * se);
  }
}

TEST_CASE("flow-level monochromaticity against the full-space partition") {
  const auto& exp = testutil::desk_experiment();
  TowerGeometry tower(exp.pair, 1);
  std::vector<MBox> whole = {{0, 1, 0, 1, 0, 1e9}};
  auto rep = monochromaticity_flow(*exp.kernel, tower, whole, 3.0, 500, 4242);
  CHECK(rep.fraction == doctest::Approx(1.0));
}
