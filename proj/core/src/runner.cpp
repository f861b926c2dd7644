#include "specflow/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specflow/flow.hpp"
#include "specflow/rng.hpp"

namespace specflow::cli {

namespace {

towers::MBox to_box(const std::vector<double>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::vector<double> window_times(const analysis::TimeWindow& w, int count) {
  std::vector<double> ts;
  if (!w.nonempty() || count < 1) return ts;
  const double lo = std::max(w.lo, 1.0);
  if (count == 1 || w.hi <= lo) {
    ts.push_back(std::max(lo, std::min(w.hi, lo)));
    return ts;
  }
  for (int i = 0; i < count; ++i) {
    ts.push_back(lo * std::pow(w.hi / lo, static_cast<double>(i) / (count - 1)));
  }
  return ts;
}

}  // namespace

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  out << content;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  Experiment exp;
  exp.law = cfg.growth_law();
  exp.pair = pairgen::build_pair(exp.law, cfg.levels, cfg.pair_seed(), cfg.build_options());
  exp.report = pairgen::verify_pair(exp.law, exp.pair);

  ceiling::AssembleOptions aopts;
  aopts.staircase_scale = cfg.staircase_scale;
  aopts.target_mass = cfg.target_mass;
  aopts.grid_exponent = cfg.grid_exponent;
  aopts.radius = cfg.radius;
  aopts.rel_threshold = cfg.rel_threshold;
  aopts.weighted_rel_threshold = cfg.weighted_rel_threshold;
  aopts.weight_cap = cfg.weight_cap;
  aopts.positivity_grid_exponent = cfg.positivity_grid_exponent;
  aopts.policy = {cfg.precision_bits, cfg.max_iterate};
  exp.spec = ceiling::CeilingSpec::assemble(exp.law, exp.pair, aopts);
  exp.kernel = std::make_unique<birkhoff::SumKernel>(exp.spec);
  return exp;
}

std::vector<analysis::TimeWindow> experiment_windows(const Experiment& exp) {
  std::vector<analysis::TimeWindow> all;
  const auto& levels = exp.spec.levels();
  const double t_max = 0.5 * static_cast<double>(exp.kernel->policy().max_iterate) *
                       exp.kernel->min_value();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const mpz_class* q_next =
        (i + 1 < levels.size()) ? &exp.pair.level(levels[i + 1].geom.k).q : nullptr;
    for (analysis::TimeWindow w : analysis::schedule_windows(levels[i].geom, q_next)) {
      w.hi = std::min(w.hi, t_max);
      all.push_back(w);
    }
  }
  return all;
}

namespace {

std::string pair_document(const Experiment& exp) {
  std::ostringstream os;
  os.precision(17);
  os << "specflow-pair v1\n";
  os << "law = " << exp.law.describe() << "\n";
  os << "alpha_quotients = ";
  for (std::size_t i = 0; i < exp.pair.alpha.quotients().size(); ++i) {
    if (i) os << ",";
    os << exp.pair.alpha.quotients()[i].get_str();
  }
  os << "\nalpha_prime_quotients = ";
  for (std::size_t i = 0; i < exp.pair.alpha_prime.quotients().size(); ++i) {
    if (i) os << ",";
    os << exp.pair.alpha_prime.quotients()[i].get_str();
  }
  os << "\nalpha = " << exp.pair.alpha_value.get_str() << "\n";
  os << "alpha_prime = " << exp.pair.alpha_prime_value.get_str() << "\n";
  os << "levels = " << exp.pair.levels.size() << "\n";
  for (const auto& lv : exp.pair.levels) {
    os << "level n=" << lv.n << " q=" << lv.q.get_str() << " q'=" << lv.q_prime.get_str()
       << " q'_prev=" << lv.q_prime_prev.get_str()
       << " sign_positive=" << (lv.sign_positive ? 1 : 0) << "\n";
  }
  os << exp.report.to_string();
  return os.str();
}

std::string birkhoff_csv(const Experiment& exp) {
  std::ostringstream os;
  os.precision(17);
  os << "m,S_m_fast,S_m_naive,abs_diff,mean_bound\n";
  const birkhoff::Point z{0.137, 0.294};
  for (long long m : {1LL, 3LL, 10LL, 31LL, 100LL, 316LL, 1000LL, 3162LL, 10000LL}) {
    const double fast = exp.kernel->birkhoff_fast(z, m);
    const double naive = exp.kernel->birkhoff_naive(z, m);
    os << m << "," << fast << "," << naive << "," << std::abs(fast - naive) << ","
       << exp.kernel->mean_deviation_bound(m) << "\n";
  }
  return os.str();
}

std::string tower_csv(const Experiment& exp, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "level,n,q,a,b,r,h,defect,defect_upper,m_at,m_max,range_truncated,"
        "separating_height,tiling_disjoint,tiling_full,mono_eps_star\n";
  for (const auto& lf : exp.spec.levels()) {
    const towers::TowerGeometry tower(exp.pair, lf.geom.k);
    const auto defect =
        towers::rank_one_defect(*exp.kernel, tower, cfg.defect_grid, cfg.defect_m_cap);
    int tiling_disjoint = -1, tiling_full = -1;
    if (tower.rect_count() <= 10000) {
      const auto tiling = towers::exact_tiling_check(tower);
      tiling_disjoint = tiling.disjoint ? 1 : 0;
      tiling_full = tiling.full_measure ? 1 : 0;
    }
    std::vector<towers::Rect> quadrants;
    for (int ix = 0; ix < 2; ++ix) {
      for (int iy = 0; iy < 2; ++iy) {
        mpq_class qx(ix, 2), qy(iy, 2);
        qx.canonicalize();
        qy.canonicalize();
        quadrants.push_back({{qx, mpq_class(1, 2)}, {qy, mpq_class(1, 2)}});
      }
    }
    const long long stride = std::max<long long>(1, tower.spec().h_n / 512);
    const auto mono = towers::monochromaticity_base(tower, quadrants, stride);
    os << lf.geom.k << "," << lf.geom.n << "," << lf.geom.q << "," << lf.geom.a << ","
       << lf.geom.b << "," << lf.geom.r << "," << lf.geom.h << "," << defect.defect << ","
       << defect.upper_bracket << "," << defect.m_at << "," << defect.m_max << ","
       << (defect.truncated_range ? 1 : 0) << "," << (defect.separating_height_exists ? 1 : 0)
       << "," << tiling_disjoint << "," << tiling_full << "," << mono.epsilon_star << "\n";
  }
  return os.str();
}

std::string stretch_csv(const Experiment& exp, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "level,window,t,interval_lo,interval_hi,y,m,inf_d1,sup_d2,criterion_eps,"
        "criterion_K,measured_eps,measured_K,criterion_pass,definition_pass\n";
  const auto windows = experiment_windows(exp);
  const auto& levels = exp.spec.levels();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t wi = 0; wi < 3; ++wi) {
      const auto& w = windows[i * 3 + wi];
      if (!w.nonempty()) continue;
      const double t = std::sqrt(std::max(w.lo, 1.0) * w.hi);  // geometric midpoint
      analysis::StretchScanOptions sopts;
      sopts.k_target = cfg.stretch_k_target;
      sopts.max_intervals = cfg.stretch_intervals;
      sopts.y_samples = cfg.stretch_y_samples;
      const auto recs = analysis::stretch_scan(*exp.kernel, levels[i].geom, t, sopts);
      for (const auto& r : recs) {
        os << levels[i].geom.k << "," << w.name << "," << t << "," << r.a << "," << r.b << ","
           << r.y << "," << r.m << "," << r.inf_d1 << "," << r.sup_d2 << ","
           << (r.criterion ? r.criterion->epsilon : -1.0) << ","
           << (r.criterion ? r.criterion->K : -1.0) << "," << r.report.epsilon << ","
           << r.report.K << "," << (r.criterion_pass ? 1 : 0) << ","
           << (r.definition_pass ? 1 : 0) << "\n";
      }
    }
  }
  return os.str();
}

std::string staircase_csv(const Experiment& exp, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "level,m,i1,i2,j,deviation,reference,ratio\n";
  for (const auto& lf : exp.spec.levels()) {
    const auto& g = lf.geom;
    const long long i_hi = (g.n - 4) * g.r / g.n;
    if (i_hi < 1) continue;
    const towers::TowerGeometry tower(exp.pair, g.k);
    const long long m_cap = std::max<long long>(
        1, static_cast<long long>(2.0 * static_cast<double>(g.b) /
                                  (static_cast<double>(g.n) * g.n)));
    for (int s = 0; s < cfg.staircase_samples; ++s) {
      Rng rng(cfg.seed, 0x57A1Cu, static_cast<std::uint64_t>(s));
      const long long i1 = static_cast<long long>(rng.next_double() * i_hi);
      const long long pair_cap = std::max<long long>(1, g.r / 2);
      long long i2 = i1 + 1 +
                     static_cast<long long>(rng.next_double() *
                                            std::min<long long>(pair_cap - 1, i_hi - i1 - 1 >= 0
                                                                                 ? i_hi - i1 - 1
                                                                                 : 0));
      if (i2 > i_hi) i2 = i_hi;
      if (i2 <= i1) continue;
      const long long j = static_cast<long long>(rng.next_double() * (g.q * g.a));
      const long long h1 = j + i1 * g.q * g.a;
      const long long h2 = j + i2 * g.q * g.a;
      if (h2 > tower.spec().h_n) continue;
      const long long m = 1 + static_cast<long long>(rng.next_double() * (m_cap - 1));
      const auto p1 = towers::interior_points(tower.level_rect(h1), 1);
      const auto p2 = towers::interior_points(tower.level_rect(h2), 1);
      const double dev =
          analysis::staircase_deviation(*exp.kernel, g, m, i1, i2, j, p1[0], p2[0]);
      const double ref = static_cast<double>(i2 - i1) * static_cast<double>(m) * g.eps;
      os << g.k << "," << m << "," << i1 << "," << i2 << "," << j << "," << dev << "," << ref
         << "," << (ref > 0 ? dev / ref : 0.0) << "\n";
    }
  }
  return os.str();
}

std::string correlation_csv(const Experiment& exp, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "window,t,estimate,stderr,mu_a,mu_b,samples\n";
  const towers::MBox A = to_box(cfg.box_a);
  const towers::MBox B = to_box(cfg.box_b);
  {
    const auto base = analysis::correlation(*exp.kernel, A, A, 0.0, cfg.correlation_samples,
                                            cfg.seed);
    os << "t0,0," << base.estimate << "," << base.stderr_ << "," << base.mu_a << ","
       << base.mu_b << "," << base.samples << "\n";
  }
  for (const auto& w : experiment_windows(exp)) {
    if (!w.nonempty()) continue;
    for (double t : window_times(w, cfg.times_per_window)) {
      const auto est =
          analysis::correlation(*exp.kernel, A, B, t, cfg.correlation_samples, cfg.seed);
      os << w.name << "," << t << "," << est.estimate << "," << est.stderr_ << "," << est.mu_a
         << "," << est.mu_b << "," << est.samples << "\n";
    }
  }
  return os.str();
}

std::string plot_script() {
  std::ostringstream os;
  os << "# gnuplot script over the specflow CSV outputs\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output 'correlation.png'\n"
     << "set logscale x\n"
     << "plot 'correlation.csv' using 2:3:4 with yerrorlines title 'correlation'\n"
     << "set output 'defect.png'\n"
     << "unset logscale\n"
     << "plot 'tower.csv' using 1:8 with linespoints title 'rank-one defect'\n";
  return os.str();
}

std::string summary_text(const Experiment& exp, const ExperimentConfig& cfg,
                         const std::string& out_dir) {
  (void)cfg;
  std::ostringstream os;
  os.precision(17);
  os << "specflow full-report summary\n";
  os << "pair: " << exp.law.describe() << ", levels = " << exp.pair.levels.size() << "\n";
  os << "conditions hold from level " << exp.report.first_all_pass_level << "\n";
  os << "phi0 = " << exp.spec.phi0() << ", staircase_scale = " << exp.spec.staircase_scale()
     << "\n";
  os << "min phi = " << exp.spec.min_value() << ", max phi = " << exp.spec.max_value() << "\n";
  for (const auto& lf : exp.spec.levels()) {
    os << "level " << lf.geom.k << ": n=" << lf.geom.n << " q=" << lf.geom.q
       << " a=" << lf.geom.a << " b=" << lf.geom.b << " r=" << lf.geom.r << " h=" << lf.geom.h
       << " eps=" << lf.geom.eps << " |X|=" << lf.x_terms << " |Y|=" << lf.y_terms << "\n";
  }
  os << "outputs in " << out_dir << ": pair.txt ceiling.txt birkhoff.csv tower.csv "
     << "stretch.csv staircase.csv correlation.csv plot.gp\n";
  return os.str();
}

}  // namespace

std::string run_command(const std::string& command, const ExperimentConfig& cfg,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  write_file(path("resolved_config.txt"), cfg.serialize());

  if (command == "plot-script") {
    write_file(path("plot.gp"), plot_script());
    return "wrote plot.gp\n";
  }

  Experiment exp = build_experiment(cfg);
  std::ostringstream status;

  const bool all = command == "full-report";
  if (all || command == "build-pair") {
    write_file(path("pair.txt"), pair_document(exp));
    status << "pair: levels=" << exp.pair.levels.size()
           << " pass=" << (exp.report.pass ? "yes" : "no") << "\n";
    if (!all && command == "build-pair") return status.str();
  }
  if (all || command == "build-ceiling") {
    write_file(path("ceiling.txt"), exp.spec.serialize());
    status << "ceiling: phi0=" << exp.spec.phi0() << " min=" << exp.spec.min_value() << "\n";
    if (!all && command == "build-ceiling") return status.str();
  }
  if (all || command == "birkhoff") {
    write_file(path("birkhoff.csv"), birkhoff_csv(exp));
    status << "birkhoff: wrote birkhoff.csv\n";
    if (!all && command == "birkhoff") return status.str();
  }
  if (all || command == "tower-report") {
    write_file(path("tower.csv"), tower_csv(exp, cfg));
    status << "tower: wrote tower.csv\n";
    if (!all && command == "tower-report") return status.str();
  }
  if (all || command == "stretch-scan") {
    write_file(path("stretch.csv"), stretch_csv(exp, cfg));
    status << "stretch: wrote stretch.csv\n";
    if (!all && command == "stretch-scan") return status.str();
  }
  if (all || command == "staircase") {
    write_file(path("staircase.csv"), staircase_csv(exp, cfg));
    status << "staircase: wrote staircase.csv\n";
    if (!all && command == "staircase") return status.str();
  }
  if (all || command == "correlation") {
    write_file(path("correlation.csv"), correlation_csv(exp, cfg));
    status << "correlation: wrote correlation.csv\n";
    if (!all && command == "correlation") return status.str();
  }
  if (all) {
    write_file(path("plot.gp"), plot_script());
    write_file(path("summary.txt"), summary_text(exp, cfg, out_dir));
    status << "full-report: wrote summary.txt\n";
    return status.str();
  }
  throw ConfigError("unknown command: " + command);
}

}  // namespace specflow::cli
