#include "specflow/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "specflow/errors.hpp"

namespace specflow::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto take = [&](const char* key) -> std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto as_long = [](const std::string& s, const char* key) -> long long {
    try {
      return std::stoll(s);
    } catch (...) {
      throw ConfigError(std::string("bad integer for ") + key + ": " + s);
    }
  };
  auto as_double = [](const std::string& s, const char* key) -> double {
    try {
      return std::stod(s);
    } catch (...) {
      throw ConfigError(std::string("bad number for ") + key + ": " + s);
    }
  };

  if (auto* v = take("pair.law")) cfg.law = *v;
  if (auto* v = take("pair.power_k")) cfg.power_k = as_double(*v, "pair.power_k");
  if (auto* v = take("pair.power_c")) cfg.power_c = *v;
  if (auto* v = take("pair.floors")) cfg.floors = split_list(*v);
  if (auto* v = take("pair.levels")) cfg.levels = static_cast<int>(as_long(*v, "pair.levels"));
  if (auto* v = take("pair.n_first")) cfg.n_first = static_cast<int>(as_long(*v, "pair.n_first"));
  if (auto* v = take("pair.alpha_seed")) {
    cfg.alpha_seed.clear();
    for (const auto& s : split_list(*v)) cfg.alpha_seed.push_back(static_cast<long>(as_long(s, "pair.alpha_seed")));
  }
  if (auto* v = take("pair.alpha_prime_seed")) {
    cfg.alpha_prime_seed.clear();
    for (const auto& s : split_list(*v)) {
      cfg.alpha_prime_seed.push_back(static_cast<long>(as_long(s, "pair.alpha_prime_seed")));
    }
  }
  if (auto* v = take("pair.budget")) cfg.budget = *v;
  if (auto* v = take("pair.closure_factor")) {
    cfg.closure_factor = static_cast<int>(as_long(*v, "pair.closure_factor"));
  }
  if (auto* v = take("precision.bits")) cfg.precision_bits = static_cast<int>(as_long(*v, "precision.bits"));
  if (auto* v = take("precision.max_iterate")) cfg.max_iterate = as_long(*v, "precision.max_iterate");
  if (auto* v = take("ceiling.staircase_scale")) {
    cfg.staircase_scale = (*v == "auto") ? 0.0 : as_double(*v, "ceiling.staircase_scale");
  }
  if (auto* v = take("ceiling.target_mass")) cfg.target_mass = as_double(*v, "ceiling.target_mass");
  if (auto* v = take("ceiling.grid_exponent")) {
    cfg.grid_exponent = static_cast<int>(as_long(*v, "ceiling.grid_exponent"));
  }
  if (auto* v = take("ceiling.radius")) {
    cfg.radius.clear();
    for (const auto& s : split_list(*v)) cfg.radius.push_back(as_long(s, "ceiling.radius"));
  }
  if (auto* v = take("ceiling.rel_threshold")) cfg.rel_threshold = as_double(*v, "ceiling.rel_threshold");
  if (auto* v = take("ceiling.weighted_rel_threshold")) {
    cfg.weighted_rel_threshold = as_double(*v, "ceiling.weighted_rel_threshold");
  }
  if (auto* v = take("ceiling.weight_cap")) cfg.weight_cap = as_double(*v, "ceiling.weight_cap");
  if (auto* v = take("ceiling.positivity_grid_exponent")) {
    cfg.positivity_grid_exponent = static_cast<int>(as_long(*v, "ceiling.positivity_grid_exponent"));
  }
  if (auto* v = take("analysis.seed")) cfg.seed = static_cast<std::uint64_t>(as_long(*v, "analysis.seed"));
  if (auto* v = take("analysis.correlation_samples")) {
    cfg.correlation_samples = static_cast<std::size_t>(as_long(*v, "analysis.correlation_samples"));
  }
  if (auto* v = take("analysis.times_per_window")) {
    cfg.times_per_window = static_cast<int>(as_long(*v, "analysis.times_per_window"));
  }
  if (auto* v = take("analysis.defect_grid")) cfg.defect_grid = static_cast<int>(as_long(*v, "analysis.defect_grid"));
  if (auto* v = take("analysis.defect_m_cap")) cfg.defect_m_cap = as_long(*v, "analysis.defect_m_cap");
  if (auto* v = take("analysis.stretch_k_target")) cfg.stretch_k_target = as_double(*v, "analysis.stretch_k_target");
  if (auto* v = take("analysis.stretch_intervals")) {
    cfg.stretch_intervals = static_cast<int>(as_long(*v, "analysis.stretch_intervals"));
  }
  if (auto* v = take("analysis.stretch_y_samples")) {
    cfg.stretch_y_samples = static_cast<int>(as_long(*v, "analysis.stretch_y_samples"));
  }
  if (auto* v = take("analysis.staircase_samples")) {
    cfg.staircase_samples = static_cast<int>(as_long(*v, "analysis.staircase_samples"));
  }
  auto parse_box = [&](const char* key, std::vector<double>& dst) {
    if (auto* v = take(key)) {
      auto items = split_list(*v);
      if (items.size() != 6) throw ConfigError(std::string(key) + " needs 6 numbers");
      dst.clear();
      for (const auto& s : items) dst.push_back(as_double(s, key));
    }
  };
  parse_box("analysis.box_a", cfg.box_a);
  parse_box("analysis.box_b", cfg.box_b);
  if (auto* v = take("threads")) cfg.threads = static_cast<int>(as_long(*v, "threads"));

  if (cfg.levels < 0) throw ConfigError("pair.levels must be >= 0");
  if (cfg.law != "power" && cfg.law != "paper-exponential" && cfg.law != "explicit") {
    throw ConfigError("pair.law must be power | paper-exponential | explicit");
  }
  return cfg;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "pair.law = " << law << "\n";
  os << "pair.power_k = " << power_k << "\n";
  os << "pair.power_c = " << power_c << "\n";
  os << "pair.floors = " << join(floors) << "\n";
  os << "pair.levels = " << levels << "\n";
  os << "pair.n_first = " << n_first << "\n";
  os << "pair.alpha_seed = " << join(alpha_seed) << "\n";
  os << "pair.alpha_prime_seed = " << join(alpha_prime_seed) << "\n";
  os << "pair.budget = " << budget << "\n";
  os << "pair.closure_factor = " << closure_factor << "\n";
  os << "precision.bits = " << precision_bits << "\n";
  os << "precision.max_iterate = " << max_iterate << "\n";
  os << "ceiling.staircase_scale = ";
  if (staircase_scale <= 0.0) {
    os << "auto\n";
  } else {
    os << staircase_scale << "\n";
  }
  os << "ceiling.target_mass = " << target_mass << "\n";
  os << "ceiling.grid_exponent = " << grid_exponent << "\n";
  os << "ceiling.radius = " << join(radius) << "\n";
  os << "ceiling.rel_threshold = " << rel_threshold << "\n";
  os << "ceiling.weighted_rel_threshold = " << weighted_rel_threshold << "\n";
  os << "ceiling.weight_cap = " << weight_cap << "\n";
  os << "ceiling.positivity_grid_exponent = " << positivity_grid_exponent << "\n";
  os << "analysis.seed = " << seed << "\n";
  os << "analysis.correlation_samples = " << correlation_samples << "\n";
  os << "analysis.times_per_window = " << times_per_window << "\n";
  os << "analysis.defect_grid = " << defect_grid << "\n";
  os << "analysis.defect_m_cap = " << defect_m_cap << "\n";
  os << "analysis.stretch_k_target = " << stretch_k_target << "\n";
  os << "analysis.stretch_intervals = " << stretch_intervals << "\n";
  os << "analysis.stretch_y_samples = " << stretch_y_samples << "\n";
  os << "analysis.staircase_samples = " << staircase_samples << "\n";
  os << "analysis.box_a = " << join(box_a) << "\n";
  os << "analysis.box_b = " << join(box_b) << "\n";
  os << "threads = " << threads << "\n";
  return os.str();
}

pairgen::GrowthLaw ExperimentConfig::growth_law() const {
  if (law == "power") {
    return pairgen::GrowthLaw::power(power_k, mpz_class(power_c));
  }
  if (law == "paper-exponential") {
    return pairgen::GrowthLaw::paper_exponential();
  }
  std::vector<mpz_class> fl;
  for (const auto& f : floors) fl.emplace_back(f);
  return pairgen::GrowthLaw::explicit_floors(std::move(fl));
}

pairgen::PairSeed ExperimentConfig::pair_seed() const {
  pairgen::PairSeed seed_;
  seed_.alpha_quotients.clear();
  for (long v : alpha_seed) seed_.alpha_quotients.emplace_back(v);
  seed_.alpha_prime_quotients.clear();
  for (long v : alpha_prime_seed) seed_.alpha_prime_quotients.emplace_back(v);
  return seed_;
}

pairgen::BuildOptions ExperimentConfig::build_options() const {
  pairgen::BuildOptions opts;
  opts.n_first = n_first;
  if (budget != "default" && budget != "auto") opts.budget = mpz_class(budget);
  opts.closure_factor = closure_factor;
  opts.precision_bits = precision_bits;
  return opts;
}

}  // namespace specflow::cli
