#pragma once

#include <memory>
#include <string>

#include "specflow/analysis.hpp"
#include "specflow/birkhoff.hpp"
#include "specflow/ceiling.hpp"
#include "specflow/config.hpp"

namespace specflow::cli {

/// Everything a configured experiment needs, built once and shared.
struct Experiment {
  pairgen::GrowthLaw law;
  pairgen::YPair pair;
  pairgen::PairReport report;
  ceiling::CeilingSpec spec;
  std::unique_ptr<birkhoff::SumKernel> kernel;
};

Experiment build_experiment(const ExperimentConfig& cfg);

// Candidate time windows across all built levels, clamped to the certified
// iterate range.
std::vector<analysis::TimeWindow> experiment_windows(const Experiment& exp);

// Subcommands: build-pair, build-ceiling, birkhoff, tower-report,
// stretch-scan, staircase, correlation, full-report, plot-script.
// Deterministic outputs for a fixed config; returns a short status text.
std::string run_command(const std::string& command, const ExperimentConfig& cfg,
                        const std::string& out_dir);

void write_file(const std::string& path, const std::string& content);

}  // namespace specflow::cli
