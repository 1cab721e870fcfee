#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgldv/samplers.hpp"
#include "sgldv/targets.hpp"

namespace sgldv::cli {

// One INI section: trimmed values and the line each key came from.
struct Section {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> list(const std::string& key) const;
  // Rows separated by ';', entries by ','.
  Matrix matrix(const std::string& key) const;
  // InvalidConfig naming the key and its line.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
};

// Sections [target], [sampler], [experiment].
struct ExperimentConfig {
  std::string source = "<config>";
  Section target;
  Section sampler;
  Section experiment;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// Parses and validates; every error is an InvalidConfig carrying a line number.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Canonical INI text that re-parses to an equal configuration.
std::string to_ini(const ExperimentConfig& cfg);

TargetModel build_target(const ExperimentConfig& cfg);
SamplerKind sampler_kind(const ExperimentConfig& cfg);
double sampler_beta(const ExperimentConfig& cfg);

// Chain settings. R = "auto" resolves to bar_r(eps / (4K)); r = "lemma62" or
// "lemma63" resolves through the projection-radius formulas with the
// experiment's eps (default 0.1).
ChainConfig chain_config(const ExperimentConfig& cfg, const TargetModel& model);

}  // namespace sgldv::cli
