#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loopsoup/io.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct ExperimentConfig {
  std::string suite = "exact-identities";
  std::optional<std::string> generator;  // inline JSON or file path
  std::vector<double> alphas;            // empty selects the suite default
  std::size_t samples = 0;               // 0 selects the suite default
  std::uint64_t seed = 0;
  int threads = 1;
  double z_threshold = 3.0;
  double p_threshold = 0.01;
  std::map<std::string, double> tolerances;  // per-suite overrides, e.g. "identity"
  std::string out_json;
  std::string out_csv;

  static ExperimentConfig from_json(const Json& j);
  void check() const;
  double tolerance(const std::string& key, double fallback) const;
};

struct CheckRecord {
  std::string name;
  std::string formula;  // tag naming the exact quantity
  double exact = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::optional<double> z;
  std::optional<double> p_value;
  std::optional<double> error;  // absolute deviation for deterministic checks
  bool pass = false;
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  std::vector<std::string> notes;
  bool pass = true;
  double runtime_seconds = 0.0;

  /// Runtime is left out unless asked for, so reports for equal (config, seed) are byte-identical.
  Json to_json(bool with_runtime = false) const;
};

std::vector<std::string> suite_names();
VerificationReport run_suite(const ExperimentConfig& cfg);

/// Runs body(i) for i in [0, count) on up to threads workers; results must be written by index.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Chains used by the suites.
Generator two_state_chain();
Generator three_state_chain();
Generator random_transient_generator(Index n, Rng& rng);

}  // namespace loopsoup
