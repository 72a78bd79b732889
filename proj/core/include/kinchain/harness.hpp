#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kinchain/model.hpp"

namespace kinchain::harness {

/// Flat sectioned key=value configuration (one nesting level only).
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_num(const std::string& section, const std::string& key,
                 double fallback) const;
  std::vector<double> get_list(const std::string& section,
                               const std::string& key,
                               const std::vector<double>& fallback) const;
  void set(const std::string& section, const std::string& key,
           const std::string& value);

  std::string dump() const;
  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class Preset { Quick, Paper };

struct RunConfig {
  std::string kind;  // constants | charfn | rates | kinetic-solve | semigroup
                     // | lattice-sim | verify-all
  Preset preset = Preset::Quick;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_dir = "out";
  Config raw;

  model::DispersionModel make_model() const;
  /// Validates ranges; throws with the offending field name.
  void validate() const;
};

RunConfig parse_run_config(const Config& cfg, const std::string& kind_override,
                           const std::string& preset_override,
                           std::uint64_t seed_override, bool seed_given,
                           const std::string& out_override);

struct CheckResult {
  std::string id;          // e.g. "5c"
  std::string theorem;     // thm-main1, prop1, prop1a, main-1, main-5, main,
                           // L1-bounds, r-beta, conservation
  std::string description;
  std::string status;      // pass | fail | unidentifiable
  double measured = 0.0;
  double tolerance = 0.0;
  std::string details;
};

struct RunRecord {
  std::string kind;
  std::string code_version;
  double wall_seconds = 0.0;
  std::vector<CheckResult> checks;
  std::vector<std::string> outputs;
  std::string config_dump;

  bool any_fail() const;
  std::string to_json() const;
};

/// Dispatch an experiment; writes CSV/JSON artifacts under out_dir and the
/// RunRecord JSON. Identical (config, seed, code version) gives bit-identical
/// CSV outputs.
RunRecord run(const RunConfig& config);

/// Human-readable table of theorem-keyed checks across records.
std::string emit_report(const std::vector<RunRecord>& records);

std::string code_version();

}  // namespace kinchain::harness
