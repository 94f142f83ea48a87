#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "euc/decision.hpp"
#include "euc/embedding.hpp"
#include "euc/eval.hpp"
#include "euc/footprint.hpp"
#include "euc/ingest.hpp"
#include "euc/normalize.hpp"
#include "euc/serialize.hpp"

namespace euc {

// Effective settings for one run. Defaults < config file < CLI flags; the
// CLI layer applies its own overrides after the config file loads.
struct RunConfig {
  InputFormat format = InputFormat::canonical;
  std::string parser;        // type-map vocabulary; empty -> format name
  std::string typemap_path;  // extra label->role mappings, merged over defaults
  std::string rules_path;    // decision-rule chain JSON; empty -> default chain
  ConstructionParams params;
  ProviderKind provider = ProviderKind::hash_ngram;
  int dimension = 64;
  std::string protocol = "strict";  // strict|fair
  std::optional<int> order_distance;  // explicit override of the protocol
  std::vector<int> ks = {1, 2, 3, 5};
  std::string chunks = "both";  // element|eu|both
  std::string output_dir = ".";
  int jobs = 1;
  bool validate = false;
  bool strict_invariants = false;

  std::string parser_name() const;
  int evidence_distance() const;  // strict -> 3, fair -> 4, or the override
  void check() const;
};

// Merges a config object over `cfg`. Unknown keys are schema errors.
void apply_config_json(RunConfig& cfg, const Json& j, const std::string& ctx);
void apply_config_file(RunConfig& cfg, const std::string& path);

// "name=format:path" for raw inputs; "name=path" keeps `default_format`.
struct TrackSpec {
  std::string name;
  InputFormat format = InputFormat::canonical;
  std::string path;
};
TrackSpec parse_track_spec(const std::string& spec, InputFormat default_format,
                           bool allow_format);

// Library entry points shared by the subcommands.
std::vector<NormalizedPage> run_normalize(const std::string& input,
                                          const RunConfig& cfg);
std::vector<EuPage> run_build(std::vector<NormalizedPage>& pages,
                              const RunConfig& cfg, int* violations);

// Subcommand bodies. They throw SchemaError (exit 2 in the CLI) on bad
// input and return 3 when --strict-invariants saw violations, else 0.
int cmd_normalize(const std::string& input, const std::string& output,
                  const RunConfig& cfg, std::ostream& log);
int cmd_build(const std::string& roles_file, const std::string& output,
              const RunConfig& cfg, std::ostream& log);
int cmd_validate(const std::string& eus_file, const std::string& elements_file,
                 const std::string& output, const RunConfig& cfg,
                 std::ostream& log);
int cmd_footprint(const std::vector<std::string>& track_specs,
                  const RunConfig& cfg, std::ostream& log);
int cmd_eval(const std::string& elements_file, const std::string& qas_file,
             const std::string& eus_file, const RunConfig& cfg,
             std::ostream& log);
int cmd_export_graph(const std::string& output, const RunConfig& cfg,
                     std::ostream& log);
int cmd_run_all(const std::vector<std::string>& track_specs,
                const RunConfig& cfg, std::ostream& log);

}  // namespace euc
