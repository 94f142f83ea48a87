#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "euc/pipeline.hpp"

namespace {

// Raw values captured by CLI11; folded over the config file after parsing
// so the precedence is CLI flag > config file > default.
struct SharedOpts {
  std::string config;
  std::string format;
  std::string parser;
  std::string typemap;
  std::string rules;
  std::string provider;
  int dimension = 0;
  std::string protocol;
  int order_distance = 0;
  std::vector<int> ks;
  std::string chunks;
  std::string output_dir;
  int jobs = 0;
  bool validate = false;
  bool strict_invariants = false;
  std::vector<std::string> sets;

  CLI::Option* config_opt = nullptr;
  CLI::Option* format_opt = nullptr;
  CLI::Option* parser_opt = nullptr;
  CLI::Option* typemap_opt = nullptr;
  CLI::Option* rules_opt = nullptr;
  CLI::Option* provider_opt = nullptr;
  CLI::Option* dimension_opt = nullptr;
  CLI::Option* protocol_opt = nullptr;
  CLI::Option* order_opt = nullptr;
  CLI::Option* ks_opt = nullptr;
  CLI::Option* chunks_opt = nullptr;
  CLI::Option* outdir_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* validate_opt = nullptr;
  CLI::Option* strict_opt = nullptr;
};

void add_shared(CLI::App* cmd, SharedOpts& o) {
  o.config_opt = cmd->add_option("--config", o.config,
                                 "Config file (default: $EU_CONFIG if set)");
  o.format_opt = cmd->add_option(
      "--format", o.format, "Input format: canonical|gt|mineru|docling");
  o.parser_opt = cmd->add_option(
      "--parser", o.parser, "Type-map vocabulary name (default: format name)");
  o.typemap_opt =
      cmd->add_option("--typemap", o.typemap, "Extra label->role mapping file");
  o.rules_opt =
      cmd->add_option("--rules", o.rules, "Decision-rule chain JSON file");
  o.provider_opt = cmd->add_option("--provider", o.provider,
                                   "Embedding provider: hash-ngram|precomputed");
  o.dimension_opt =
      cmd->add_option("--dimension", o.dimension, "Hash embedding dimension");
  o.protocol_opt =
      cmd->add_option("--protocol", o.protocol, "Evaluation protocol: strict|fair");
  o.order_opt = cmd->add_option("--order-distance", o.order_distance,
                                "Evidence reading-order distance override");
  o.ks_opt = cmd->add_option("--ks", o.ks, "Recall@K cutoffs")->delimiter(',');
  o.chunks_opt =
      cmd->add_option("--chunks", o.chunks, "Chunking under eval: element|eu|both");
  o.outdir_opt =
      cmd->add_option("--output-dir", o.output_dir, "Directory for outputs");
  o.jobs_opt = cmd->add_option("--jobs", o.jobs, "Worker threads per run");
  o.validate_opt = cmd->add_flag("--validate", o.validate,
                                 "Run invariant validation after construction");
  o.strict_opt = cmd->add_flag("--strict-invariants", o.strict_invariants,
                               "Exit 3 when validation corrected violations");
  cmd->add_option("--set", o.sets,
                  "Construction parameter override name=value (repeatable)");
}

euc::RunConfig make_config(const SharedOpts& o) {
  euc::RunConfig cfg;
  std::string config_path = o.config;
  if (config_path.empty()) {
    if (const char* env = std::getenv("EU_CONFIG"); env && *env)
      config_path = env;
  }
  if (!config_path.empty()) euc::apply_config_file(cfg, config_path);

  if (o.format_opt->count()) cfg.format = euc::input_format_from_string(o.format);
  if (o.parser_opt->count()) cfg.parser = o.parser;
  if (o.typemap_opt->count()) cfg.typemap_path = o.typemap;
  if (o.rules_opt->count()) cfg.rules_path = o.rules;
  if (o.provider_opt->count())
    cfg.provider = euc::provider_kind_from_string(o.provider);
  if (o.dimension_opt->count()) cfg.dimension = o.dimension;
  if (o.protocol_opt->count()) cfg.protocol = o.protocol;
  if (o.order_opt->count()) cfg.order_distance = o.order_distance;
  if (o.ks_opt->count()) cfg.ks = o.ks;
  if (o.chunks_opt->count()) cfg.chunks = o.chunks;
  if (o.outdir_opt->count()) cfg.output_dir = o.output_dir;
  if (o.jobs_opt->count()) cfg.jobs = o.jobs;
  if (o.validate_opt->count()) cfg.validate = true;
  if (o.strict_opt->count()) cfg.strict_invariants = true;
  for (const std::string& kv : o.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw euc::SchemaError("--set expects name=value, got '" + kv + "'");
    cfg.params.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.check();
  return cfg;
}

std::vector<std::string> split_commas(const std::vector<std::string>& specs) {
  std::vector<std::string> out;
  for (const std::string& spec : specs) {
    size_t start = 0;
    while (start <= spec.size()) {
      const size_t comma = spec.find(',', start);
      const std::string piece =
          spec.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      if (!piece.empty()) out.push_back(piece);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Evidence-unit chunking: normalizes layout-parser output, groups "
      "elements into evidence units, and scores retrieval quality."};
  app.require_subcommand(1);

  struct NormalizeArgs {
    std::string input, output;
    SharedOpts shared;
  } nrm;
  CLI::App* normalize = app.add_subcommand(
      "normalize", "Assign canonical roles to raw parser output");
  normalize->add_option("input", nrm.input, "Raw parser output file")
      ->required();
  normalize->add_option("--output", nrm.output, "Output elements file");
  add_shared(normalize, nrm.shared);

  struct BuildArgs {
    std::string input, output;
    SharedOpts shared;
  } bld;
  CLI::App* build =
      app.add_subcommand("build", "Construct evidence units from roles");
  build->add_option("input", bld.input, "Normalized elements file")->required();
  build->add_option("--output", bld.output, "Output EU file");
  add_shared(build, bld.shared);

  struct ValidateArgs {
    std::string eus, elements, output;
    SharedOpts shared;
  } val;
  CLI::App* validate =
      app.add_subcommand("validate", "Re-run invariant validation on EUs");
  validate->add_option("eus", val.eus, "EU file")->required();
  validate->add_option("elements", val.elements, "Normalized elements file")
      ->required();
  validate->add_option("--output", val.output, "Output EU file");
  add_shared(validate, val.shared);

  struct FootprintArgs {
    std::vector<std::string> tracks;
    SharedOpts shared;
  } fpt;
  CLI::App* footprint = app.add_subcommand(
      "footprint", "Compare EU footprints across parser tracks");
  footprint
      ->add_option("--tracks", fpt.tracks,
                   "Track specs name=eu_file (repeatable or comma separated)")
      ->required();
  add_shared(footprint, fpt.shared);

  struct EvalArgs {
    std::string elements, qas, eus;
    SharedOpts shared;
  } evl;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score element vs EU chunking on generated or given QAs");
  eval_cmd->add_option("elements", evl.elements, "Normalized elements file")
      ->required();
  eval_cmd->add_option("--qas", evl.qas,
                       "QA file (default: generate from the elements)");
  eval_cmd->add_option("--eus", evl.eus,
                       "EU file (default: build in-process)");
  add_shared(eval_cmd, evl.shared);

  struct ExportArgs {
    std::string output;
    SharedOpts shared;
  } exp;
  CLI::App* export_graph = app.add_subcommand(
      "export-graph", "Export the decision-rule chain as Cypher");
  export_graph->add_option("--output", exp.output, "Output .cypher file");
  add_shared(export_graph, exp.shared);

  struct RunAllArgs {
    std::string input;
    std::vector<std::string> tracks;
    SharedOpts shared;
  } all;
  CLI::App* run_all = app.add_subcommand(
      "run-all", "Normalize, build, validate, compare, and evaluate");
  run_all->add_option("input", all.input, "Single raw input file");
  run_all->add_option("--track", all.tracks,
                      "Track spec name=format:path (repeatable)");
  add_shared(run_all, all.shared);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*normalize) {
      const euc::RunConfig cfg = make_config(nrm.shared);
      return euc::cmd_normalize(nrm.input, nrm.output, cfg, std::cout);
    }
    if (*build) {
      const euc::RunConfig cfg = make_config(bld.shared);
      return euc::cmd_build(bld.input, bld.output, cfg, std::cout);
    }
    if (*validate) {
      const euc::RunConfig cfg = make_config(val.shared);
      return euc::cmd_validate(val.eus, val.elements, val.output, cfg,
                               std::cout);
    }
    if (*footprint) {
      const euc::RunConfig cfg = make_config(fpt.shared);
      return euc::cmd_footprint(split_commas(fpt.tracks), cfg, std::cout);
    }
    if (*eval_cmd) {
      const euc::RunConfig cfg = make_config(evl.shared);
      return euc::cmd_eval(evl.elements, evl.qas, evl.eus, cfg, std::cout);
    }
    if (*export_graph) {
      const euc::RunConfig cfg = make_config(exp.shared);
      return euc::cmd_export_graph(exp.output, cfg, std::cout);
    }
    if (*run_all) {
      const euc::RunConfig cfg = make_config(all.shared);
      std::vector<std::string> specs = split_commas(all.tracks);
      if (!all.input.empty())
        specs.insert(specs.begin(),
                     std::string(euc::to_string(cfg.format)) + "=" +
                         std::string(euc::to_string(cfg.format)) + ":" +
                         all.input);
      return euc::cmd_run_all(specs, cfg, std::cout);
    }
  } catch (const euc::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
