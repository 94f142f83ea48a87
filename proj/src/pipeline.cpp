#include "euc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "euc/build.hpp"
#include "euc/eu_ops.hpp"

namespace euc {

namespace {

namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string joined_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// Deterministic parallel map over page indices: results land in
// pre-allocated slots, so the worker count never changes the output.
template <typename Fn>
void parallel_pages(size_t n, int jobs, Fn&& fn) {
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(n == 0 ? 1 : n)));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

DecisionChain chain_for(const RunConfig& cfg) {
  if (cfg.rules_path.empty()) return default_rule_chain(cfg.params);
  return load_rules_json(cfg.rules_path);
}

void append_validation_trace(std::vector<TraceEntry>& trace,
                             const ValidationReport& report) {
  for (const I1Verdict& v : report.i1) {
    TraceEntry t;
    t.phase = "D2_RESTORATION";
    t.rule_id = "D2_010";
    t.subject = v.eu_id;
    t.object = v.attached_element;
    t.outcome = v.outcome == I1Outcome::passed    ? "passed"
                : v.outcome == I1Outcome::repaired ? "repaired"
                                                   : "demoted";
    trace.push_back(std::move(t));
  }
  for (const I2Verdict& v : report.i2) {
    if (v.outcome == I2Outcome::not_applicable) continue;
    TraceEntry t;
    t.phase = "D2_RESTORATION";
    t.rule_id = "D2_020";
    t.subject = v.eu_id;
    t.object = v.split_eu_id;
    t.metric = v.ratio;
    t.outcome = v.outcome == I2Outcome::passed ? "passed" : "split";
    trace.push_back(std::move(t));
  }
}

std::string format_metric(std::optional<double> v) {
  if (!v) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << *v;
  return out.str();
}

void print_delta_table(const EvalReport& base, const EvalReport& eu,
                       std::ostream& log) {
  struct Row {
    std::string name;
    std::optional<double> a, b;
  };
  std::vector<Row> rows;
  rows.push_back({"Avg LCS", base.avg_lcs, eu.avg_lcs});
  for (size_t i = 0; i < base.ks.size(); ++i) {
    std::optional<double> b;
    for (size_t j = 0; j < eu.ks.size(); ++j)
      if (eu.ks[j] == base.ks[i]) b = eu.recall_at[j];
    rows.push_back(
        {"Recall@" + std::to_string(base.ks[i]), base.recall_at[i], b});
  }
  rows.push_back({"MinK", base.min_k, eu.min_k});
  rows.push_back({"AvgChars", base.avg_chars, eu.avg_chars});

  log << std::left << std::setw(12) << "Metric" << std::right << std::setw(12)
      << "w/o EU" << std::setw(12) << "w/ EU" << std::setw(12) << "delta"
      << '\n';
  for (const Row& row : rows) {
    log << std::left << std::setw(12) << row.name << std::right
        << std::setw(12) << format_metric(row.a) << std::setw(12)
        << format_metric(row.b);
    if (row.a && row.b) {
      std::ostringstream d;
      d << std::showpos << std::fixed << std::setprecision(4) << (*row.b - *row.a);
      log << std::setw(12) << d.str();
    } else {
      log << std::setw(12) << "-";
    }
    log << '\n';
  }
}

}  // namespace

std::string RunConfig::parser_name() const {
  if (!parser.empty()) return parser;
  return std::string(to_string(format));
}

int RunConfig::evidence_distance() const {
  if (order_distance) return *order_distance;
  return protocol == "fair" ? 4 : 3;
}

void RunConfig::check() const {
  params.validate();
  if (protocol != "strict" && protocol != "fair")
    throw SchemaError("config: protocol must be 'strict' or 'fair', got '" +
                      protocol + "'");
  if (chunks != "element" && chunks != "eu" && chunks != "both")
    throw SchemaError("config: chunks must be element, eu, or both, got '" +
                      chunks + "'");
  if (order_distance && *order_distance < 1)
    throw SchemaError("config: order_distance must be >= 1");
  if (dimension < 1) throw SchemaError("config: dimension must be >= 1");
  if (jobs < 1) throw SchemaError("config: jobs must be >= 1");
  if (ks.empty()) throw SchemaError("config: ks must not be empty");
  for (int k : ks)
    if (k < 1) throw SchemaError("config: ks must be positive");
}

void apply_config_json(RunConfig& cfg, const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw SchemaError(ctx + ": config must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "format") {
        cfg.format = input_format_from_string(value.get<std::string>());
      } else if (key == "parser") {
        cfg.parser = value.get<std::string>();
      } else if (key == "typemap") {
        cfg.typemap_path = value.get<std::string>();
      } else if (key == "rules") {
        cfg.rules_path = value.get<std::string>();
      } else if (key == "params") {
        if (!value.is_object())
          throw SchemaError("params must be an object of name -> number");
        for (const auto& [pname, pval] : value.items())
          cfg.params.set(pname, pval.get<double>());
      } else if (key == "embedding") {
        if (!value.is_object())
          throw SchemaError("embedding must be an object");
        for (const auto& [ename, eval_] : value.items()) {
          if (ename == "provider")
            cfg.provider = provider_kind_from_string(eval_.get<std::string>());
          else if (ename == "dimension")
            cfg.dimension = eval_.get<int>();
          else
            throw SchemaError("unknown embedding key '" + ename + "'");
        }
      } else if (key == "protocol") {
        cfg.protocol = value.get<std::string>();
      } else if (key == "order_distance") {
        cfg.order_distance = value.get<int>();
      } else if (key == "ks") {
        cfg.ks = value.get<std::vector<int>>();
      } else if (key == "chunks") {
        cfg.chunks = value.get<std::string>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "jobs") {
        cfg.jobs = value.get<int>();
      } else if (key == "validate") {
        cfg.validate = value.get<bool>();
      } else if (key == "strict_invariants") {
        cfg.strict_invariants = value.get<bool>();
      } else {
        throw SchemaError("unknown config key '" + key + "'");
      }
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaError(ctx + ": key '" + key + "': " + e.what());
    }
  }
  cfg.check();
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  apply_config_json(cfg, read_json_file(path), path);
}

TrackSpec parse_track_spec(const std::string& spec, InputFormat default_format,
                           bool allow_format) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
    throw SchemaError("track spec '" + spec + "' must look like name=path" +
                      std::string(allow_format ? " or name=format:path" : ""));
  TrackSpec track;
  track.name = spec.substr(0, eq);
  track.format = default_format;
  std::string rest = spec.substr(eq + 1);
  if (allow_format) {
    const size_t colon = rest.find(':');
    if (colon != std::string::npos) {
      track.format = input_format_from_string(rest.substr(0, colon));
      rest = rest.substr(colon + 1);
      if (rest.empty())
        throw SchemaError("track spec '" + spec + "' has an empty path");
    }
  }
  track.path = rest;
  return track;
}

std::vector<NormalizedPage> run_normalize(const std::string& input,
                                          const RunConfig& cfg) {
  const std::vector<RawPage> raw = load_input(input, cfg.format);
  const NonContentConfig non_content;
  std::vector<std::vector<LayoutElement>> per_page =
      normalize_pages(raw, non_content);

  TypeMap typemap = TypeMap::defaults();
  if (!cfg.typemap_path.empty()) typemap.merge_json_file(cfg.typemap_path);
  const Embeddings embeddings(cfg.provider, cfg.dimension);
  const RoleAnchors anchors = RoleAnchors::build(embeddings, cfg.params);
  const std::string parser = cfg.parser_name();

  std::vector<NormalizedPage> pages(raw.size());
  parallel_pages(raw.size(), cfg.jobs, [&](size_t i) {
    normalize_roles(per_page[i], parser, typemap, anchors, embeddings,
                    cfg.params);
    pages[i].page_id = raw[i].page_id;
    pages[i].width_px = raw[i].width_px;
    pages[i].height_px = raw[i].height_px;
    pages[i].elements = std::move(per_page[i]);
  });
  std::sort(pages.begin(), pages.end(),
            [](const NormalizedPage& a, const NormalizedPage& b) {
              return a.page_id < b.page_id;
            });
  for (size_t i = 1; i < pages.size(); ++i)
    if (pages[i].page_id == pages[i - 1].page_id)
      throw SchemaError(input + ": duplicate page_id '" + pages[i].page_id +
                        "'");
  return pages;
}

std::vector<EuPage> run_build(std::vector<NormalizedPage>& pages,
                              const RunConfig& cfg, int* violations) {
  const DecisionChain chain = chain_for(cfg);
  const Embeddings embeddings(cfg.provider, cfg.dimension);
  std::vector<EuPage> eu_pages(pages.size());
  std::vector<int> page_violations(pages.size(), 0);
  parallel_pages(pages.size(), cfg.jobs, [&](size_t i) {
    BuildResult result =
        build_eus(pages[i].elements, cfg.params, embeddings, chain);
    if (cfg.validate) {
      ValidationReport report = run_validation(result.eus, pages[i].elements,
                                               cfg.params, chain);
      append_validation_trace(result.trace, report);
      page_violations[i] = report.violations;
    }
    eu_pages[i].page_id = pages[i].page_id;
    eu_pages[i].eus = std::move(result.eus);
    eu_pages[i].trace = std::move(result.trace);
  });
  std::sort(eu_pages.begin(), eu_pages.end(),
            [](const EuPage& a, const EuPage& b) {
              return a.page_id < b.page_id;
            });
  if (violations) {
    *violations = 0;
    for (int v : page_violations) *violations += v;
  }
  return eu_pages;
}

int cmd_normalize(const std::string& input, const std::string& output,
                  const RunConfig& cfg, std::ostream& log) {
  cfg.check();
  const std::vector<NormalizedPage> pages = run_normalize(input, cfg);
  const std::string out_path =
      output.empty() ? joined_path(cfg.output_dir, "normalized.json") : output;
  ensure_parent_dir(out_path);
  write_json_file(out_path, elements_to_json(pages));
  size_t n_elements = 0;
  for (const NormalizedPage& p : pages) n_elements += p.elements.size();
  log << "normalized " << pages.size() << " page(s), " << n_elements
      << " element(s) -> " << out_path << '\n';
  return 0;
}

int cmd_build(const std::string& roles_file, const std::string& output,
              const RunConfig& cfg, std::ostream& log) {
  cfg.check();
  std::vector<NormalizedPage> pages = read_elements_file(roles_file);
  int violations = 0;
  const std::vector<EuPage> eu_pages = run_build(pages, cfg, &violations);
  const std::string out_path =
      output.empty() ? joined_path(cfg.output_dir, "eus.json") : output;
  ensure_parent_dir(out_path);
  write_json_file(out_path, eus_to_json(eu_pages));
  size_t n_eus = 0;
  for (const EuPage& p : eu_pages) n_eus += p.eus.size();
  log << "built " << n_eus << " EU(s) over " << eu_pages.size()
      << " page(s) -> " << out_path << '\n';
  if (cfg.validate && violations > 0) {
    log << "invariant violations corrected: " << violations << '\n';
    if (cfg.strict_invariants) return 3;
  }
  return 0;
}

int cmd_validate(const std::string& eus_file, const std::string& elements_file,
                 const std::string& output, const RunConfig& cfg,
                 std::ostream& log) {
  cfg.check();
  std::vector<EuPage> eu_pages = eus_from_json(read_json_file(eus_file),
                                               eus_file);
  std::vector<NormalizedPage> element_pages = read_elements_file(elements_file);
  std::map<std::string, NormalizedPage*> by_page;
  for (NormalizedPage& p : element_pages) by_page[p.page_id] = &p;

  const DecisionChain chain = chain_for(cfg);
  int violations = 0;
  for (EuPage& page : eu_pages) {
    auto it = by_page.find(page.page_id);
    if (it == by_page.end())
      throw SchemaError(eus_file + ": page '" + page.page_id +
                        "' missing from " + elements_file);
    ValidationReport report = run_validation(page.eus, it->second->elements,
                                             cfg.params, chain);
    append_validation_trace(page.trace, report);
    violations += report.violations;
    if (!report.partition_ok || !report.containment_ok)
      throw SchemaError(eus_file + ": page '" + page.page_id +
                        "' failed the final completeness sweep");
  }
  const std::string out_path =
      output.empty() ? joined_path(cfg.output_dir, "eus_validated.json")
                     : output;
  ensure_parent_dir(out_path);
  write_json_file(out_path, eus_to_json(eu_pages));
  log << "validated " << eu_pages.size() << " page(s), " << violations
      << " violation(s) corrected -> " << out_path << '\n';
  if (violations > 0 && cfg.strict_invariants) return 3;
  return 0;
}

int cmd_footprint(const std::vector<std::string>& track_specs,
                  const RunConfig& cfg, std::ostream& log) {
  cfg.check();
  if (track_specs.size() < 2)
    throw SchemaError("footprint: needs at least two --tracks name=path specs");
  std::vector<TrackResult> tracks;
  for (const std::string& spec : track_specs) {
    const TrackSpec parsed = parse_track_spec(spec, cfg.format, false);
    tracks.push_back(load_track(parsed.name, parsed.path));
  }
  const ConvergenceReport report = convergence_report(tracks);
  const std::string json_path = joined_path(cfg.output_dir, "convergence.json");
  const std::string csv_path = joined_path(cfg.output_dir, "convergence.csv");
  ensure_parent_dir(json_path);
  write_json_file(json_path, convergence_to_json(report));
  write_text_file(csv_path, convergence_to_csv(report));
  log << "compared " << tracks.size() << " track(s) -> " << json_path
      << ", " << csv_path << '\n';
  for (const PairStats& ps : report.pairs) {
    log << "  " << ps.track_a << " vs " << ps.track_b << ": matched "
        << ps.matched << ", mean IoU " << format_metric(ps.mean_iou)
        << ", exact " << ps.exact << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& elements_file, const std::string& qas_file,
             const std::string& eus_file, const RunConfig& cfg,
             std::ostream& log) {
  cfg.check();
  std::vector<NormalizedPage> pages = read_elements_file(elements_file);
  const Embeddings embeddings(cfg.provider, cfg.dimension);

  std::vector<QAPair> qas;
  if (!qas_file.empty()) {
    qas = qas_from_json(read_json_file(qas_file), qas_file);
  } else {
    qas = generate_qa(pages, cfg.evidence_distance());
    const std::string qa_path = joined_path(cfg.output_dir, "qas.json");
    ensure_parent_dir(qa_path);
    write_json_file(qa_path, qas_to_json(qas));
    log << "generated " << qas.size() << " QA pair(s) -> " << qa_path << '\n';
  }

  const bool want_element = cfg.chunks == "element" || cfg.chunks == "both";
  const bool want_eu = cfg.chunks == "eu" || cfg.chunks == "both";
  std::optional<EvalReport> element_report, eu_report;

  if (want_element) {
    const std::vector<Chunk> chunks = chunks_from_elements(pages, embeddings);
    EvalReport report = evaluate(qas, chunks, embeddings, cfg.ks);
    report.protocol = cfg.protocol;
    report.track = elements_file;
    report.chunking = "element";
    const std::string base = joined_path(cfg.output_dir, "eval_element");
    ensure_parent_dir(base);
    write_json_file(base + ".json", eval_to_json(report));
    write_text_file(base + ".csv", eval_to_csv(report));
    log << "element chunking: " << report.n_chunks << " chunk(s) -> " << base
        << ".json\n";
    element_report = std::move(report);
  }
  if (want_eu) {
    std::vector<EuPage> eu_pages;
    if (!eus_file.empty()) {
      eu_pages = eus_from_json(read_json_file(eus_file), eus_file);
    } else {
      eu_pages = run_build(pages, cfg, nullptr);
    }
    const std::vector<Chunk> chunks =
        chunks_from_eus(eu_pages, pages, embeddings);
    EvalReport report = evaluate(qas, chunks, embeddings, cfg.ks);
    report.protocol = cfg.protocol;
    report.track = elements_file;
    report.chunking = "eu";
    const std::string base = joined_path(cfg.output_dir, "eval_eu");
    ensure_parent_dir(base);
    write_json_file(base + ".json", eval_to_json(report));
    write_text_file(base + ".csv", eval_to_csv(report));
    log << "EU chunking: " << report.n_chunks << " chunk(s) -> " << base
        << ".json\n";
    eu_report = std::move(report);
  }

  if (qas.empty()) log << "no QA pairs generated (empty report marker set)\n";
  if (element_report && eu_report)
    print_delta_table(*element_report, *eu_report, log);
  return 0;
}

int cmd_export_graph(const std::string& output, const RunConfig& cfg,
                     std::ostream& log) {
  cfg.check();
  const DecisionChain chain = chain_for(cfg);
  const std::string out_path =
      output.empty() ? joined_path(cfg.output_dir, "rules.cypher") : output;
  ensure_parent_dir(out_path);
  write_text_file(out_path, export_cypher(chain));
  log << "exported " << chain.rules.size() << " rule(s) -> " << out_path
      << '\n';
  return 0;
}

int cmd_run_all(const std::vector<std::string>& track_specs,
                const RunConfig& cfg, std::ostream& log) {
  cfg.check();
  if (track_specs.empty())
    throw SchemaError("run-all: needs at least one --track name=format:path");

  struct BuiltTrack {
    std::string name;
    std::string eus_path;
    std::vector<NormalizedPage> pages;
    std::vector<EuPage> eu_pages;
  };
  std::vector<BuiltTrack> built;
  int total_violations = 0;
  for (const std::string& spec : track_specs) {
    const TrackSpec parsed = parse_track_spec(spec, cfg.format, true);
    RunConfig track_cfg = cfg;
    track_cfg.format = parsed.format;
    track_cfg.parser = cfg.parser.empty() ? std::string(to_string(parsed.format))
                                          : cfg.parser;
    track_cfg.validate = true;

    BuiltTrack track;
    track.name = parsed.name;
    track.pages = run_normalize(parsed.path, track_cfg);
    const std::string norm_path =
        joined_path(cfg.output_dir, "normalized_" + parsed.name + ".json");
    ensure_parent_dir(norm_path);
    write_json_file(norm_path, elements_to_json(track.pages));

    int violations = 0;
    track.eu_pages = run_build(track.pages, track_cfg, &violations);
    total_violations += violations;
    track.eus_path =
        joined_path(cfg.output_dir, "eus_" + parsed.name + ".json");
    write_json_file(track.eus_path, eus_to_json(track.eu_pages));
    size_t n_eus = 0;
    for (const EuPage& p : track.eu_pages) n_eus += p.eus.size();
    log << "track " << parsed.name << ": " << track.pages.size()
        << " page(s) -> " << n_eus << " EU(s), " << violations
        << " violation(s) corrected\n";
    built.push_back(std::move(track));
  }

  if (built.size() >= 2) {
    std::vector<std::string> specs;
    for (const BuiltTrack& t : built) specs.push_back(t.name + "=" + t.eus_path);
    cmd_footprint(specs, cfg, log);
  }

  cmd_export_graph("", cfg, log);

  RunConfig eval_cfg = cfg;
  eval_cfg.chunks = "both";
  const std::string norm_path =
      joined_path(cfg.output_dir, "normalized_" + built.front().name + ".json");
  const int rc = cmd_eval(norm_path, "", built.front().eus_path, eval_cfg, log);
  if (rc != 0) return rc;

  if (total_violations > 0 && cfg.strict_invariants) return 3;
  return 0;
}

}  // namespace euc
