// txmotif: mine heterogeneous 3-node motifs and anti-motifs from
// transaction tables. Subcommands: run, synth, census, report, catalog.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "txmotif/pipeline.hpp"
#include "txmotif/synth.hpp"

namespace {

using namespace txmotif;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    if (end > pos) out.push_back(text.substr(pos, end - pos));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

std::int64_t parse_time_flag(const std::string& flag, const std::string& text) {
  auto ts = parse_timestamp(text);
  if (!ts) throw ConfigError(flag + ": cannot parse timestamp \"" + text + "\"");
  return *ts;
}

std::int64_t parse_duration_flag(const std::string& flag, const std::string& text) {
  auto d = parse_duration(text);
  if (!d || *d <= 0) throw ConfigError(flag + ": cannot parse duration \"" + text + "\"");
  return *d;
}

void emit_error(const std::string& type, const std::string& message) {
  nlohmann::json j;
  j["error"]["type"] = type;
  j["error"]["message"] = message;
  std::cerr << j.dump() << "\n";
}

int guarded(const std::function<void()>& action) {
  try {
    action();
    return 0;
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const SchemaError& e) {
    emit_error("schema", e.what());
    return 2;
  } catch (const RowError& e) {
    emit_error("row", e.what());
    return 1;
  } catch (const DatasetError& e) {
    emit_error("dataset", e.what());
    return 1;
  } catch (const StructuralError& e) {
    emit_error("structural", e.what());
    return 1;
  } catch (const IoError& e) {
    emit_error("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}

struct GraphFlags {
  std::string input;
  std::string schema_text;
  std::string graph_kind = "transaction";
  std::string lookback = "6h";
  std::string shared_types = "client,merchant";
  std::string entity_types;  // empty = all schema entity columns
  std::string from_text, to_text;
};

void add_graph_flags(CLI::App* cmd, GraphFlags& f) {
  cmd->add_option("--input", f.input, "input transaction CSV")->required();
  cmd->add_option("--schema", f.schema_text,
                  "column mapping, e.g. \"timestamp=ts,fraud=flag,id=tid,client=cl,card=pan\"; "
                  "unlisted keys name entity columns in order");
  cmd->add_option("--graph", f.graph_kind, "graph kind: entity | transaction")
      ->check(CLI::IsMember({"entity", "transaction"}))
      ->capture_default_str();
  cmd->add_option("--lookback", f.lookback,
                  "transaction-graph lookback window (e.g. 6h, 90m, 3600)")
      ->capture_default_str();
  cmd->add_option("--shared", f.shared_types,
                  "comma-separated entity types linking transactions (transaction graph)")
      ->capture_default_str();
  cmd->add_option("--entity-types", f.entity_types,
                  "comma-separated entity types to keep (entity graph; default: all)");
  cmd->add_option("--from", f.from_text, "keep transactions at or after this instant");
  cmd->add_option("--to", f.to_text, "keep transactions at or before this instant");
}

void apply_graph_flags(const GraphFlags& f, PipelineConfig& cfg) {
  cfg.input_path = f.input;
  cfg.schema = f.schema_text.empty() ? CsvSchema{} : parse_schema(f.schema_text);
  cfg.graph = parse_graph_kind(f.graph_kind);
  cfg.transaction_spec.lookback_seconds = parse_duration_flag("--lookback", f.lookback);
  cfg.transaction_spec.shared_entity_types = split_list(f.shared_types);
  cfg.entity_spec.entity_types_used = split_list(f.entity_types);
  if (!f.from_text.empty()) cfg.from_time = parse_time_flag("--from", f.from_text);
  if (!f.to_text.empty()) cfg.to_time = parse_time_flag("--to", f.to_text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous transaction-motif miner"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI/TOML key=value file (flags win)");
  app.get_config_ptr()->configurable(false);

  std::function<void()> action;

  // ---- run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "full pipeline: ensemble, census, significance");
  auto run_graph = std::make_shared<GraphFlags>();
  add_graph_flags(run, *run_graph);
  auto run_opts = std::make_shared<PipelineConfig>();
  run->add_option("--replicas", run_opts->n_random_networks, "number of random networks")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--rho", run_opts->rho, "swap fraction per entity column")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  run->add_option("--seed", run_opts->seed, "master RNG seed")->capture_default_str();
  run->add_flag("!--no-fraud-shuffle", run_opts->shuffle_fraud,
                "skip the fraud-label shuffle step");
  run->add_option("--motif-ratio-min", run_opts->selection.motif_ratio_min,
                  "minimum f/mu for motifs")
      ->capture_default_str();
  run->add_option("--antimotif-ratio-max", run_opts->selection.antimotif_ratio_max,
                  "maximum f/mu for anti-motifs")
      ->capture_default_str();
  run->add_option("--min-support", run_opts->selection.min_support,
                  "support floor: motifs need f >= s, anti-motifs mu >= s")
      ->capture_default_str();
  run->add_flag("--laplace", run_opts->laplace, "use (f+1)/(mu+1) ratios");
  run->add_option("--out", run_opts->out_dir, "output directory")->capture_default_str();
  run->add_option("--workers", run_opts->workers, "worker threads (0 = processors)")
      ->capture_default_str();
  run->add_option("--top", run_opts->catalog_top_n, "catalog entries per list")
      ->capture_default_str();
  run->callback([run_graph, run_opts, &action] {
    action = [run_graph, run_opts] {
      PipelineConfig cfg = *run_opts;
      apply_graph_flags(*run_graph, cfg);
      const PipelineResult result = run_pipeline(cfg);
      std::cout << "run: " << result.transactions << " transactions, "
                << result.report.classes.size() << " subgraph classes, "
                << result.report.motifs.size() << " motifs, "
                << result.report.anti_motifs.size() << " anti-motifs -> "
                << result.out_dir.string() << "\n";
    };
  });

  // ---- synth --------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic transaction table");
  auto synth_cfg = std::make_shared<SynthConfig>();
  auto synth_out = std::make_shared<std::string>();
  auto synth_span = std::make_shared<std::string>("30d");
  auto synth_start = std::make_shared<std::string>("2023-01-01T00:00:00Z");
  auto synth_patterns = std::make_shared<std::vector<std::string>>();
  synth->add_option("--out", *synth_out, "output CSV path")->required();
  synth->add_option("--transactions,-m", synth_cfg->m, "row count")->capture_default_str();
  synth->add_option("--clients", synth_cfg->n_clients, "distinct clients")->capture_default_str();
  synth->add_option("--cards", synth_cfg->n_cards, "distinct cards")->capture_default_str();
  synth->add_option("--merchants", synth_cfg->n_merchants, "distinct merchants")
      ->capture_default_str();
  synth->add_option("--terminals", synth_cfg->n_terminals, "distinct terminals")
      ->capture_default_str();
  synth->add_option("--fraud-rate", synth_cfg->fraud_rate, "fraction of fraudulent rows")
      ->capture_default_str();
  synth->add_option("--span", *synth_span, "time span covered (duration)")->capture_default_str();
  synth->add_option("--start", *synth_start, "first instant")->capture_default_str();
  synth->add_option("--zipf", synth_cfg->zipf_exponent, "popularity tail exponent")
      ->capture_default_str();
  synth->add_option("--pattern", *synth_patterns,
                    "planted pattern, e.g. "
                    "\"same_client_merchant,count=3,window=6h,instances=12,fraud=1\" (repeatable)");
  synth->add_option("--seed", synth_cfg->seed, "RNG seed")->capture_default_str();
  synth->callback([synth_cfg, synth_out, synth_span, synth_start, synth_patterns, &action] {
    action = [synth_cfg, synth_out, synth_span, synth_start, synth_patterns] {
      SynthConfig cfg = *synth_cfg;
      cfg.time_span_seconds = parse_duration_flag("--span", *synth_span);
      cfg.start_time = parse_time_flag("--start", *synth_start);
      for (const std::string& text : *synth_patterns) cfg.planted.push_back(parse_pattern(text));
      const TabularDataset data = generate(cfg);
      write_transactions(*synth_out, data);
      std::size_t fraud = 0;
      for (const auto& rec : data.records) fraud += rec.is_fraud;
      std::cout << "synth: " << data.size() << " transactions (" << fraud << " fraud) -> "
                << *synth_out << "\n";
    };
  });

  // ---- census -------------------------------------------------------------
  auto* census = app.add_subcommand("census", "size-3 census of a single graph");
  auto census_graph = std::make_shared<GraphFlags>();
  add_graph_flags(census, *census_graph);
  auto census_out = std::make_shared<std::string>(".");
  auto census_graphml = std::make_shared<std::string>();
  auto census_edges = std::make_shared<std::string>();
  census->add_option("--out", *census_out, "output directory")->capture_default_str();
  census->add_option("--graphml", *census_graphml, "also export the graph as GraphML here");
  census->add_option("--edge-list", *census_edges, "also export the labeled edge list here");
  census->callback([census_graph, census_out, census_graphml, census_edges, &action] {
    action = [census_graph, census_out, census_graphml, census_edges] {
      PipelineConfig cfg;
      apply_graph_flags(*census_graph, cfg);
      const TabularDataset raw = load_transactions(cfg.input_path, cfg.schema);
      const TabularDataset data = filter_period(raw, cfg.from_time, cfg.to_time);
      const HeteroGraph g = build_graph(cfg, data);
      const std::filesystem::path dir(*census_out);
      std::filesystem::create_directories(dir);
      nlohmann::json stats;
      stats["config"] = config_json(cfg);
      stats["dataset"] = dataset_stats_json(data);
      stats["graph"] = graph_stats_json(g);
      txmotif::detail::write_text_file(dir / "stats.json", stats.dump(2) + "\n");
      const CensusResult result = census_k3(g, "original");
      {
        std::ofstream out(dir / "census_original.csv", std::ios::binary);
        if (!out) throw IoError("cannot open census_original.csv for writing");
        write_census_csv(out, result, g.node_label_vocab(), g.edge_label_vocab());
      }
      if (!census_graphml->empty()) {
        std::ofstream out(*census_graphml, std::ios::binary);
        if (!out) throw IoError("cannot open " + *census_graphml + " for writing");
        g.write_graphml(out);
      }
      if (!census_edges->empty()) {
        std::ofstream out(*census_edges, std::ios::binary);
        if (!out) throw IoError("cannot open " + *census_edges + " for writing");
        g.write_edge_list(out);
      }
      std::cout << "census: " << result.total() << " connected triads in "
                << result.counts.size() << " classes -> " << (dir / "census_original.csv").string()
                << "\n";
    };
  });

  // ---- report -------------------------------------------------------------
  auto* report = app.add_subcommand("report", "recompute significance from stored censuses");
  auto report_dir = std::make_shared<std::string>(".");
  auto report_sel = std::make_shared<SelectionParams>();
  auto report_laplace = std::make_shared<bool>(false);
  auto report_top = std::make_shared<std::size_t>(10);
  report->add_option("--out", *report_dir, "directory holding stats.json and census CSVs")
      ->capture_default_str();
  report->add_option("--motif-ratio-min", report_sel->motif_ratio_min, "minimum f/mu for motifs")
      ->capture_default_str();
  report->add_option("--antimotif-ratio-max", report_sel->antimotif_ratio_max,
                     "maximum f/mu for anti-motifs")
      ->capture_default_str();
  report->add_option("--min-support", report_sel->min_support, "support floor")
      ->capture_default_str();
  report->add_flag("--laplace", *report_laplace, "use (f+1)/(mu+1) ratios");
  report->add_option("--top", *report_top, "catalog entries per list")->capture_default_str();
  report->callback([report_dir, report_sel, report_laplace, report_top, &action] {
    action = [report_dir, report_sel, report_laplace, report_top] {
      const SignificanceReport rep = recompute_report(*report_dir, *report_sel, *report_laplace);
      write_report_files(*report_dir, rep, *report_top);
      std::cout << "report: " << rep.classes.size() << " classes over " << rep.n_replicas
                << " replicas, " << rep.motifs.size() << " motifs, " << rep.anti_motifs.size()
                << " anti-motifs -> " << *report_dir << "\n";
    };
  });

  // ---- catalog ------------------------------------------------------------
  auto* catalog = app.add_subcommand("catalog", "render a stored report as text");
  auto catalog_path = std::make_shared<std::string>("significance.json");
  auto catalog_top = std::make_shared<std::size_t>(10);
  catalog->add_option("--report", *catalog_path, "significance.json path")->capture_default_str();
  catalog->add_option("--top", *catalog_top, "entries per list")->capture_default_str();
  catalog->callback([catalog_path, catalog_top, &action] {
    action = [catalog_path, catalog_top] {
      std::ifstream in(*catalog_path, std::ios::binary);
      if (!in) throw IoError("cannot open " + *catalog_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw IoError(*catalog_path + ": " + std::string(e.what()));
      }
      std::cout << render_motif_catalog(report_from_json(j), *catalog_top);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    emit_error("usage", e.what());
    return 2;
  }
  return guarded(action);
}
