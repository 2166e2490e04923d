#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "txmotif/pipeline.hpp"
#include "txmotif/synth.hpp"

using namespace txmotif;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("pipeline_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Synth a dataset to CSV and return a ready-to-run config pointing at it.
PipelineConfig synth_to_config(const std::string& name, const SynthConfig& synth_cfg) {
  const fs::path dir = fresh_dir(name);
  const fs::path input = dir / "input.csv";
  write_transactions(input.string(), generate(synth_cfg));
  PipelineConfig cfg;
  cfg.input_path = input.string();
  cfg.out_dir = (dir / "out").string();
  return cfg;
}

TabularDataset tiny_dataset() {
  TabularDataset data;
  data.entity_types = {"client", "merchant"};
  for (int i = 0; i < 6; ++i) {
    TransactionRecord rec;
    rec.txn_id = "t" + std::to_string(i);
    rec.timestamp = 100 * i;
    rec.entities = {"C" + std::to_string(i % 2), "M" + std::to_string(i % 3)};
    rec.is_fraud = i == 4;
    data.records.push_back(rec);
  }
  return data;
}

}  // namespace

TEST_CASE("filter_period keeps inclusive bounds and validates them") {
  const TabularDataset data = tiny_dataset();  // timestamps 0,100,...,500
  const TabularDataset mid = filter_period(data, 100, 300);
  REQUIRE(mid.records.size() == 3);
  CHECK(mid.records.front().timestamp == 100);
  CHECK(mid.records.back().timestamp == 300);

  CHECK(filter_period(data, std::nullopt, std::nullopt).records.size() == 6);
  CHECK(filter_period(data, 500, std::nullopt).records.size() == 1);
  CHECK(filter_period(data, std::nullopt, 0).records.size() == 1);
  CHECK(filter_period(data, 501, 1000).records.empty());
  CHECK_THROWS_AS(filter_period(data, 10, 5), ConfigError);
}

TEST_CASE("run_pipeline writes the full report set") {
  SynthConfig synth_cfg;
  synth_cfg.m = 400;
  synth_cfg.seed = 21;
  PipelineConfig cfg = synth_to_config("smoke", synth_cfg);
  cfg.n_random_networks = 2;
  cfg.seed = 42;

  const PipelineResult result = run_pipeline(cfg);
  CHECK(result.transactions == 400);

  const fs::path out(cfg.out_dir);
  for (const char* name :
       {"stats.json", "census_original.csv", "census_replica_0.csv", "census_replica_1.csv",
        "significance.json", "significance.csv", "ratio_evolution.csv", "catalog.txt"}) {
    INFO(name);
    CHECK(fs::exists(out / name));
  }
  CHECK_FALSE(fs::exists(out / "census_replica_2.csv"));

  const nlohmann::json stats = nlohmann::json::parse(slurp(out / "stats.json"));
  CHECK(stats.at("dataset").at("transactions") == 400);
  CHECK(stats.at("config").at("replicas") == 2);
  CHECK(stats.at("config").at("rho") == 0.8);
  CHECK(stats.at("config").at("graph") == "transaction");
  CHECK(stats.at("graph").at("directed") == true);
  CHECK(stats.at("graph").at("nodes") == 400);

  // The written significance.json is the serialized in-memory report.
  const nlohmann::json sig = nlohmann::json::parse(slurp(out / "significance.json"));
  CHECK(sig == report_to_json(result.report));
  CHECK(sig.at("n_replicas") == 2);

  // Replica censuses really differ (beyond their graph_id column).
  std::istringstream r0(slurp(out / "census_replica_0.csv"));
  std::istringstream r1(slurp(out / "census_replica_1.csv"));
  const CensusResult c0 = read_census_csv(r0);
  const CensusResult c1 = read_census_csv(r1);
  CHECK(c0.graph_id == "replica_0");
  CHECK(c1.graph_id == "replica_1");
  CHECK_FALSE(c0.counts == c1.counts);
}

TEST_CASE("run_pipeline rejects a zero-replica configuration") {
  PipelineConfig cfg;
  cfg.input_path = "does-not-matter.csv";
  cfg.n_random_networks = 0;
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
}

TEST_CASE("pipeline output is deterministic and worker-count invariant") {
  SynthConfig synth_cfg;
  synth_cfg.m = 300;
  synth_cfg.seed = 23;

  PipelineConfig a = synth_to_config("det_a", synth_cfg);
  a.n_random_networks = 3;
  a.seed = 7;
  a.workers = 1;
  run_pipeline(a);

  PipelineConfig b = synth_to_config("det_b", synth_cfg);
  b.n_random_networks = 3;
  b.seed = 7;
  b.workers = 3;
  run_pipeline(b);

  for (const char* name :
       {"census_original.csv", "census_replica_0.csv", "census_replica_1.csv",
        "census_replica_2.csv", "significance.json", "significance.csv", "ratio_evolution.csv",
        "catalog.txt"}) {
    INFO(name);
    CHECK(slurp(fs::path(a.out_dir) / name) == slurp(fs::path(b.out_dir) / name));
  }

  // A different pipeline seed changes the ensemble.
  PipelineConfig c = synth_to_config("det_c", synth_cfg);
  c.n_random_networks = 3;
  c.seed = 8;
  run_pipeline(c);
  CHECK_FALSE(slurp(fs::path(a.out_dir) / "census_replica_0.csv") ==
              slurp(fs::path(c.out_dir) / "census_replica_0.csv"));
}

TEST_CASE("time filtering flows through to the built graph") {
  const fs::path dir = fresh_dir("window");
  const fs::path input = dir / "input.csv";
  write_transactions(input.string(), tiny_dataset());

  PipelineConfig cfg;
  cfg.input_path = input.string();
  cfg.out_dir = (dir / "out").string();
  cfg.n_random_networks = 1;
  cfg.from_time = 100;
  cfg.to_time = 400;
  cfg.graph = GraphKind::entity;
  cfg.schema.entity_columns = {{"client", "client"}, {"merchant", "merchant"}};
  const PipelineResult result = run_pipeline(cfg);
  CHECK(result.transactions == 4);
  const nlohmann::json stats = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "stats.json"));
  CHECK(stats.at("dataset").at("transactions") == 4);
  CHECK(stats.at("dataset").at("time_min") == 100);
  CHECK(stats.at("dataset").at("time_max") == 400);
  CHECK(stats.at("config").at("from") == 100);
  CHECK(stats.at("config").at("graph") == "entity");
}

TEST_CASE("recompute_report reproduces the stored report from census files") {
  SynthConfig synth_cfg;
  synth_cfg.m = 250;
  synth_cfg.seed = 29;
  PipelineConfig cfg = synth_to_config("recompute", synth_cfg);
  cfg.n_random_networks = 2;
  const PipelineResult result = run_pipeline(cfg);

  const SignificanceReport again =
      recompute_report(cfg.out_dir, cfg.selection, cfg.laplace);
  CHECK(report_to_json(again) == report_to_json(result.report));

  // Loosened thresholds reclassify without re-running any census.
  SelectionParams loose;
  loose.motif_ratio_min = 1.0001;
  loose.antimotif_ratio_max = 0.9999;
  loose.min_support = 1;
  const SignificanceReport reclassified = recompute_report(cfg.out_dir, loose, false);
  CHECK(reclassified.selection.motif_ratio_min == 1.0001);
  CHECK(reclassified.classes.size() == again.classes.size());
  CHECK(reclassified.motifs.size() + reclassified.anti_motifs.size() >=
        again.motifs.size() + again.anti_motifs.size());

  CHECK_THROWS_AS(recompute_report((fs::path("pipeline_scratch") / "nowhere").string(),
                                   SelectionParams{}, false),
                  IoError);
}

TEST_CASE("catalog rendering matches the documented shape") {
  SignificanceReport report;
  report.directed = false;
  report.n_replicas = 100;
  report.node_labels = {"client", "merchant"};
  report.edge_labels = {"legit", "fraud"};

  TriadPattern p;
  p.directed = false;
  p.node_labels = {0, 0, 1};
  p.slots.fill(0);
  p.slots[TriadPattern::slot_index(0, 1)] = 2;
  p.slots[TriadPattern::slot_index(1, 0)] = 2;
  p.slots[TriadPattern::slot_index(1, 2)] = 1;
  p.slots[TriadPattern::slot_index(2, 1)] = 1;
  const SubgraphClass cls = canonicalize(p);

  ClassStats s;
  s.f_original = 120;
  s.mu = 1.1;
  s.sigma = 0.4;
  s.ratio = 120.0 / 1.1;
  report.classes[cls] = s;
  report.motifs = {cls};

  const std::string text = render_motif_catalog(report, 10);
  CHECK(text.find("heterogeneous subgraph catalog (100 random networks)") == 0);
  CHECK(text.find("motifs (ratio >= 100):") != std::string::npos);
  CHECK(text.find("  1. r=109.09 — 120 / 1.1 ± 0.4") != std::string::npos);
  CHECK(text.find("nodes: 0:client, 1:client, 2:merchant") != std::string::npos);
  CHECK(text.find("-[fraud]-") != std::string::npos);
  CHECK(text.find("-[legit]-") != std::string::npos);
  CHECK(text.find("appears 109.09 times more often than in random networks") !=
        std::string::npos);
  CHECK(text.find("no anti-motifs below threshold") != std::string::npos);

  // An infinite-ratio motif gets the "never" phrasing instead.
  report.classes[cls].ratio_infinite = true;
  report.classes[cls].ratio = std::numeric_limits<double>::infinity();
  const std::string inf_text = render_motif_catalog(report, 10);
  CHECK(inf_text.find("r=inf") != std::string::npos);
  CHECK(inf_text.find("appears 120 times, never in any random network") != std::string::npos);

  report.motifs.clear();
  report.classes.clear();
  const std::string empty_text = render_motif_catalog(report, 10);
  CHECK(empty_text.find("no motifs above threshold") != std::string::npos);
}

TEST_CASE("a planted fraud pattern surfaces as the top motif end to end") {
  SynthConfig synth_cfg;
  synth_cfg.m = 600;
  synth_cfg.seed = 31;
  synth_cfg.fraud_rate = 0.01;
  PlantedPattern p;
  p.kind = PatternKind::same_client_merchant;
  p.txn_count = 3;
  p.window_seconds = 6 * 3600;
  p.instances = 6;
  p.fraud = true;
  synth_cfg.planted = {p};

  PipelineConfig cfg = synth_to_config("planted", synth_cfg);
  cfg.n_random_networks = 20;
  cfg.seed = 3;
  cfg.selection.motif_ratio_min = 10.0;
  cfg.selection.antimotif_ratio_max = 0.01;
  cfg.selection.min_support = 3;

  const PipelineResult result = run_pipeline(cfg);
  REQUIRE_FALSE(result.report.motifs.empty());
  const SubgraphClass top = result.report.motifs.front();
  const TriadPattern decoded = decode_class(top);
  // All three nodes of the leading motif are fraudulent transactions.
  for (int i = 0; i < 3; ++i) {
    CHECK(result.report.node_labels[decoded.node_labels[i]] == "fraud");
  }
  const ClassStats& stats = result.report.classes.at(top);
  CHECK(stats.f_original >= 6);
  CHECK((stats.ratio_infinite || stats.ratio >= 10.0));
}
