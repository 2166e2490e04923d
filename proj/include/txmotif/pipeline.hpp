#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "txmotif/builders.hpp"
#include "txmotif/census.hpp"
#include "txmotif/errors.hpp"
#include "txmotif/rng.hpp"
#include "txmotif/significance.hpp"
#include "txmotif/tabular.hpp"

namespace txmotif {

enum class GraphKind { entity, transaction };

inline GraphKind parse_graph_kind(const std::string& text) {
  if (text == "entity") return GraphKind::entity;
  if (text == "transaction") return GraphKind::transaction;
  throw ConfigError("graph kind must be \"entity\" or \"transaction\", got \"" + text + "\"");
}

struct PipelineConfig {
  std::string input_path;
  CsvSchema schema;
  GraphKind graph = GraphKind::transaction;
  EntityGraphSpec entity_spec;
  TransactionGraphSpec transaction_spec;
  std::size_t n_random_networks = 100;
  double rho = 0.8;
  std::uint64_t seed = 0;
  bool shuffle_fraud = true;
  std::optional<std::int64_t> from_time;  // inclusive bounds, applied before any build
  std::optional<std::int64_t> to_time;
  SelectionParams selection;
  bool laplace = false;
  std::size_t workers = 0;  // 0 = number of processors
  std::string out_dir = ".";
  std::size_t catalog_top_n = 10;
};

inline TabularDataset filter_period(const TabularDataset& data,
                                    std::optional<std::int64_t> from,
                                    std::optional<std::int64_t> to) {
  if (from && to && *from > *to) throw ConfigError("time filter: from exceeds to");
  TabularDataset out;
  out.entity_types = data.entity_types;
  for (const TransactionRecord& rec : data.records) {
    if (from && rec.timestamp < *from) continue;
    if (to && rec.timestamp > *to) continue;
    out.records.push_back(rec);
  }
  return out;
}

inline HeteroGraph build_graph(const PipelineConfig& cfg, const TabularDataset& data) {
  if (cfg.graph == GraphKind::entity) return build_entity_graph(data, cfg.entity_spec);
  return build_transaction_graph(data, cfg.transaction_spec);
}

namespace detail {

// Runs fn(0..n-1) on `workers` threads; the index order of side effects is
// up to the caller, so results must be stored by index and reduced after.
template <typename Fn>
inline void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

inline nlohmann::json dataset_stats_json(const TabularDataset& data) {
  nlohmann::json j;
  j["transactions"] = data.size();
  std::size_t fraud = 0;
  std::optional<std::int64_t> lo, hi;
  for (const TransactionRecord& rec : data.records) {
    fraud += rec.is_fraud;
    if (!lo || rec.timestamp < *lo) lo = rec.timestamp;
    if (!hi || rec.timestamp > *hi) hi = rec.timestamp;
  }
  j["fraud_transactions"] = fraud;
  j["entity_types"] = data.entity_types;
  j["time_min"] = lo ? nlohmann::json(*lo) : nlohmann::json(nullptr);
  j["time_max"] = hi ? nlohmann::json(*hi) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json graph_stats_json(const HeteroGraph& g) {
  const GraphStats s = g.stats();
  nlohmann::json j;
  j["directed"] = g.directed();
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["node_types"] = s.node_types;
  j["edge_types"] = s.edge_types;
  j["components"] = s.components;
  j["fraud_rate"] = s.fraud_rate ? nlohmann::json(*s.fraud_rate) : nlohmann::json(nullptr);
  j["node_label_vocab"] = g.node_label_vocab();
  j["edge_label_vocab"] = g.edge_label_vocab();
  j["node_label_counts"] = s.node_label_counts;
  j["edge_label_counts"] = s.edge_label_counts;
  return j;
}

inline nlohmann::json config_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["input"] = cfg.input_path;
  j["graph"] = cfg.graph == GraphKind::entity ? "entity" : "transaction";
  if (cfg.graph == GraphKind::transaction) {
    j["lookback_seconds"] = cfg.transaction_spec.lookback_seconds;
    j["shared_entity_types"] = cfg.transaction_spec.shared_entity_types;
  } else {
    j["entity_types_used"] = cfg.entity_spec.entity_types_used;
  }
  j["replicas"] = cfg.n_random_networks;
  j["rho"] = cfg.rho;
  j["seed"] = cfg.seed;
  j["shuffle_fraud"] = cfg.shuffle_fraud;
  j["from"] = cfg.from_time ? nlohmann::json(*cfg.from_time) : nlohmann::json(nullptr);
  j["to"] = cfg.to_time ? nlohmann::json(*cfg.to_time) : nlohmann::json(nullptr);
  j["motif_ratio_min"] = cfg.selection.motif_ratio_min;
  j["antimotif_ratio_max"] = cfg.selection.antimotif_ratio_max;
  j["min_support"] = cfg.selection.min_support;
  j["laplace"] = cfg.laplace;
  return j;
}

namespace detail {

inline std::string fmt_ratio2(double ratio, bool infinite) {
  if (infinite) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", ratio);
  return buf;
}

// "0 -[fraud]- 1" / "0 -[client]-> 1" / "0 <-[x]-> 1" token per linked pair.
inline std::string depict_edges(const TriadPattern& p, const std::vector<std::string>& edge_vocab) {
  auto name = [&](int slot_value) -> std::string {
    const std::size_t label = static_cast<std::size_t>(slot_value - 1);
    return label < edge_vocab.size() ? edge_vocab[label] : "?" + std::to_string(label);
  };
  std::string out;
  auto append = [&](const std::string& tok) {
    if (!out.empty()) out += ", ";
    out += tok;
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const int fwd = p.slots[TriadPattern::slot_index(i, j)];
      const int back = p.slots[TriadPattern::slot_index(j, i)];
      if (!fwd && !back) continue;
      const std::string si = std::to_string(i), sj = std::to_string(j);
      if (!p.directed) {
        append(si + " -[" + name(fwd) + "]- " + sj);
      } else if (fwd && back && fwd == back) {
        append(si + " <-[" + name(fwd) + "]-> " + sj);
      } else {
        if (fwd) append(si + " -[" + name(fwd) + "]-> " + sj);
        if (back) append(sj + " -[" + name(back) + "]-> " + si);
      }
    }
  }
  return out;
}

inline void render_entry(std::string& out, std::size_t rank, const SubgraphClass& cls,
                         const SignificanceReport& report) {
  const ClassStats& s = report.classes.at(cls);
  const TriadPattern p = decode_class(cls);
  out += "  " + std::to_string(rank) + ". r=" + fmt_ratio2(s.ratio, s.ratio_infinite) + " — " +
         std::to_string(s.f_original) + " / " + fmt_double(s.mu) + " ± " + fmt_double(s.sigma) +
         "\n";
  std::string nodes;
  for (int i = 0; i < 3; ++i) {
    if (i) nodes += ", ";
    const std::size_t label = p.node_labels[i];
    nodes += std::to_string(i) + ":" +
             (label < report.node_labels.size() ? report.node_labels[label]
                                                : "?" + std::to_string(label));
  }
  out += "     nodes: " + nodes + "\n";
  out += "     edges: " + depict_edges(p, report.edge_labels) + "\n";
  if (s.ratio_infinite) {
    out += "     appears " + std::to_string(s.f_original) +
           " times, never in any random network\n";
  } else if (!report.motifs.empty() &&
             std::find(report.motifs.begin(), report.motifs.end(), cls) != report.motifs.end()) {
    out += "     appears " + fmt_ratio2(s.ratio, false) +
           " times more often than in random networks\n";
  }
}

}  // namespace detail

inline std::string render_motif_catalog(const SignificanceReport& report, std::size_t top_n = 10) {
  std::string out;
  out += "heterogeneous subgraph catalog (" + std::to_string(report.n_replicas) +
         " random networks)\n\n";
  out += "motifs (ratio >= " + fmt_double(report.selection.motif_ratio_min) + "):\n";
  if (report.motifs.empty()) {
    out += "  no motifs above threshold\n";
  } else {
    std::size_t rank = 0;
    for (const SubgraphClass& cls : report.motifs) {
      if (rank == top_n) break;
      detail::render_entry(out, ++rank, cls, report);
    }
  }
  out += "\nanti-motifs (ratio <= " + fmt_double(report.selection.antimotif_ratio_max) + "):\n";
  if (report.anti_motifs.empty()) {
    out += "  no anti-motifs below threshold\n";
  } else {
    std::size_t rank = 0;
    for (const SubgraphClass& cls : report.anti_motifs) {
      if (rank == top_n) break;
      detail::render_entry(out, ++rank, cls, report);
    }
  }
  return out;
}

inline void write_report_files(const std::filesystem::path& dir, const SignificanceReport& report,
                               std::size_t catalog_top_n = 10) {
  detail::write_text_file(dir / "significance.json", report_to_json(report).dump(2) + "\n");
  {
    std::ofstream out(dir / "significance.csv", std::ios::binary);
    if (!out) throw IoError("cannot open significance.csv for writing");
    write_significance_csv(out, report);
  }
  {
    std::ofstream out(dir / "ratio_evolution.csv", std::ios::binary);
    if (!out) throw IoError("cannot open ratio_evolution.csv for writing");
    write_ratio_evolution_csv(out, report);
  }
  detail::write_text_file(dir / "catalog.txt", render_motif_catalog(report, catalog_top_n));
}

struct PipelineResult {
  std::filesystem::path out_dir;
  SignificanceReport report;
  std::size_t transactions = 0;
};

// Ingest -> period filter -> original graph + census -> per-replica
// randomize/build/census -> significance -> report files. Every byte of
// output is a function of (input, config); worker count never changes it.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  if (cfg.n_random_networks < 1) throw ConfigError("need at least one random network");
  const TabularDataset raw = load_transactions(cfg.input_path, cfg.schema);
  const TabularDataset data = filter_period(raw, cfg.from_time, cfg.to_time);

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);

  const HeteroGraph original = build_graph(cfg, data);
  {
    nlohmann::json stats;
    stats["config"] = config_json(cfg);
    stats["dataset"] = dataset_stats_json(data);
    stats["graph"] = graph_stats_json(original);
    detail::write_text_file(dir / "stats.json", stats.dump(2) + "\n");
  }

  const CensusResult census0 = census_k3(original, "original");
  {
    std::ofstream out(dir / "census_original.csv", std::ios::binary);
    if (!out) throw IoError("cannot open census_original.csv for writing");
    write_census_csv(out, census0, original.node_label_vocab(), original.edge_label_vocab());
  }

  std::vector<CensusResult> replicas(cfg.n_random_networks);
  detail::parallel_for(cfg.n_random_networks, cfg.workers, [&](std::size_t i) {
    RandomizationConfig rand_cfg;
    rand_cfg.rho = cfg.rho;
    rand_cfg.seed = seed_for_replica(cfg.seed, i);
    rand_cfg.shuffle_fraud = cfg.shuffle_fraud;
    const TabularDataset shuffled = randomize_dataset(data, rand_cfg);
    const HeteroGraph g = build_graph(cfg, shuffled);
    replicas[i] = census_k3(g, "replica_" + std::to_string(i));
  });
  for (std::size_t i = 0; i < replicas.size(); ++i) {
    std::ofstream out(dir / ("census_replica_" + std::to_string(i) + ".csv"), std::ios::binary);
    if (!out) throw IoError("cannot open replica census for writing");
    write_census_csv(out, replicas[i], original.node_label_vocab(), original.edge_label_vocab());
  }

  PipelineResult result;
  result.out_dir = dir;
  result.transactions = data.size();
  result.report = build_report(census0, replicas, original.directed(), original.node_label_vocab(),
                               original.edge_label_vocab(), cfg.selection, cfg.laplace);
  write_report_files(dir, result.report, cfg.catalog_top_n);
  return result;
}

// Rebuilds the significance report from censuses persisted by run_pipeline;
// stats.json supplies the graph's directedness and label vocabularies.
inline SignificanceReport recompute_report(const std::string& out_dir,
                                           const SelectionParams& params = {},
                                           bool laplace = false) {
  const std::filesystem::path dir(out_dir);
  nlohmann::json stats;
  {
    std::ifstream in(dir / "stats.json", std::ios::binary);
    if (!in) throw IoError("cannot open " + (dir / "stats.json").string());
    try {
      stats = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("stats.json: " + std::string(e.what()));
    }
  }
  bool directed;
  std::vector<std::string> node_labels, edge_labels;
  try {
    directed = stats.at("graph").at("directed").get<bool>();
    node_labels = stats.at("graph").at("node_label_vocab").get<std::vector<std::string>>();
    edge_labels = stats.at("graph").at("edge_label_vocab").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("stats.json: " + std::string(e.what()));
  }

  auto read_census = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_census_csv(in);
  };
  const CensusResult original = read_census(dir / "census_original.csv");
  std::vector<CensusResult> replicas;
  for (std::size_t i = 0;; ++i) {
    const std::filesystem::path path = dir / ("census_replica_" + std::to_string(i) + ".csv");
    if (!std::filesystem::exists(path)) break;
    replicas.push_back(read_census(path));
  }
  if (replicas.empty()) throw IoError("no census_replica_<i>.csv files in " + out_dir);
  return build_report(original, replicas, directed, std::move(node_labels),
                      std::move(edge_labels), params, laplace);
}

}  // namespace txmotif
