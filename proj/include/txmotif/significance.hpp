#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "txmotif/census.hpp"
#include "txmotif/csv.hpp"
#include "txmotif/errors.hpp"

namespace txmotif {

// Shortest round-trip decimal rendering; keeps text outputs byte-stable.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

enum class ZFlag { defined, undefined_equal, undefined_above, undefined_below };

inline const char* to_string(ZFlag f) {
  switch (f) {
    case ZFlag::defined: return "defined";
    case ZFlag::undefined_equal: return "equal";
    case ZFlag::undefined_above: return "above";
    case ZFlag::undefined_below: return "below";
  }
  return "?";
}

// Per-class significance against the randomized ensemble.
struct ClassStats {
  std::uint64_t f_original = 0;
  double mu = 0.0;     // ensemble mean
  double sigma = 0.0;  // ensemble population standard deviation (divide by n)
  double z = 0.0;      // valid when z_flag == defined
  ZFlag z_flag = ZFlag::undefined_equal;
  double ratio = 0.0;  // +inf when ratio_infinite
  bool ratio_infinite = false;
  std::size_t n_replicas = 0;
};

inline double zscore(double f, double mu, double sigma) { return (f - mu) / sigma; }

// Mean and standard deviation come from the replica counts (classes absent in
// a replica contribute 0). sigma = 0 leaves z undefined with a sign
// annotation; mu = 0 flags the ratio infinite instead of dividing. With
// laplace enabled the ratio becomes (f+1)/(mu+1), always finite.
inline ClassStats class_stats(std::uint64_t f_original,
                              const std::vector<std::uint64_t>& replica_counts,
                              bool laplace = false) {
  if (replica_counts.empty()) {
    throw ConfigError("class_stats requires at least one replica count");
  }
  ClassStats s;
  s.f_original = f_original;
  s.n_replicas = replica_counts.size();

  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (std::uint64_t c : replica_counts) {
    ++n;
    const double x = static_cast<double>(c);
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  s.mu = mean;
  s.sigma = std::sqrt(m2 / static_cast<double>(n));

  const double f = static_cast<double>(f_original);
  if (s.sigma > 0.0) {
    s.z = zscore(f, s.mu, s.sigma);
    s.z_flag = ZFlag::defined;
  } else {
    s.z = 0.0;
    s.z_flag = f > s.mu    ? ZFlag::undefined_above
               : f < s.mu  ? ZFlag::undefined_below
                           : ZFlag::undefined_equal;
  }
  if (laplace) {
    s.ratio = (f + 1.0) / (s.mu + 1.0);
  } else if (s.mu > 0.0) {
    s.ratio = f / s.mu;
  } else {
    s.ratio = std::numeric_limits<double>::infinity();
    s.ratio_infinite = true;
  }
  return s;
}

// Running ratio after 1..n replicas, in generation order. Element t-1 is
// f / mean(counts[0..t)). A zero running mean is marked, not dropped:
// +inf when f > 0, nan when f == 0.
inline std::vector<double> ratio_evolution(std::uint64_t f_original,
                                           const std::vector<std::uint64_t>& replica_counts,
                                           bool laplace = false) {
  std::vector<double> series;
  series.reserve(replica_counts.size());
  const double f = static_cast<double>(f_original);
  double sum = 0.0;
  for (std::size_t t = 1; t <= replica_counts.size(); ++t) {
    sum += static_cast<double>(replica_counts[t - 1]);
    const double mean = sum / static_cast<double>(t);
    if (laplace) {
      series.push_back((f + 1.0) / (mean + 1.0));
    } else if (mean > 0.0) {
      series.push_back(f / mean);
    } else if (f > 0.0) {
      series.push_back(std::numeric_limits<double>::infinity());
    } else {
      series.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return series;
}

struct SelectionParams {
  double motif_ratio_min = 100.0;
  double antimotif_ratio_max = 0.01;
  std::uint64_t min_support = 5;
};

// Motifs: ratio >= motif_ratio_min (an infinite ratio qualifies) with
// f_original >= min_support, by descending ratio. Anti-motifs: ratio <=
// antimotif_ratio_max with mu >= min_support, ascending. The threshold order
// precondition keeps the two sets disjoint.
inline std::pair<std::vector<SubgraphClass>, std::vector<SubgraphClass>> select_motifs(
    const std::map<SubgraphClass, ClassStats>& classes, const SelectionParams& params) {
  if (params.motif_ratio_min <= 0 || params.antimotif_ratio_max <= 0) {
    throw ConfigError("selection thresholds must be positive");
  }
  if (!(params.motif_ratio_min > params.antimotif_ratio_max)) {
    throw ConfigError("motif_ratio_min must exceed antimotif_ratio_max");
  }
  std::vector<SubgraphClass> motifs, anti;
  for (const auto& [cls, s] : classes) {
    if ((s.ratio_infinite || s.ratio >= params.motif_ratio_min) &&
        s.f_original >= params.min_support) {
      motifs.push_back(cls);
    } else if (!s.ratio_infinite && s.ratio <= params.antimotif_ratio_max &&
               s.mu >= static_cast<double>(params.min_support)) {
      anti.push_back(cls);
    }
  }
  std::sort(motifs.begin(), motifs.end(), [&](const SubgraphClass& a, const SubgraphClass& b) {
    const ClassStats& sa = classes.at(a);
    const ClassStats& sb = classes.at(b);
    if (sa.ratio != sb.ratio) return sa.ratio > sb.ratio;
    if (sa.f_original != sb.f_original) return sa.f_original > sb.f_original;
    return a < b;
  });
  std::sort(anti.begin(), anti.end(), [&](const SubgraphClass& a, const SubgraphClass& b) {
    const ClassStats& sa = classes.at(a);
    const ClassStats& sb = classes.at(b);
    if (sa.ratio != sb.ratio) return sa.ratio < sb.ratio;
    if (sa.mu != sb.mu) return sa.mu > sb.mu;
    return a < b;
  });
  return {std::move(motifs), std::move(anti)};
}

struct SignificanceReport {
  bool directed = false;
  std::vector<std::string> node_labels;
  std::vector<std::string> edge_labels;
  std::size_t n_replicas = 0;
  bool laplace_smoothing = false;
  SelectionParams selection;
  std::map<SubgraphClass, ClassStats> classes;
  std::map<SubgraphClass, std::vector<double>> evolution;
  std::vector<SubgraphClass> motifs;
  std::vector<SubgraphClass> anti_motifs;
};

// Aggregates one original census and its replica censuses, in generation
// order, into the full report. Classes absent from a census count as 0.
inline SignificanceReport build_report(const CensusResult& original,
                                       const std::vector<CensusResult>& replicas,
                                       bool directed,
                                       std::vector<std::string> node_labels,
                                       std::vector<std::string> edge_labels,
                                       const SelectionParams& params = {},
                                       bool laplace = false) {
  if (replicas.empty()) throw ConfigError("significance needs at least one replica");
  SignificanceReport report;
  report.directed = directed;
  report.node_labels = std::move(node_labels);
  report.edge_labels = std::move(edge_labels);
  report.n_replicas = replicas.size();
  report.laplace_smoothing = laplace;
  report.selection = params;

  std::map<SubgraphClass, std::vector<std::uint64_t>> per_class;
  auto vector_for = [&](const SubgraphClass& cls) -> std::vector<std::uint64_t>& {
    auto [it, inserted] = per_class.try_emplace(cls);
    if (inserted) it->second.assign(replicas.size(), 0);
    return it->second;
  };
  for (const auto& [cls, count] : original.counts) vector_for(cls);
  for (std::size_t i = 0; i < replicas.size(); ++i) {
    for (const auto& [cls, count] : replicas[i].counts) vector_for(cls)[i] = count;
  }

  for (auto& [cls, counts] : per_class) {
    auto it = original.counts.find(cls);
    const std::uint64_t f = it != original.counts.end() ? it->second : 0;
    report.classes.emplace(cls, class_stats(f, counts, laplace));
    report.evolution.emplace(cls, ratio_evolution(f, counts, laplace));
  }
  auto [motifs, anti] = select_motifs(report.classes, params);
  report.motifs = std::move(motifs);
  report.anti_motifs = std::move(anti);
  return report;
}

inline nlohmann::json report_to_json(const SignificanceReport& report) {
  nlohmann::json j;
  j["directed"] = report.directed;
  j["node_labels"] = report.node_labels;
  j["edge_labels"] = report.edge_labels;
  j["n_replicas"] = report.n_replicas;
  j["sigma_definition"] = "population";
  j["laplace_smoothing"] = report.laplace_smoothing;
  j["selection"] = {{"motif_ratio_min", report.selection.motif_ratio_min},
                    {"antimotif_ratio_max", report.selection.antimotif_ratio_max},
                    {"min_support", report.selection.min_support}};
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, s] : report.classes) {
    nlohmann::json c;
    c["description"] = describe_class(cls, report.node_labels, report.edge_labels);
    c["f"] = s.f_original;
    c["mu"] = s.mu;
    c["sigma"] = s.sigma;
    if (s.z_flag == ZFlag::defined) {
      c["z"] = s.z;
    } else {
      c["z"] = nullptr;
    }
    c["z_flag"] = to_string(s.z_flag);
    if (s.ratio_infinite) {
      c["ratio"] = nullptr;
    } else {
      c["ratio"] = s.ratio;
    }
    c["ratio_infinite"] = s.ratio_infinite;
    classes[cls.hex()] = std::move(c);
  }
  j["classes"] = std::move(classes);
  nlohmann::json evolution = nlohmann::json::object();
  for (const auto& [cls, series] : report.evolution) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : series) {
      if (std::isfinite(v)) {
        arr.push_back(v);
      } else {
        arr.push_back(nullptr);  // marked, not dropped
      }
    }
    evolution[cls.hex()] = std::move(arr);
  }
  j["ratio_evolution"] = std::move(evolution);
  auto hexes = [](const std::vector<SubgraphClass>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SubgraphClass& c : v) arr.push_back(c.hex());
    return arr;
  };
  j["motifs"] = hexes(report.motifs);
  j["anti_motifs"] = hexes(report.anti_motifs);
  return j;
}

inline SignificanceReport report_from_json(const nlohmann::json& j) {
  SignificanceReport report;
  report.directed = j.at("directed").get<bool>();
  report.node_labels = j.at("node_labels").get<std::vector<std::string>>();
  report.edge_labels = j.at("edge_labels").get<std::vector<std::string>>();
  report.n_replicas = j.at("n_replicas").get<std::size_t>();
  report.laplace_smoothing = j.value("laplace_smoothing", false);
  const auto& sel = j.at("selection");
  report.selection.motif_ratio_min = sel.at("motif_ratio_min").get<double>();
  report.selection.antimotif_ratio_max = sel.at("antimotif_ratio_max").get<double>();
  report.selection.min_support = sel.at("min_support").get<std::uint64_t>();
  for (const auto& [hex, c] : j.at("classes").items()) {
    auto cls = SubgraphClass::from_hex(hex);
    if (!cls) throw IoError("bad canonical code \"" + hex + "\" in report");
    ClassStats s;
    s.f_original = c.at("f").get<std::uint64_t>();
    s.mu = c.at("mu").get<double>();
    s.sigma = c.at("sigma").get<double>();
    const std::string flag = c.at("z_flag").get<std::string>();
    s.z_flag = flag == "defined" ? ZFlag::defined
               : flag == "above" ? ZFlag::undefined_above
               : flag == "below" ? ZFlag::undefined_below
                                 : ZFlag::undefined_equal;
    if (s.z_flag == ZFlag::defined) s.z = c.at("z").get<double>();
    s.ratio_infinite = c.at("ratio_infinite").get<bool>();
    s.ratio = s.ratio_infinite ? std::numeric_limits<double>::infinity()
                               : c.at("ratio").get<double>();
    s.n_replicas = report.n_replicas;
    report.classes.emplace(*cls, s);
  }
  if (j.contains("ratio_evolution")) {
    for (const auto& [hex, arr] : j.at("ratio_evolution").items()) {
      auto cls = SubgraphClass::from_hex(hex);
      if (!cls) throw IoError("bad canonical code in ratio_evolution");
      std::vector<double> series;
      const std::uint64_t f = report.classes.count(*cls) ? report.classes.at(*cls).f_original : 0;
      for (const auto& v : arr) {
        if (v.is_null()) {
          series.push_back(f > 0 ? std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::quiet_NaN());
        } else {
          series.push_back(v.get<double>());
        }
      }
      report.evolution.emplace(*cls, std::move(series));
    }
  }
  for (const auto& hex : j.at("motifs")) {
    report.motifs.push_back(*SubgraphClass::from_hex(hex.get<std::string>()));
  }
  for (const auto& hex : j.at("anti_motifs")) {
    report.anti_motifs.push_back(*SubgraphClass::from_hex(hex.get<std::string>()));
  }
  return report;
}

// Flat table, one row per class.
inline void write_significance_csv(std::ostream& out, const SignificanceReport& report) {
  write_csv_row(out, {"canonical_code", "description", "f", "mu", "sigma", "z", "z_flag",
                      "ratio", "motif", "anti_motif"});
  auto member = [](const std::vector<SubgraphClass>& v, const SubgraphClass& c) {
    return std::find(v.begin(), v.end(), c) != v.end();
  };
  for (const auto& [cls, s] : report.classes) {
    write_csv_row(out, {cls.hex(), describe_class(cls, report.node_labels, report.edge_labels),
                        std::to_string(s.f_original), fmt_double(s.mu), fmt_double(s.sigma),
                        s.z_flag == ZFlag::defined ? fmt_double(s.z) : "",
                        to_string(s.z_flag), fmt_double(s.ratio),
                        member(report.motifs, cls) ? "1" : "0",
                        member(report.anti_motifs, cls) ? "1" : "0"});
  }
}

// Long format for plotting: one row per (class, ensemble size).
inline void write_ratio_evolution_csv(std::ostream& out, const SignificanceReport& report) {
  write_csv_row(out, {"canonical_code", "t", "running_ratio"});
  for (const auto& [cls, series] : report.evolution) {
    for (std::size_t t = 0; t < series.size(); ++t) {
      write_csv_row(out, {cls.hex(), std::to_string(t + 1), fmt_double(series[t])});
    }
  }
}

}  // namespace txmotif
