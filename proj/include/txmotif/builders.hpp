#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "txmotif/errors.hpp"
#include "txmotif/graph.hpp"
#include "txmotif/tabular.hpp"

namespace txmotif {

struct EntityGraphSpec {
  // Entity types to expand into cliques; empty means all of the dataset's.
  std::vector<std::string> entity_types_used;
};

struct TransactionGraphSpec {
  // Entity types whose sharing links two transactions.
  std::vector<std::string> shared_entity_types = {"client", "merchant"};
  std::int64_t lookback_seconds = 6 * 3600;
};

namespace detail {

// Resolves a requested type subset to dataset column indices, normalized to
// dataset order so label vocabularies do not depend on how the subset was
// spelled.
inline std::vector<std::size_t> resolve_types(const TabularDataset& data,
                                              const std::vector<std::string>& requested,
                                              const char* what) {
  std::vector<std::size_t> cols;
  if (requested.empty()) {
    for (std::size_t i = 0; i < data.entity_types.size(); ++i) cols.push_back(i);
  } else {
    for (const std::string& name : requested) {
      auto idx = data.entity_type_index(name);
      if (!idx) {
        throw ConfigError(std::string(what) + ": dataset has no entity type \"" + name + "\"");
      }
      cols.push_back(*idx);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  }
  if (cols.empty()) throw ConfigError(std::string(what) + ": empty entity type subset");
  return cols;
}

inline std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

// Entity graph: one node per distinct (type, value); each transaction's
// entities form a clique. Shared transactions collapse into a single edge
// whose label is fraud iff at least one of them is fraudulent.
inline HeteroGraph build_entity_graph(const TabularDataset& data,
                                      const EntityGraphSpec& spec = {}) {
  const std::vector<std::size_t> cols =
      detail::resolve_types(data, spec.entity_types_used, "entity graph");

  std::vector<std::string> node_vocab;
  for (std::size_t c : cols) node_vocab.push_back(data.entity_types[c]);
  HeteroGraph g(false, node_vocab, {"legit", "fraud"});

  // (type slot, value) -> node, numbered in first-appearance order.
  std::vector<std::unordered_map<std::string, NodeId>> node_of(cols.size());
  std::vector<NodeId> clique(cols.size());
  std::unordered_map<std::uint64_t, bool> edge_fraud;
  for (const TransactionRecord& rec : data.records) {
    for (std::size_t slot = 0; slot < cols.size(); ++slot) {
      const std::string& value = rec.entities[cols[slot]];
      auto [it, inserted] = node_of[slot].try_emplace(value, 0);
      if (inserted) {
        it->second = g.add_node(static_cast<LabelId>(slot), value);
      }
      clique[slot] = it->second;
    }
    for (std::size_t i = 0; i < clique.size(); ++i) {
      for (std::size_t j = i + 1; j < clique.size(); ++j) {
        edge_fraud[detail::pair_key(clique[i], clique[j])] |= rec.is_fraud;
      }
    }
  }

  for (const auto& [key, fraud] : edge_fraud) {
    const NodeId a = static_cast<NodeId>(key >> 32);
    const NodeId b = static_cast<NodeId>(key & 0xFFFFFFFFu);
    g.add_edge(a, b, fraud ? 1 : 0);
  }
  return g;
}

namespace detail {

inline std::string subset_label_name(std::uint32_t mask,
                                     const std::vector<std::string>& type_names) {
  std::string name;
  for (std::size_t i = 0; i < type_names.size(); ++i) {
    if (mask & (1u << i)) {
      if (!name.empty()) name += '+';
      name += type_names[i];
    }
  }
  return name;
}

}  // namespace detail

// Transaction graph: one node per transaction labeled fraud/legit; two
// transactions sharing at least one linking entity within the lookback window
// (inclusive) are connected older -> newer, both ways on a timestamp tie.
// The edge label is the exact shared subset, one of 2^k - 1 values.
inline HeteroGraph build_transaction_graph(const TabularDataset& data,
                                           const TransactionGraphSpec& spec = {}) {
  if (spec.lookback_seconds <= 0) throw ConfigError("lookback must be positive");
  const std::vector<std::size_t> cols =
      detail::resolve_types(data, spec.shared_entity_types, "transaction graph");
  if (cols.size() > 16) throw ConfigError("more than 16 linking entity types");

  std::vector<std::string> type_names;
  for (std::size_t c : cols) type_names.push_back(data.entity_types[c]);
  std::vector<std::string> edge_vocab;
  for (std::uint32_t mask = 1; mask < (1u << cols.size()); ++mask) {
    edge_vocab.push_back(detail::subset_label_name(mask, type_names));
  }

  HeteroGraph g(true, {"legit", "fraud"}, edge_vocab);
  for (const TransactionRecord& rec : data.records) {
    g.add_node(rec.is_fraud ? 1 : 0, rec.txn_id);
  }

  // Per linking type, walk each entity value's time-sorted transactions with
  // a sliding window instead of scanning all pairs.
  std::unordered_map<std::uint64_t, std::uint32_t> shared_mask;
  for (std::size_t slot = 0; slot < cols.size(); ++slot) {
    std::unordered_map<std::string, std::vector<NodeId>> by_value;
    for (std::size_t r = 0; r < data.records.size(); ++r) {
      by_value[data.records[r].entities[cols[slot]]].push_back(static_cast<NodeId>(r));
    }
    for (auto& [value, rows] : by_value) {
      std::sort(rows.begin(), rows.end(), [&](NodeId a, NodeId b) {
        const auto ta = data.records[a].timestamp, tb = data.records[b].timestamp;
        return ta != tb ? ta < tb : a < b;
      });
      std::size_t lo = 0;
      for (std::size_t hi = 1; hi < rows.size(); ++hi) {
        const std::int64_t t_hi = data.records[rows[hi]].timestamp;
        while (t_hi - data.records[rows[lo]].timestamp > spec.lookback_seconds) ++lo;
        for (std::size_t i = lo; i < hi; ++i) {
          shared_mask[detail::pair_key(rows[i], rows[hi])] |= 1u << slot;
        }
      }
    }
  }

  for (const auto& [key, mask] : shared_mask) {
    const NodeId a = static_cast<NodeId>(key >> 32);
    const NodeId b = static_cast<NodeId>(key & 0xFFFFFFFFu);
    const LabelId label = static_cast<LabelId>(mask - 1);
    const std::int64_t ta = data.records[a].timestamp;
    const std::int64_t tb = data.records[b].timestamp;
    if (ta < tb) {
      g.add_edge(a, b, label);
    } else if (tb < ta) {
      g.add_edge(b, a, label);
    } else {
      g.add_edge(a, b, label);
      g.add_edge(b, a, label);
    }
  }
  return g;
}

}  // namespace txmotif
