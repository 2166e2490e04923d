#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "txmotif/csv.hpp"
#include "txmotif/errors.hpp"

namespace txmotif {

using NodeId = std::uint32_t;
using LabelId = std::uint16_t;

// Direction bits of an adjacency entry, relative to the list owner u:
// kOut set means an arc u -> nbr exists, kIn means nbr -> u.
inline constexpr std::uint8_t kOut = 1;
inline constexpr std::uint8_t kIn = 2;

struct AdjEntry {
  NodeId nbr;
  LabelId out_label = 0;  // valid when dir & kOut
  LabelId in_label = 0;   // valid when dir & kIn
  std::uint8_t dir = 0;
};

struct GraphStats {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;  // unordered count when undirected, ordered when directed
  std::size_t node_types = 0;
  std::size_t edge_types = 0;
  std::size_t components = 0;
  // Fraudulent-edge fraction (undirected) or fraudulent-node fraction
  // (directed); absent when the graph is empty or has no "fraud" label.
  std::optional<double> fraud_rate;
  std::map<std::string, std::uint64_t> node_label_counts;
  std::map<std::string, std::uint64_t> edge_label_counts;
};

// Labeled graph with typed nodes and typed edges, optionally directed.
// Undirected edges are stored symmetrically; a pair of opposite directed
// edges is merged into one adjacency entry with both direction bits set.
// Neighbor lists are kept sorted by neighbor id.
class HeteroGraph {
public:
  HeteroGraph(bool directed, std::vector<std::string> node_label_vocab,
              std::vector<std::string> edge_label_vocab)
      : directed_(directed),
        node_vocab_(std::move(node_label_vocab)),
        edge_vocab_(std::move(edge_label_vocab)) {}

  bool directed() const { return directed_; }
  const std::vector<std::string>& node_label_vocab() const { return node_vocab_; }
  const std::vector<std::string>& edge_label_vocab() const { return edge_vocab_; }

  NodeId add_node(LabelId label, std::string name = {}) {
    if (label >= node_vocab_.size()) {
      throw StructuralError("node label " + std::to_string(label) + " out of vocabulary");
    }
    node_labels_.push_back(label);
    node_names_.push_back(std::move(name));
    adj_.emplace_back();
    return static_cast<NodeId>(node_labels_.size() - 1);
  }

  std::size_t n_nodes() const { return node_labels_.size(); }
  std::uint64_t n_edges() const { return n_edges_; }

  LabelId node_label(NodeId u) const { return node_labels_[u]; }
  const std::string& node_name(NodeId u) const { return node_names_[u]; }
  const std::vector<AdjEntry>& neighbors(NodeId u) const { return adj_[u]; }
  std::size_t degree(NodeId u) const { return adj_[u].size(); }

  // Adds the edge u -> v (or the undirected edge {u, v}). A duplicate edge or
  // a self-loop is a structural error; builders collapse multiplicity first.
  void add_edge(NodeId u, NodeId v, LabelId label) {
    check_node(u);
    check_node(v);
    if (u == v) {
      throw StructuralError("self-loop on node " + std::to_string(u));
    }
    if (label >= edge_vocab_.size()) {
      throw StructuralError("edge label " + std::to_string(label) + " out of vocabulary");
    }
    if (directed_) {
      AdjEntry& fwd = entry_for(u, v);
      if (fwd.dir & kOut) {
        throw StructuralError("duplicate edge " + std::to_string(u) + "->" + std::to_string(v));
      }
      fwd.dir |= kOut;
      fwd.out_label = label;
      AdjEntry& rev = entry_for(v, u);
      rev.dir |= kIn;
      rev.in_label = label;
    } else {
      AdjEntry& fwd = entry_for(u, v);
      if (fwd.dir) {
        throw StructuralError("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
      }
      fwd.dir = kOut | kIn;
      fwd.out_label = fwd.in_label = label;
      AdjEntry& rev = entry_for(v, u);
      rev.dir = kOut | kIn;
      rev.out_label = rev.in_label = label;
    }
    ++n_edges_;
  }

  // Entry on u's list covering v, or nullptr when no edge touches the pair.
  const AdjEntry* find_edge(NodeId u, NodeId v) const {
    const auto& list = adj_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const AdjEntry& e, NodeId id) { return e.nbr < id; });
    if (it == list.end() || it->nbr != v) return nullptr;
    return &*it;
  }

  bool has_arc(NodeId u, NodeId v) const {
    const AdjEntry* e = find_edge(u, v);
    return e && (e->dir & kOut);
  }

  // Weakly connected components (direction ignored), each sorted by id,
  // ordered by smallest member.
  std::vector<std::vector<NodeId>> connected_components() const {
    std::vector<std::vector<NodeId>> components;
    std::vector<char> seen(n_nodes(), 0);
    std::vector<NodeId> stack;
    for (NodeId root = 0; root < n_nodes(); ++root) {
      if (seen[root]) continue;
      std::vector<NodeId> comp;
      stack.push_back(root);
      seen[root] = 1;
      while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        comp.push_back(u);
        for (const AdjEntry& e : adj_[u]) {
          if (!seen[e.nbr]) {
            seen[e.nbr] = 1;
            stack.push_back(e.nbr);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
    return components;
  }

  GraphStats stats() const {
    GraphStats s;
    s.nodes = n_nodes();
    s.edges = n_edges_;
    s.node_types = node_vocab_.size();
    s.edge_types = edge_vocab_.size();
    s.components = connected_components().size();
    for (const std::string& name : node_vocab_) s.node_label_counts[name] = 0;
    for (const std::string& name : edge_vocab_) s.edge_label_counts[name] = 0;
    for (NodeId u = 0; u < n_nodes(); ++u) {
      ++s.node_label_counts[node_vocab_[node_labels_[u]]];
    }
    std::uint64_t fraud_edges = 0;
    for (NodeId u = 0; u < n_nodes(); ++u) {
      for (const AdjEntry& e : adj_[u]) {
        if (e.dir & kOut) {
          // Count each edge once: undirected edges from the smaller endpoint.
          if (directed_ || u < e.nbr) {
            ++s.edge_label_counts[edge_vocab_[e.out_label]];
            if (edge_vocab_[e.out_label] == "fraud") ++fraud_edges;
          }
        }
      }
    }
    if (!directed_) {
      auto fraud_it = std::find(edge_vocab_.begin(), edge_vocab_.end(), "fraud");
      if (fraud_it != edge_vocab_.end() && s.edges > 0) {
        s.fraud_rate = static_cast<double>(fraud_edges) / static_cast<double>(s.edges);
      }
    } else {
      auto fraud_it = std::find(node_vocab_.begin(), node_vocab_.end(), "fraud");
      if (fraud_it != node_vocab_.end() && s.nodes > 0) {
        const LabelId fraud = static_cast<LabelId>(fraud_it - node_vocab_.begin());
        std::uint64_t fraud_nodes = 0;
        for (LabelId l : node_labels_) {
          if (l == fraud) ++fraud_nodes;
        }
        s.fraud_rate = static_cast<double>(fraud_nodes) / static_cast<double>(s.nodes);
      }
    }
    return s;
  }

  // Edge-list text: node_id, node_label, neighbor_id, edge_label, direction,
  // plus original names. Undirected edges once (u < v, direction "-");
  // directed arcs once each (direction ">").
  void write_edge_list(std::ostream& out, char delimiter = ',') const {
    write_csv_row(out,
                  {"node_id", "node_name", "node_label", "neighbor_id", "neighbor_name",
                   "edge_label", "direction"},
                  delimiter);
    for (NodeId u = 0; u < n_nodes(); ++u) {
      for (const AdjEntry& e : adj_[u]) {
        if (!(e.dir & kOut)) continue;
        if (!directed_ && u > e.nbr) continue;
        write_csv_row(out,
                      {std::to_string(u), node_names_[u], node_vocab_[node_labels_[u]],
                       std::to_string(e.nbr), node_names_[e.nbr], edge_vocab_[e.out_label],
                       directed_ ? ">" : "-"},
                      delimiter);
      }
    }
  }

  // GraphML export for external visualization tools.
  void write_graphml(std::ostream& out) const {
    auto escape = [](const std::string& s) {
      std::string r;
      for (char c : s) {
        switch (c) {
          case '&': r += "&amp;"; break;
          case '<': r += "&lt;"; break;
          case '>': r += "&gt;"; break;
          case '"': r += "&quot;"; break;
          default: r += c;
        }
      }
      return r;
    };
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
        << "  <key id=\"elabel\" for=\"edge\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <graph id=\"G\" edgedefault=\"" << (directed_ ? "directed" : "undirected")
        << "\">\n";
    for (NodeId u = 0; u < n_nodes(); ++u) {
      out << "    <node id=\"n" << u << "\"><data key=\"label\">"
          << escape(node_vocab_[node_labels_[u]]) << "</data><data key=\"name\">"
          << escape(node_names_[u]) << "</data></node>\n";
    }
    for (NodeId u = 0; u < n_nodes(); ++u) {
      for (const AdjEntry& e : adj_[u]) {
        if (!(e.dir & kOut)) continue;
        if (!directed_ && u > e.nbr) continue;
        out << "    <edge source=\"n" << u << "\" target=\"n" << e.nbr
            << "\"><data key=\"elabel\">" << escape(edge_vocab_[e.out_label])
            << "</data></edge>\n";
      }
    }
    out << "  </graph>\n</graphml>\n";
  }

private:
  void check_node(NodeId u) const {
    if (u >= n_nodes()) {
      throw StructuralError("unknown node " + std::to_string(u));
    }
  }

  AdjEntry& entry_for(NodeId u, NodeId v) {
    auto& list = adj_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const AdjEntry& e, NodeId id) { return e.nbr < id; });
    if (it != list.end() && it->nbr == v) return *it;
    return *list.insert(it, AdjEntry{v, 0, 0, 0});
  }

  bool directed_;
  std::vector<std::string> node_vocab_;
  std::vector<std::string> edge_vocab_;
  std::vector<LabelId> node_labels_;
  std::vector<std::string> node_names_;
  std::vector<std::vector<AdjEntry>> adj_;
  std::uint64_t n_edges_ = 0;
};

inline GraphStats graph_stats(const HeteroGraph& g) { return g.stats(); }

}  // namespace txmotif
