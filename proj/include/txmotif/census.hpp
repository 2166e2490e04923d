#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "txmotif/csv.hpp"
#include "txmotif/errors.hpp"
#include "txmotif/graph.hpp"

namespace txmotif {

// Size-3 labeled (di)graph pattern prior to canonicalization. Slots hold the
// edge state of the six ordered node pairs in the fixed order
// (0,1) (0,2) (1,0) (1,2) (2,0) (2,1): 0 when absent, label id + 1 otherwise.
// Undirected edges occupy both opposite slots with the same label.
struct TriadPattern {
  bool directed = false;
  std::array<LabelId, 3> node_labels{};
  std::array<std::uint16_t, 6> slots{};

  static constexpr int slot_index(int i, int j) {
    constexpr int table[3][3] = {{-1, 0, 1}, {2, -1, 3}, {4, 5, -1}};
    return table[i][j];
  }

  bool connected() const {
    int pairs = 0;
    if (slots[0] || slots[2]) ++pairs;  // {0,1}
    if (slots[1] || slots[4]) ++pairs;  // {0,2}
    if (slots[3] || slots[5]) ++pairs;  // {1,2}
    return pairs >= 2;
  }
};

inline constexpr std::size_t kClassCodeSize = 19;

// Canonical code of one heterogeneous isomorphism class: the
// lexicographically minimal fixed-width big-endian serialization of a
// TriadPattern over all 6 node permutations. Two size-3 subgraphs get equal
// codes iff a label- and direction-preserving isomorphism exists.
struct SubgraphClass {
  std::array<std::uint8_t, kClassCodeSize> code{};

  auto operator<=>(const SubgraphClass&) const = default;

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * kClassCodeSize);
    for (std::uint8_t b : code) {
      out += digits[b >> 4];
      out += digits[b & 0xF];
    }
    return out;
  }

  static std::optional<SubgraphClass> from_hex(std::string_view s) {
    if (s.size() != 2 * kClassCodeSize) return std::nullopt;
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    SubgraphClass cls;
    for (std::size_t i = 0; i < kClassCodeSize; ++i) {
      int hi = nibble(s[2 * i]), lo = nibble(s[2 * i + 1]);
      if (hi < 0 || lo < 0) return std::nullopt;
      cls.code[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return cls;
  }
};

struct SubgraphClassHash {
  std::size_t operator()(const SubgraphClass& c) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (std::uint8_t b : c.code) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

namespace detail {

inline constexpr std::array<std::array<int, 3>, 6> kPerm3 = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

inline void put_u16(std::uint8_t* out, std::uint16_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 8);
  out[1] = static_cast<std::uint8_t>(v & 0xFF);
}

inline std::uint16_t get_u16(const std::uint8_t* in) {
  return static_cast<std::uint16_t>((in[0] << 8) | in[1]);
}

inline void serialize_permuted(const TriadPattern& p, const std::array<int, 3>& perm,
                               std::array<std::uint8_t, kClassCodeSize>& out) {
  out[0] = p.directed ? 1 : 0;
  for (int i = 0; i < 3; ++i) {
    put_u16(&out[1 + 2 * i], p.node_labels[perm[i]]);
  }
  int at = 7;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      put_u16(&out[at], p.slots[TriadPattern::slot_index(perm[i], perm[j])]);
      at += 2;
    }
  }
}

}  // namespace detail

inline SubgraphClass canonicalize(const TriadPattern& pattern) {
  SubgraphClass best;
  std::array<std::uint8_t, kClassCodeSize> candidate;
  detail::serialize_permuted(pattern, detail::kPerm3[0], best.code);
  for (std::size_t k = 1; k < detail::kPerm3.size(); ++k) {
    detail::serialize_permuted(pattern, detail::kPerm3[k], candidate);
    if (candidate < best.code) best.code = candidate;
  }
  return best;
}

// Inverse of serialization; the code is its own minimal pattern.
inline TriadPattern decode_class(const SubgraphClass& cls) {
  TriadPattern p;
  p.directed = cls.code[0] != 0;
  for (int i = 0; i < 3; ++i) {
    p.node_labels[i] = detail::get_u16(&cls.code[1 + 2 * i]);
  }
  int at = 7;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      p.slots[TriadPattern::slot_index(i, j)] = detail::get_u16(&cls.code[at]);
      at += 2;
    }
  }
  return p;
}

namespace detail {

// Applies one adjacency entry to the slots of pattern nodes (ui, vi), where
// `e` lives on u's neighbor list and covers v.
inline void apply_entry(TriadPattern& p, const AdjEntry* e, int ui, int vi) {
  if (!e) return;
  if (e->dir & kOut) {
    p.slots[TriadPattern::slot_index(ui, vi)] = static_cast<std::uint16_t>(e->out_label + 1);
  }
  if (e->dir & kIn) {
    p.slots[TriadPattern::slot_index(vi, ui)] = static_cast<std::uint16_t>(e->in_label + 1);
  }
}

}  // namespace detail

inline TriadPattern pattern_of_triple(const HeteroGraph& g, NodeId a, NodeId b, NodeId c) {
  TriadPattern p;
  p.directed = g.directed();
  p.node_labels = {g.node_label(a), g.node_label(b), g.node_label(c)};
  detail::apply_entry(p, g.find_edge(a, b), 0, 1);
  detail::apply_entry(p, g.find_edge(a, c), 0, 2);
  detail::apply_entry(p, g.find_edge(b, c), 1, 2);
  return p;
}

// Canonical class of the induced subgraph on a weakly connected node triple.
inline SubgraphClass canonical_class(const HeteroGraph& g, NodeId a, NodeId b, NodeId c) {
  if (a == b || a == c || b == c) {
    throw StructuralError("triple nodes must be distinct");
  }
  TriadPattern p = pattern_of_triple(g, a, b, c);
  if (!p.connected()) {
    throw StructuralError("triple is not weakly connected");
  }
  return canonicalize(p);
}

// Human-readable class rendering, e.g. "[client,client,merchant] 0-1:legit 0-2:fraud"
// or "[fraud,legit,legit] 0>1:client 1<>2:client+merchant".
inline std::string describe_class(const SubgraphClass& cls,
                                  const std::vector<std::string>& node_vocab,
                                  const std::vector<std::string>& edge_vocab) {
  const TriadPattern p = decode_class(cls);
  auto node_name = [&](LabelId l) {
    return l < node_vocab.size() ? node_vocab[l] : "?" + std::to_string(l);
  };
  auto edge_name = [&](std::uint16_t slot) {
    const std::uint16_t l = slot - 1;
    return l < edge_vocab.size() ? edge_vocab[l] : "?" + std::to_string(l);
  };
  std::string out = "[";
  for (int i = 0; i < 3; ++i) {
    if (i) out += ',';
    out += node_name(p.node_labels[i]);
  }
  out += ']';
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const std::uint16_t fwd = p.slots[TriadPattern::slot_index(i, j)];
      const std::uint16_t rev = p.slots[TriadPattern::slot_index(j, i)];
      if (!fwd && !rev) continue;
      out += ' ';
      if (!p.directed) {
        out += std::to_string(i) + "-" + std::to_string(j) + ":" + edge_name(fwd);
      } else if (fwd && rev && fwd == rev) {
        out += std::to_string(i) + "<>" + std::to_string(j) + ":" + edge_name(fwd);
      } else {
        if (fwd) out += std::to_string(i) + ">" + std::to_string(j) + ":" + edge_name(fwd);
        if (fwd && rev) out += ' ';
        if (rev) out += std::to_string(j) + ">" + std::to_string(i) + ":" + edge_name(rev);
      }
    }
  }
  return out;
}

struct CensusResult {
  std::map<SubgraphClass, std::uint64_t> counts;
  std::string graph_id = "original";

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [cls, n] : counts) t += n;
    return t;
  }

  bool operator==(const CensusResult&) const = default;
};

// Census of all connected induced 3-node subgraphs. Enumeration extends each
// node with larger-id neighbors and exclusive neighbors-of-neighbors, so
// every connected triple is visited exactly once; occurrences are induced
// (absent edges distinguish a path from a triangle). Read-only on the graph.
inline CensusResult census_k3(const HeteroGraph& g, std::string graph_id = "original") {
  CensusResult result;
  result.graph_id = std::move(graph_id);
  std::unordered_map<SubgraphClass, std::uint64_t, SubgraphClassHash> counts;

  const std::size_t n = g.n_nodes();
  std::vector<NodeId> mark(n, 0);  // mark[x] == v+1  <=>  x in N(v)
  std::vector<const AdjEntry*> ext;

  TriadPattern p;
  p.directed = g.directed();
  auto count_triple = [&](NodeId v, NodeId w, NodeId x, const AdjEntry* e_vw,
                          const AdjEntry* e_vx, const AdjEntry* e_wx) {
    p.node_labels = {g.node_label(v), g.node_label(w), g.node_label(x)};
    p.slots = {};
    detail::apply_entry(p, e_vw, 0, 1);
    detail::apply_entry(p, e_vx, 0, 2);
    detail::apply_entry(p, e_wx, 1, 2);
    ++counts[canonicalize(p)];
  };

  for (NodeId v = 0; v < n; ++v) {
    const auto& nv = g.neighbors(v);
    ext.clear();
    for (const AdjEntry& e : nv) {
      mark[e.nbr] = v + 1;
      if (e.nbr > v) ext.push_back(&e);
    }
    for (std::size_t i = 0; i < ext.size(); ++i) {
      const NodeId w = ext[i]->nbr;
      // Both second and third vertex adjacent to v.
      for (std::size_t j = i + 1; j < ext.size(); ++j) {
        const NodeId x = ext[j]->nbr;
        count_triple(v, w, x, ext[i], ext[j], g.find_edge(w, x));
      }
      // Third vertex adjacent to w only.
      for (const AdjEntry& e : g.neighbors(w)) {
        if (e.nbr > v && mark[e.nbr] != v + 1) {
          count_triple(v, w, e.nbr, ext[i], nullptr, &e);
        }
      }
    }
  }

  for (const auto& [cls, c] : counts) result.counts.emplace(cls, c);
  return result;
}

// One census per graph, order-preserving. All graphs must share directedness
// and label vocabularies.
inline std::vector<CensusResult> census_ensemble(const std::vector<HeteroGraph>& graphs,
                                                 const std::string& id_prefix = "replica_") {
  std::vector<CensusResult> results;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].directed() != graphs[0].directed() ||
        graphs[i].node_label_vocab() != graphs[0].node_label_vocab() ||
        graphs[i].edge_label_vocab() != graphs[0].edge_label_vocab()) {
      throw ConfigError("ensemble graphs must share directedness and label vocabularies");
    }
    results.push_back(census_k3(graphs[i], id_prefix + std::to_string(i)));
  }
  return results;
}

inline void write_census_csv(std::ostream& out, const CensusResult& census,
                             const std::vector<std::string>& node_vocab,
                             const std::vector<std::string>& edge_vocab) {
  write_csv_row(out, {"graph_id", "canonical_code", "description", "count"});
  for (const auto& [cls, count] : census.counts) {
    write_csv_row(out, {census.graph_id, cls.hex(), describe_class(cls, node_vocab, edge_vocab),
                        std::to_string(count)});
  }
}

inline CensusResult read_census_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.empty() || row[0] != "graph_id") {
    throw IoError("not a census file: missing header");
  }
  CensusResult census;
  bool first = true;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 4) throw RowError(reader.line(), "expected 4 fields");
    auto cls = SubgraphClass::from_hex(row[1]);
    if (!cls) throw RowError(reader.line(), "bad canonical code \"" + row[1] + "\"");
    if (first) {
      census.graph_id = row[0];
      first = false;
    }
    census.counts[*cls] = std::stoull(row[3]);
  }
  return census;
}

}  // namespace txmotif
