#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "txmotif/csv.hpp"
#include "txmotif/errors.hpp"
#include "txmotif/rng.hpp"
#include "txmotif/timefmt.hpp"

namespace txmotif {

// One row of tabular transaction data.
struct TransactionRecord {
  std::string txn_id;
  std::int64_t timestamp = 0;  // epoch seconds
  std::vector<std::string> entities;  // one value per entity type, all non-empty
  bool is_fraud = false;

  bool operator==(const TransactionRecord&) const = default;
};

struct TabularDataset {
  std::vector<TransactionRecord> records;
  std::vector<std::string> entity_types;

  std::size_t size() const { return records.size(); }

  std::optional<std::size_t> entity_type_index(std::string_view name) const {
    for (std::size_t i = 0; i < entity_types.size(); ++i) {
      if (entity_types[i] == name) return i;
    }
    return std::nullopt;
  }

  bool operator==(const TabularDataset&) const = default;
};

// Maps logical columns to header names. Entity columns are ordered; their
// order defines the dataset's entity_types.
struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string fraud_column = "is_fraud";
  std::vector<std::pair<std::string, std::string>> entity_columns = {
      {"client", "client"}, {"card", "card"}, {"merchant", "merchant"}, {"terminal", "terminal"}};
  std::string id_column = "txn_id";  // empty: ids are row ordinals
  char delimiter = ',';
};

// Parses "timestamp=ts,fraud=f,id=txn,client=client_id,merchant=mrc".
// Keys other than timestamp/fraud/id declare entity columns, in order.
inline CsvSchema parse_schema(const std::string& text, char delimiter = ',') {
  CsvSchema schema;
  schema.delimiter = delimiter;
  schema.entity_columns.clear();
  schema.id_column.clear();
  bool have_timestamp = false, have_fraud = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw SchemaError("schema item \"" + item + "\" is not key=column");
    }
    std::string key = item.substr(0, eq);
    std::string col = item.substr(eq + 1);
    if (key.empty() || col.empty()) {
      throw SchemaError("schema item \"" + item + "\" has an empty key or column");
    }
    if (key == "timestamp") {
      schema.timestamp_column = col;
      have_timestamp = true;
    } else if (key == "fraud") {
      schema.fraud_column = col;
      have_fraud = true;
    } else if (key == "id") {
      schema.id_column = col;
    } else {
      schema.entity_columns.emplace_back(key, col);
    }
    if (end == text.size()) break;
  }
  if (!have_timestamp) throw SchemaError("schema is missing the timestamp column");
  if (!have_fraud) throw SchemaError("schema is missing the fraud column");
  if (schema.entity_columns.empty()) throw SchemaError("schema declares no entity columns");
  return schema;
}

namespace detail {

inline std::size_t column_index(const std::vector<std::string>& header,
                                const std::string& column, const std::string& logical) {
  auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw SchemaError("missing column \"" + column + "\" for \"" + logical + "\"");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace detail

inline TabularDataset load_transactions(std::istream& in, const CsvSchema& schema) {
  if (schema.entity_columns.empty()) throw SchemaError("schema declares no entity columns");
  CsvReader reader(in, schema.delimiter);
  std::vector<std::string> header;
  if (!reader.next_row(header)) throw SchemaError("input has no header row");

  const std::size_t ts_col = detail::column_index(header, schema.timestamp_column, "timestamp");
  const std::size_t fraud_col = detail::column_index(header, schema.fraud_column, "fraud");
  std::optional<std::size_t> id_col;
  if (!schema.id_column.empty()) {
    id_col = detail::column_index(header, schema.id_column, "id");
  }
  std::vector<std::size_t> entity_cols;
  TabularDataset data;
  for (const auto& [logical, column] : schema.entity_columns) {
    entity_cols.push_back(detail::column_index(header, column, logical));
    data.entity_types.push_back(logical);
  }

  std::unordered_set<std::string> seen_ids;
  std::vector<std::string> row;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != header.size()) {
      throw RowError(reader.line(), "expected " + std::to_string(header.size()) +
                                        " fields, got " + std::to_string(row.size()));
    }
    TransactionRecord rec;
    auto ts = parse_timestamp(row[ts_col]);
    if (!ts) throw RowError(reader.line(), "unparseable timestamp \"" + row[ts_col] + "\"");
    rec.timestamp = *ts;
    auto fraud = parse_bool_flag(row[fraud_col]);
    if (!fraud) throw RowError(reader.line(), "unparseable fraud flag \"" + row[fraud_col] + "\"");
    rec.is_fraud = *fraud;
    rec.txn_id = id_col ? row[*id_col] : std::to_string(data.records.size());
    for (std::size_t i = 0; i < entity_cols.size(); ++i) {
      const std::string& value = row[entity_cols[i]];
      if (value.empty()) {
        throw RowError(reader.line(), "empty value for entity \"" + data.entity_types[i] + "\"");
      }
      rec.entities.push_back(value);
    }
    if (!seen_ids.insert(rec.txn_id).second) {
      throw DatasetError("duplicate txn_id \"" + rec.txn_id + "\"");
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

inline TabularDataset load_transactions(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  return load_transactions(in, schema);
}

// Writes the same delimited format load_transactions reads:
// txn_id, timestamp (RFC 3339), entity columns, is_fraud.
inline void write_transactions(std::ostream& out, const TabularDataset& data,
                               char delimiter = ',') {
  std::vector<std::string> row = {"txn_id", "timestamp"};
  row.insert(row.end(), data.entity_types.begin(), data.entity_types.end());
  row.push_back("is_fraud");
  write_csv_row(out, row, delimiter);
  for (const auto& rec : data.records) {
    row = {rec.txn_id, format_rfc3339(rec.timestamp)};
    row.insert(row.end(), rec.entities.begin(), rec.entities.end());
    row.push_back(rec.is_fraud ? "1" : "0");
    write_csv_row(out, row, delimiter);
  }
}

inline void write_transactions(const std::string& path, const TabularDataset& data,
                               char delimiter = ',') {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write \"" + path + "\"");
  write_transactions(out, data, delimiter);
}

struct RandomizationConfig {
  double rho = 0.8;  // in [0, 1]: fraction of m used as swap budget per entity column
  std::uint64_t seed = 0;
  bool shuffle_fraud = true;
};

// Number of swap pairs drawn per entity column: floor(rho * m), with a small
// epsilon so exact products like 0.3 * 10 do not round down.
inline std::size_t swap_pair_count(double rho, std::size_t m) {
  return static_cast<std::size_t>(std::floor(rho * static_cast<double>(m) + 1e-6));
}

// Tabular null model. Step 1 permutes the fraud column (a shuffle, so the
// fraud rate is conserved); step 2 draws floor(rho*m) uniformly random row
// pairs per entity column, independently for each column, and exchanges the
// two rows' values. Each column's value multiset, m, txn_ids, and timestamps
// are all unchanged. Pairs are drawn with replacement; i == j is excluded.
inline TabularDataset randomize_dataset(const TabularDataset& data,
                                        const RandomizationConfig& cfg) {
  if (cfg.rho < 0.0 || cfg.rho > 1.0) {
    throw ConfigError("rho must be in [0, 1]");
  }
  TabularDataset out = data;
  const std::size_t m = out.records.size();
  Rng rng(cfg.seed);

  if (cfg.shuffle_fraud && m > 1) {
    std::vector<char> flags(m);
    for (std::size_t i = 0; i < m; ++i) flags[i] = out.records[i].is_fraud;
    rng.shuffle(flags);
    for (std::size_t i = 0; i < m; ++i) out.records[i].is_fraud = flags[i] != 0;
  }

  if (m < 2) return out;
  const std::size_t swaps = swap_pair_count(cfg.rho, m);
  for (std::size_t col = 0; col < out.entity_types.size(); ++col) {
    for (std::size_t s = 0; s < swaps; ++s) {
      auto [i, j] = rng.distinct_pair(m);
      std::swap(out.records[i].entities[col], out.records[j].entities[col]);
    }
  }
  return out;
}

}  // namespace txmotif
