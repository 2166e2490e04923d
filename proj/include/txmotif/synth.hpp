#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "txmotif/errors.hpp"
#include "txmotif/rng.hpp"
#include "txmotif/tabular.hpp"
#include "txmotif/timefmt.hpp"

namespace txmotif {

enum class PatternKind {
  same_client_merchant,  // one client repeats at one merchant within a window
  client_fanout,         // one client hits distinct merchants within a window
  same_timestamp_burst,  // distinct clients at one merchant, identical timestamp
};

struct PlantedPattern {
  PatternKind kind = PatternKind::same_client_merchant;
  int txn_count = 3;
  std::int64_t window_seconds = 6 * 3600;
  int instances = 1;
  bool fraud = true;
};

// "same_client_merchant,count=3,window=6h,instances=12,fraud=1"
inline PlantedPattern parse_pattern(const std::string& text) {
  PlantedPattern p;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    pos = end + 1;
    if (first) {
      if (item == "same_client_merchant") {
        p.kind = PatternKind::same_client_merchant;
      } else if (item == "client_fanout") {
        p.kind = PatternKind::client_fanout;
      } else if (item == "same_timestamp_burst") {
        p.kind = PatternKind::same_timestamp_burst;
      } else {
        throw ConfigError("unknown pattern kind \"" + item + "\"");
      }
      first = false;
    } else if (!item.empty()) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("pattern item \"" + item + "\" is not key=value");
      std::string key = item.substr(0, eq);
      std::string value = item.substr(eq + 1);
      if (key == "count") {
        p.txn_count = std::stoi(value);
      } else if (key == "window") {
        auto d = parse_duration(value);
        if (!d) throw ConfigError("bad pattern window \"" + value + "\"");
        p.window_seconds = *d;
      } else if (key == "instances") {
        p.instances = std::stoi(value);
      } else if (key == "fraud") {
        auto b = parse_bool_flag(value);
        if (!b) throw ConfigError("bad pattern fraud flag \"" + value + "\"");
        p.fraud = *b;
      } else {
        throw ConfigError("unknown pattern key \"" + key + "\"");
      }
    }
    if (end == text.size()) break;
  }
  if (p.txn_count < 2) throw ConfigError("pattern count must be at least 2");
  if (p.instances < 1) throw ConfigError("pattern instances must be at least 1");
  if (p.window_seconds <= 0) throw ConfigError("pattern window must be positive");
  return p;
}

struct SynthConfig {
  std::size_t n_clients = 1000;
  std::size_t n_cards = 1500;
  std::size_t n_merchants = 200;
  std::size_t n_terminals = 400;
  std::size_t m = 10000;
  double fraud_rate = 0.002;
  std::int64_t time_span_seconds = 30 * 86400;
  std::int64_t start_time = 1672531200;  // 2023-01-01T00:00:00Z
  double zipf_exponent = 1.2;  // heavy tail so hub entities exist
  std::vector<PlantedPattern> planted;
  std::uint64_t seed = 1;
};

namespace detail {

// Zipf-like sampler over 0..n-1: P(i) proportional to 1/(i+1)^s.
class ZipfSampler {
public:
  ZipfSampler(std::size_t n, double exponent) : cumulative_(n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cumulative_[i] = sum;
    }
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.real01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

private:
  std::vector<double> cumulative_;
};

}  // namespace detail

// Generates m transactions over client/card/merchant/terminal entities.
// Cards map many-to-one onto clients and terminals onto merchants with small
// fan-out; background rows draw client and merchant popularity from a
// Zipf-like tail; planted pattern rows are injected verbatim. The fraud
// count is round(fraud_rate * m), planted fraud included. Deterministic by
// seed.
inline TabularDataset generate(const SynthConfig& cfg) {
  if (cfg.n_clients == 0 || cfg.n_cards == 0 || cfg.n_merchants == 0 || cfg.n_terminals == 0) {
    throw ConfigError("entity counts must be positive");
  }
  if (cfg.fraud_rate <= 0.0 || cfg.fraud_rate >= 1.0) {
    throw ConfigError("fraud_rate must be in (0, 1)");
  }
  if (cfg.time_span_seconds <= 0) throw ConfigError("time_span must be positive");

  std::size_t planted_rows = 0;
  for (const PlantedPattern& p : cfg.planted) {
    if (p.kind == PatternKind::client_fanout &&
        static_cast<std::size_t>(p.txn_count) > cfg.n_merchants) {
      throw ConfigError("client_fanout needs more merchants than exist");
    }
    if (p.kind == PatternKind::same_timestamp_burst &&
        static_cast<std::size_t>(p.txn_count) > cfg.n_clients) {
      throw ConfigError("same_timestamp_burst needs more clients than exist");
    }
    planted_rows += static_cast<std::size_t>(p.txn_count) * p.instances;
  }
  if (planted_rows > cfg.m) {
    throw ConfigError("planted patterns need " + std::to_string(planted_rows) +
                      " rows but m is " + std::to_string(cfg.m));
  }

  TabularDataset data;
  data.entity_types = {"client", "card", "merchant", "terminal"};

  // Fixed many-to-one assignments: card i belongs to client i mod n_clients,
  // terminal i to merchant i mod n_merchants.
  std::vector<std::vector<std::size_t>> cards_of(cfg.n_clients);
  for (std::size_t i = 0; i < cfg.n_cards; ++i) cards_of[i % cfg.n_clients].push_back(i);
  std::vector<std::vector<std::size_t>> terminals_of(cfg.n_merchants);
  for (std::size_t i = 0; i < cfg.n_terminals; ++i) terminals_of[i % cfg.n_merchants].push_back(i);

  auto client_id = [](std::size_t i) { return "C" + std::to_string(i); };
  auto card_id = [](std::size_t i) { return "K" + std::to_string(i); };
  auto merchant_id = [](std::size_t i) { return "M" + std::to_string(i); };
  auto terminal_id = [](std::size_t i) { return "T" + std::to_string(i); };

  Rng rng(cfg.seed);
  auto card_for = [&](std::size_t client) {
    const auto& cards = cards_of[client];
    if (cards.empty()) return rng.below(cfg.n_cards);
    return static_cast<std::uint64_t>(cards[rng.below(cards.size())]);
  };
  auto terminal_for = [&](std::size_t merchant) {
    const auto& terms = terminals_of[merchant];
    if (terms.empty()) return rng.below(cfg.n_terminals);
    return static_cast<std::uint64_t>(terms[rng.below(terms.size())]);
  };

  struct Row {
    std::int64_t ts;
    std::size_t order;
    std::array<std::size_t, 4> entity;
    bool fraud;
    bool planted;
  };
  std::vector<Row> rows;
  rows.reserve(cfg.m);
  std::size_t order = 0;

  for (const PlantedPattern& p : cfg.planted) {
    for (int inst = 0; inst < p.instances; ++inst) {
      const std::int64_t span = std::max<std::int64_t>(1, cfg.time_span_seconds - p.window_seconds);
      const std::int64_t base = cfg.start_time + static_cast<std::int64_t>(rng.below(span));
      const std::size_t client = rng.below(cfg.n_clients);
      const std::size_t merchant = rng.below(cfg.n_merchants);
      // Distinct merchants for the fan-out shape.
      std::vector<std::size_t> fan;
      if (p.kind == PatternKind::client_fanout) {
        while (fan.size() < static_cast<std::size_t>(p.txn_count)) {
          std::size_t mch = rng.below(cfg.n_merchants);
          if (std::find(fan.begin(), fan.end(), mch) == fan.end()) fan.push_back(mch);
        }
      }
      std::vector<std::size_t> burst_clients;
      if (p.kind == PatternKind::same_timestamp_burst) {
        while (burst_clients.size() < static_cast<std::size_t>(p.txn_count)) {
          std::size_t cl = rng.below(cfg.n_clients);
          if (std::find(burst_clients.begin(), burst_clients.end(), cl) == burst_clients.end()) {
            burst_clients.push_back(cl);
          }
        }
      }
      for (int t = 0; t < p.txn_count; ++t) {
        Row row;
        row.order = order++;
        row.fraud = p.fraud;
        row.planted = true;
        switch (p.kind) {
          case PatternKind::same_client_merchant:
            row.ts = base + p.window_seconds * t / p.txn_count;
            row.entity = {client, card_for(client), merchant, terminal_for(merchant)};
            break;
          case PatternKind::client_fanout:
            row.ts = base + p.window_seconds * t / p.txn_count;
            row.entity = {client, card_for(client), fan[t], terminal_for(fan[t])};
            break;
          case PatternKind::same_timestamp_burst:
            row.ts = base;
            row.entity = {burst_clients[t], card_for(burst_clients[t]), merchant,
                          terminal_for(merchant)};
            break;
        }
        rows.push_back(row);
      }
    }
  }

  const detail::ZipfSampler client_pop(cfg.n_clients, cfg.zipf_exponent);
  const detail::ZipfSampler merchant_pop(cfg.n_merchants, cfg.zipf_exponent);
  while (rows.size() < cfg.m) {
    Row row;
    row.order = order++;
    row.ts = cfg.start_time + static_cast<std::int64_t>(rng.below(cfg.time_span_seconds));
    const std::size_t client = client_pop.sample(rng);
    const std::size_t merchant = merchant_pop.sample(rng);
    row.entity = {client, card_for(client), merchant, terminal_for(merchant)};
    row.fraud = false;
    row.planted = false;
    rows.push_back(row);
  }

  // Background fraud quota tops planted fraud up to round(fraud_rate * m).
  std::size_t planted_fraud = 0;
  std::vector<std::size_t> background;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].planted) {
      planted_fraud += rows[i].fraud;
    } else {
      background.push_back(i);
    }
  }
  const std::size_t target_fraud =
      static_cast<std::size_t>(std::llround(cfg.fraud_rate * static_cast<double>(cfg.m)));
  if (target_fraud > planted_fraud) {
    std::size_t quota = std::min(target_fraud - planted_fraud, background.size());
    rng.shuffle(background);
    for (std::size_t i = 0; i < quota; ++i) rows[background[i]].fraud = true;
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.ts != b.ts ? a.ts < b.ts : a.order < b.order;
  });

  data.records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    TransactionRecord rec;
    rec.txn_id = "S" + std::to_string(i);
    rec.timestamp = rows[i].ts;
    rec.entities = {client_id(rows[i].entity[0]), card_id(rows[i].entity[1]),
                    merchant_id(rows[i].entity[2]), terminal_id(rows[i].entity[3])};
    rec.is_fraud = rows[i].fraud;
    data.records.push_back(std::move(rec));
  }
  return data;
}

}  // namespace txmotif
