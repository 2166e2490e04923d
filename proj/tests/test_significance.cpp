#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "txmotif/significance.hpp"

using namespace txmotif;
using Catch::Approx;

namespace {

// Distinct canonical classes: an undirected path whose endpoint label varies.
SubgraphClass make_class(std::uint16_t v) {
  TriadPattern p;
  p.directed = false;
  p.node_labels = {0, 0, v};
  p.slots.fill(0);
  p.slots[TriadPattern::slot_index(0, 1)] = 1;
  p.slots[TriadPattern::slot_index(1, 0)] = 1;
  p.slots[TriadPattern::slot_index(1, 2)] = 1;
  p.slots[TriadPattern::slot_index(2, 1)] = 1;
  return canonicalize(p);
}

ClassStats stats_with(double ratio, std::uint64_t f, double mu, bool infinite = false) {
  ClassStats s;
  s.ratio = ratio;
  s.ratio_infinite = infinite;
  if (infinite) s.ratio = std::numeric_limits<double>::infinity();
  s.f_original = f;
  s.mu = mu;
  return s;
}

}  // namespace

TEST_CASE("zscore matches the closed form") {
  CHECK(zscore(10.0, 5.0, 2.5) == 2.0);
  CHECK(zscore(3.0, 5.0, 1.0) == -2.0);
}

TEST_CASE("class_stats on a constant ensemble equal to the original") {
  const ClassStats s = class_stats(10, {10, 10, 10});
  CHECK(s.mu == 10.0);
  CHECK(s.sigma == 0.0);
  CHECK(s.z_flag == ZFlag::undefined_equal);
  CHECK(s.ratio == 1.0);
  CHECK_FALSE(s.ratio_infinite);
  CHECK(s.n_replicas == 3);
}

TEST_CASE("class_stats flags the z sign when sigma vanishes") {
  const ClassStats above = class_stats(10, {5, 5, 5, 5});
  CHECK(above.mu == 5.0);
  CHECK(above.sigma == 0.0);
  CHECK(above.z_flag == ZFlag::undefined_above);
  CHECK(above.ratio == 2.0);

  const ClassStats below = class_stats(2, {5, 5, 5});
  CHECK(below.z_flag == ZFlag::undefined_below);
  CHECK(below.ratio == Approx(0.4).epsilon(1e-15));
}

TEST_CASE("class_stats marks an all-zero ensemble as infinite ratio") {
  const ClassStats s = class_stats(7, {0, 0, 0});
  CHECK(s.mu == 0.0);
  CHECK(s.ratio_infinite);
  CHECK(std::isinf(s.ratio));
  CHECK(s.z_flag == ZFlag::undefined_above);

  const ClassStats lap = class_stats(7, {0, 0, 0}, true);
  CHECK_FALSE(lap.ratio_infinite);
  CHECK(lap.ratio == 8.0);  // (7+1)/(0+1)

  const ClassStats zero = class_stats(0, {0, 0});
  CHECK(zero.ratio_infinite);
  CHECK(zero.z_flag == ZFlag::undefined_equal);
}

TEST_CASE("class_stats closed-form mean, deviation, and z") {
  const ClassStats s = class_stats(17, {3, 5, 7, 9});
  CHECK(s.mu == Approx(6.0).epsilon(1e-12));
  CHECK(s.sigma == Approx(std::sqrt(5.0)).epsilon(1e-12));
  REQUIRE(s.z_flag == ZFlag::defined);
  CHECK(s.z == Approx(11.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(s.ratio == Approx(17.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("welford deviation agrees with the two-pass formula") {
  Rng rng(211);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::uint64_t> counts;
    const std::size_t n = 1 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) counts.push_back(rng.below(1000));
    const ClassStats s = class_stats(counts[0], counts);
    const double expected = oracle::two_pass_sigma(counts);
    CHECK(s.sigma == Approx(expected).margin(1e-9));
  }
}

TEST_CASE("class_stats requires at least one replica") {
  CHECK_THROWS_AS(class_stats(1, {}), ConfigError);
}

TEST_CASE("ratio_evolution tracks the running mean") {
  const std::vector<double> one = ratio_evolution(10, {5});
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 2.0);

  const std::vector<double> two = ratio_evolution(10, {5, 15});
  REQUIRE(two.size() == 2);
  CHECK(two[0] == 2.0);
  CHECK(two[1] == 1.0);

  const std::vector<double> constant = ratio_evolution(12, {4, 4, 4, 4});
  for (double v : constant) CHECK(v == 3.0);
}

TEST_CASE("ratio_evolution final point agrees with the overall ratio") {
  Rng rng(223);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> counts;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) counts.push_back(rng.below(50));
    const std::uint64_t f = rng.below(60);
    const ClassStats s = class_stats(f, counts);
    const std::vector<double> series = ratio_evolution(f, counts);
    REQUIRE(series.size() == n);
    if (s.ratio_infinite) {
      CHECK((std::isinf(series.back()) || std::isnan(series.back())));
    } else {
      CHECK(series.back() == Approx(s.ratio).epsilon(1e-12));
    }
  }
}

TEST_CASE("ratio_evolution marks zero-mean prefixes instead of dropping them") {
  const std::vector<double> s = ratio_evolution(10, {0, 0, 5});
  REQUIRE(s.size() == 3);
  CHECK(std::isinf(s[0]));
  CHECK(std::isinf(s[1]));
  CHECK(s[2] == Approx(6.0).epsilon(1e-12));  // 10 / (5/3)

  const std::vector<double> z = ratio_evolution(0, {0, 2});
  REQUIRE(z.size() == 2);
  CHECK(std::isnan(z[0]));
  CHECK(z[1] == 0.0);

  const std::vector<double> lap = ratio_evolution(10, {0, 0}, true);
  CHECK(lap[0] == 11.0);  // (10+1)/(0+1), finite under smoothing
}

TEST_CASE("select_motifs applies thresholds, support, and ordering") {
  std::map<SubgraphClass, ClassStats> classes;
  const SubgraphClass inf_cls = make_class(1);
  const SubgraphClass hi_small = make_class(2);
  const SubgraphClass hi_big = make_class(3);
  const SubgraphClass mid = make_class(4);
  const SubgraphClass low_a = make_class(5);
  const SubgraphClass low_b = make_class(6);
  const SubgraphClass low_thin = make_class(7);
  const SubgraphClass hi_thin = make_class(8);
  classes[inf_cls] = stats_with(0.0, 12, 0.0, true);
  classes[hi_small] = stats_with(150.0, 30, 0.2);
  classes[hi_big] = stats_with(150.0, 40, 0.25);
  classes[mid] = stats_with(1.0, 500, 500.0);
  classes[low_a] = stats_with(0.005, 0, 10.0);
  classes[low_b] = stats_with(0.004, 0, 8.0);
  classes[low_thin] = stats_with(0.005, 0, 3.0);  // mu below support
  classes[hi_thin] = stats_with(120.0, 3, 0.02);  // f below support

  const auto [motifs, anti] = select_motifs(classes, SelectionParams{});
  REQUIRE(motifs.size() == 3);
  CHECK(motifs[0] == inf_cls);  // infinite ratio sorts first
  CHECK(motifs[1] == hi_big);   // ratio tie broken by larger f
  CHECK(motifs[2] == hi_small);
  REQUIRE(anti.size() == 2);
  CHECK(anti[0] == low_b);  // ascending ratio
  CHECK(anti[1] == low_a);
}

TEST_CASE("select_motifs validates thresholds") {
  const std::map<SubgraphClass, ClassStats> empty;
  SelectionParams p;
  p.motif_ratio_min = 0.0;
  CHECK_THROWS_AS(select_motifs(empty, p), ConfigError);
  p = SelectionParams{};
  p.antimotif_ratio_max = -1.0;
  CHECK_THROWS_AS(select_motifs(empty, p), ConfigError);
  p = SelectionParams{};
  p.motif_ratio_min = 0.005;  // below the anti threshold: sets would overlap
  CHECK_THROWS_AS(select_motifs(empty, p), ConfigError);

  const auto [m, a] = select_motifs(empty, SelectionParams{});
  CHECK(m.empty());
  CHECK(a.empty());
}

TEST_CASE("a ratio of exactly 1 in a flat ensemble is never a motif or anti-motif") {
  std::map<SubgraphClass, ClassStats> classes;
  classes[make_class(1)] = stats_with(1.0, 100, 100.0);
  const auto [motifs, anti] = select_motifs(classes, SelectionParams{});
  CHECK(motifs.empty());
  CHECK(anti.empty());
}

TEST_CASE("build_report aligns classes across censuses with zero fill") {
  const SubgraphClass x = make_class(0);
  const SubgraphClass y = make_class(1);
  const SubgraphClass z = make_class(2);
  CensusResult original;
  original.graph_id = "original";
  original.counts[x] = 10;
  original.counts[z] = 3;
  CensusResult r0;
  r0.graph_id = "replica_0";
  r0.counts[x] = 5;
  CensusResult r1;
  r1.graph_id = "replica_1";
  r1.counts[x] = 15;
  r1.counts[y] = 4;

  const SignificanceReport report =
      build_report(original, {r0, r1}, false, {"legit", "fraud"}, {"edge"});
  REQUIRE(report.classes.size() == 3);

  const ClassStats& sx = report.classes.at(x);
  CHECK(sx.mu == 10.0);
  CHECK(sx.sigma == 5.0);
  REQUIRE(sx.z_flag == ZFlag::defined);
  CHECK(sx.z == 0.0);
  CHECK(sx.ratio == 1.0);

  const ClassStats& sy = report.classes.at(y);  // absent from the original
  CHECK(sy.f_original == 0);
  CHECK(sy.mu == 2.0);
  CHECK(sy.sigma == 2.0);
  CHECK(sy.z == -1.0);
  CHECK(sy.ratio == 0.0);

  const ClassStats& sz = report.classes.at(z);  // absent from every replica
  CHECK(sz.ratio_infinite);
  CHECK(sz.z_flag == ZFlag::undefined_above);

  const std::vector<double>& ex = report.evolution.at(x);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0] == 2.0);
  CHECK(ex[1] == 1.0);
  const std::vector<double>& ey = report.evolution.at(y);
  CHECK(std::isnan(ey[0]));
  CHECK(ey[1] == 0.0);

  // z has f=3 < min_support, so the infinite ratio alone earns nothing.
  CHECK(report.motifs.empty());
  CHECK(report.anti_motifs.empty());

  CHECK_THROWS_AS(build_report(original, {}, false, {}, {}), ConfigError);
}

TEST_CASE("report JSON round-trips exactly") {
  const SubgraphClass x = make_class(0);
  const SubgraphClass z = make_class(2);
  CensusResult original;
  original.counts[x] = 40;
  original.counts[z] = 9;
  std::vector<CensusResult> replicas(4);
  for (std::size_t i = 0; i < replicas.size(); ++i) {
    replicas[i].graph_id = "replica_" + std::to_string(i);
    replicas[i].counts[x] = i;  // 0,1,2,3 -> mu=1.5
  }
  SelectionParams params;
  params.motif_ratio_min = 5.0;
  params.antimotif_ratio_max = 0.1;
  params.min_support = 2;
  const SignificanceReport report =
      build_report(original, replicas, true, {"legit", "fraud"}, {"client"}, params);

  // x: ratio 40/1.5 >= 5 -> motif. z: infinite ratio, f=9 >= 2 -> motif, first.
  REQUIRE(report.motifs.size() == 2);
  CHECK(report.motifs[0] == z);
  CHECK(report.motifs[1] == x);

  const nlohmann::json j = report_to_json(report);
  CHECK(j.at("sigma_definition") == "population");
  CHECK(j.at("classes").at(z.hex()).at("ratio").is_null());
  CHECK(j.at("classes").at(z.hex()).at("z").is_null());
  CHECK(j.at("classes").at(x.hex()).at("f") == 40);

  const SignificanceReport back = report_from_json(j);
  CHECK(report_to_json(back) == j);
  CHECK(back.motifs == report.motifs);
  CHECK(back.anti_motifs == report.anti_motifs);
  CHECK(back.n_replicas == 4);
  CHECK(back.selection.min_support == 2);
  CHECK(back.laplace_smoothing == false);
  CHECK(back.directed == true);
}

TEST_CASE("significance CSV leaves z blank when undefined and spells inf ratios") {
  const SubgraphClass x = make_class(0);
  const SubgraphClass z = make_class(2);
  CensusResult original;
  original.counts[x] = 10;
  original.counts[z] = 7;
  CensusResult r0, r1;
  r0.counts[x] = 8;
  r1.counts[x] = 12;
  const SignificanceReport report =
      build_report(original, {r0, r1}, false, {"legit"}, {"edge"});

  std::ostringstream out;
  write_significance_csv(out, report);
  std::istringstream in(out.str());
  CsvReader reader(in);
  std::vector<std::string> row;
  REQUIRE(reader.next_row(row));
  CHECK(row == std::vector<std::string>{"canonical_code", "description", "f", "mu", "sigma", "z",
                                        "z_flag", "ratio", "motif", "anti_motif"});
  std::size_t rows = 0;
  bool saw_blank_z = false, saw_inf = false;
  while (reader.next_row(row)) {
    REQUIRE(row.size() == 10);
    ++rows;
    if (row[0] == z.hex()) {
      CHECK(row[5].empty());
      CHECK(row[6] == "above");
      CHECK(row[7] == "inf");
      saw_blank_z = true;
      saw_inf = true;
    } else {
      CHECK(row[6] == "defined");
    }
  }
  CHECK(rows == 2);
  CHECK(saw_blank_z);
  CHECK(saw_inf);
}

TEST_CASE("ratio evolution CSV is long-format with 1-based t") {
  const SubgraphClass x = make_class(0);
  CensusResult original;
  original.counts[x] = 6;
  CensusResult r0, r1, r2;
  r0.counts[x] = 3;
  r1.counts[x] = 3;
  r2.counts[x] = 6;
  const SignificanceReport report =
      build_report(original, {r0, r1, r2}, false, {"legit"}, {"edge"});
  std::ostringstream out;
  write_ratio_evolution_csv(out, report);
  std::istringstream in(out.str());
  CsvReader reader(in);
  std::vector<std::string> row;
  REQUIRE(reader.next_row(row));
  CHECK(row == std::vector<std::string>{"canonical_code", "t", "running_ratio"});
  std::vector<std::string> ts, ratios;
  while (reader.next_row(row)) {
    REQUIRE(row.size() == 3);
    CHECK(row[0] == x.hex());
    ts.push_back(row[1]);
    ratios.push_back(row[2]);
  }
  CHECK(ts == std::vector<std::string>{"1", "2", "3"});
  CHECK(ratios == std::vector<std::string>{"2", "2", "1.5"});
}
