#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "optforge/analysis/bayesopt.hpp"
#include "optforge/analysis/efficiency.hpp"
#include "optforge/analysis/phi.hpp"
#include "optforge/dataio.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace optforge;
using optforge::testing::make_record;
using optforge::testing::OracleProposal;
using optforge::testing::oracle_phase;
using optforge::testing::oracle_propose;
using optforge::testing::Point2;
using optforge::testing::repeat_token;
using optforge::testing::to_context;

TEST_CASE("the context norm is the largest infinity norm") {
  CHECK(max_infinity_norm({}) == 0.0);
  CHECK(max_infinity_norm({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}) == 1.0);
  CHECK(max_infinity_norm({{-3.0, 2.0}, {1.0, -7.0}}) == 7.0);
}

TEST_CASE("min_distance finds the nearest context point") {
  CHECK(min_distance({5.0, 5.0}, {{0.0, 0.0}, {1.0, 1.0}}) ==
        doctest::Approx(std::sqrt(32.0)));
  CHECK(min_distance({1.0, 1.0}, {{0.0, 0.0}, {1.0, 1.0}}) == 0.0);
}

TEST_CASE("convex hull membership via the feasibility solve") {
  std::vector<std::vector<double>> square = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  CHECK(in_convex_hull({0.5, 0.5}, square));
  CHECK(in_convex_hull({1.0, 0.0}, square));
  CHECK(in_convex_hull({0.5, 0.0}, square));
  CHECK(!in_convex_hull({1.5, 0.5}, square));
  CHECK(!in_convex_hull({1.0 + 1e-6, 0.5}, square));

  std::vector<std::vector<double>> segment = {{1.0}, {5.0}};
  CHECK(in_convex_hull({3.0}, segment));
  CHECK(in_convex_hull({5.0}, segment));
  CHECK(!in_convex_hull({0.0}, segment));
  CHECK(!in_convex_hull({5.1}, segment));

  std::vector<std::vector<double>> tetra = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(in_convex_hull({0.2, 0.2, 0.2}, tetra));
  CHECK(!in_convex_hull({0.5, 0.5, 0.5}, tetra));

  std::vector<std::vector<double>> single = {{2.0, 3.0}};
  CHECK(in_convex_hull({2.0, 3.0}, single));
  CHECK(!in_convex_hull({2.0, 3.1}, single));
}

TEST_CASE("the worked classification examples") {
  std::vector<std::vector<double>> square = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  // L = 1, halo 0.1; (5,5) sits sqrt(32) away and outside the hull.
  CHECK(classify_phase({5.0, 5.0}, square) == Phase::Exploration);
  CHECK(classify_phase({0.5, 0.5}, square) == Phase::Exploitation);
  CHECK(classify_phase({1.0, 0.0}, square) == Phase::Exploitation);
  // Near a corner within the halo but outside the hull.
  CHECK(classify_phase({1.05, 1.05}, square) == Phase::Exploitation);
  CHECK(classify_phase({}, {}) == Phase::Exploration);

  // The hull term matters on its own: far from every point yet between them.
  std::vector<std::vector<double>> pair = {{0.0, 0.0}, {10.0, 0.0}};
  CHECK(classify_phase({5.0, 0.0}, pair) == Phase::Exploitation);
  CHECK(classify_phase({5.0, 1.5}, pair) == Phase::Exploration);
  CHECK(classify_phase({0.5, 0.0}, pair) == Phase::Exploitation);  // halo term
}

TEST_CASE("phase strings") {
  CHECK(to_string(Phase::Exploration) == "exploration");
  CHECK(to_string(Phase::Exploitation) == "exploitation");
}

TEST_CASE("the classifier matches an independent geometric oracle on 200 instances") {
  SplitMix64 rng(2024);
  int checked = 0;
  for (int instance = 0; instance < 200; ++instance) {
    std::size_t n = 5 + static_cast<std::size_t>(rng.next_u64() % 16);
    std::vector<Point2> pts(n);
    for (Point2& p : pts) p = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    auto context = to_context(pts);

    std::vector<Point2> queries;
    // A guaranteed-interior point: a convex combination of three context points.
    double w0 = rng.uniform(0.1, 0.8), w1 = rng.uniform(0.0, 1.0 - w0);
    double w2 = 1.0 - w0 - w1;
    queries.push_back({w0 * pts[0][0] + w1 * pts[1][0] + w2 * pts[2][0],
                       w0 * pts[0][1] + w1 * pts[1][1] + w2 * pts[2][1]});
    // Near a context point.
    queries.push_back({pts[3][0] + rng.uniform(-0.4, 0.4), pts[3][1] + rng.uniform(-0.4, 0.4)});
    // Far outside.
    queries.push_back({rng.uniform(25.0, 60.0), rng.uniform(-60.0, -25.0)});
    // Anywhere in the expanded box.
    queries.push_back({rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0)});
    queries.push_back({rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0)});

    for (const Point2& q : queries) {
      Phase expected = oracle_phase(q, pts);
      Phase got = classify_phase({q[0], q[1]}, context);
      CHECK(got == expected);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("classification is invariant under uniform scaling") {
  SplitMix64 rng(77);
  for (int instance = 0; instance < 20; ++instance) {
    std::vector<std::vector<double>> context(6, std::vector<double>(2));
    for (auto& c : context) {
      c[0] = rng.uniform(-5.0, 5.0);
      c[1] = rng.uniform(-5.0, 5.0);
    }
    std::vector<double> x = {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
    Phase base = classify_phase(x, context);
    double scale = 3.7;
    auto scaled_context = context;
    for (auto& c : scaled_context) {
      c[0] *= scale;
      c[1] *= scale;
    }
    CHECK(classify_phase({x[0] * scale, x[1] * scale}, scaled_context) == base);
  }
}

TEST_CASE("default bounds expand the bounding box by ten percent per side") {
  BoBounds b = default_bounds({{0.0, 0.0}, {10.0, 4.0}});
  CHECK(b.lo[0] == doctest::Approx(-1.0));
  CHECK(b.hi[0] == doctest::Approx(11.0));
  CHECK(b.lo[1] == doctest::Approx(-0.4));
  CHECK(b.hi[1] == doctest::Approx(4.4));

  BoBounds degenerate = default_bounds({{5.0, 1.0}, {5.0, 9.0}});
  CHECK(degenerate.lo[0] == doctest::Approx(4.0));  // half-width max(0.8, 1.0)
  CHECK(degenerate.hi[0] == doctest::Approx(6.0));
  CHECK(degenerate.lo[1] == doctest::Approx(0.2));
  CHECK(degenerate.hi[1] == doctest::Approx(9.8));

  BoBounds point = default_bounds({{2.0, 3.0}});
  CHECK(point.lo[0] == doctest::Approx(1.0));
  CHECK(point.hi[0] == doctest::Approx(3.0));
  CHECK(point.lo[1] == doctest::Approx(2.0));
  CHECK(point.hi[1] == doctest::Approx(4.0));

  CHECK_THROWS(default_bounds({}));
}

TEST_CASE("halton points skip the origin and follow the radical inverse") {
  auto p0 = halton_point(0, 2);
  CHECK(p0[0] == doctest::Approx(0.5));
  CHECK(p0[1] == doctest::Approx(1.0 / 3.0));
  auto p1 = halton_point(1, 2);
  CHECK(p1[0] == doctest::Approx(0.25));
  CHECK(p1[1] == doctest::Approx(2.0 / 3.0));
  auto p3 = halton_point(3, 3);
  CHECK(p3[0] == doctest::Approx(0.125));
  CHECK(p3[1] == doctest::Approx(4.0 / 9.0));
  CHECK(p3[2] == doctest::Approx(0.8));
  for (std::size_t i = 0; i < 100; ++i) {
    for (double v : halton_point(i, 4)) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("the candidate set is seeded, rotated, and inside the bounds") {
  BoBounds bounds{{-2.0, 0.0}, {4.0, 1.0}};
  auto a = bo_candidates(bounds, 64, 9);
  auto b = bo_candidates(bounds, 64, 9);
  auto c = bo_candidates(bounds, 64, 10);
  CHECK(a.size() == 64);
  CHECK(a == b);
  CHECK(a != c);
  for (const auto& cand : a) {
    REQUIRE(cand.size() == 2);
    CHECK(cand[0] >= -2.0);
    CHECK(cand[0] <= 4.0);
    CHECK(cand[1] >= 0.0);
    CHECK(cand[1] <= 1.0);
  }
  // The rotation shifts the raw sequence.
  auto raw = halton_point(0, 2);
  bool rotated = std::abs(a[0][0] - (-2.0 + raw[0] * 6.0)) > 1e-9 ||
                 std::abs(a[0][1] - raw[1]) > 1e-9;
  CHECK(rotated);
}

TEST_CASE("median pairwise distance uses the lower median") {
  CHECK(median_pairwise_distance({{0.0}, {3.0}, {4.0}}) == doctest::Approx(3.0));
  CHECK(median_pairwise_distance({{0.0}, {1.0}, {2.0}, {10.0}}) == doctest::Approx(2.0));
  CHECK(median_pairwise_distance({{5.0}}) == 1.0);
  CHECK(median_pairwise_distance({{5.0}, {5.0}}) == 1.0);
  CHECK(median_pairwise_distance({}) == 1.0);
}

TEST_CASE("the proposal matches an exhaustive oracle over the same candidates") {
  SplitMix64 rng(4242);
  for (int problem = 0; problem < 50; ++problem) {
    std::size_t d = 1 + static_cast<std::size_t>(rng.next_u64() % 3);
    std::size_t n = 2 + static_cast<std::size_t>(rng.next_u64() % 7);
    std::vector<std::vector<double>> X(n, std::vector<double>(d));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) X[i][j] = rng.uniform(-5.0, 5.0);
      y[i] = rng.uniform(-3.0, 0.0);
    }
    BoOptions options;
    options.xi = (problem % 3 == 0) ? 0.5 : (problem % 3 == 1 ? 2.0 : 5.0);
    options.candidates = 256;
    options.seed = static_cast<std::uint64_t>(problem) * 31 + 7;

    BoProposal got = bo_propose(X, y, options);
    auto candidates = bo_candidates(default_bounds(X), options.candidates, options.seed);
    OracleProposal expected =
        oracle_propose(X, y, candidates, options.xi, options.jitter);

    CHECK(got.candidate_index == expected.index);
    CHECK(got.ucb == doctest::Approx(expected.ucb).epsilon(1e-6));
    CHECK(got.x == candidates[got.candidate_index]);
    CHECK(!got.jitter_escalated);
    for (std::size_t j = 0; j < d; ++j) {
      CHECK(got.x[j] >= default_bounds(X).lo[j]);
      CHECK(got.x[j] <= default_bounds(X).hi[j]);
    }
  }
}

TEST_CASE("a tiny exploration factor stays near the incumbent once coverage is dense") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i <= 20; ++i) {
    double x = i / 20.0;
    X.push_back({x});
    y.push_back(-(x - 0.3) * (x - 0.3));
  }
  BoOptions options;
  options.xi = 1e-3;
  options.candidates = 2048;
  options.seed = 5;
  BoProposal p = bo_propose(X, y, options);
  CHECK(std::abs(p.x[0] - 0.3) < 0.1);
}

TEST_CASE("a huge exploration factor runs from a single observation") {
  BoOptions options;
  options.xi = 1e3;
  options.candidates = 512;
  options.seed = 5;
  BoProposal p = bo_propose({{0.5}}, {-1.0}, options);
  CHECK(std::abs(p.x[0] - 0.5) > 0.7);  // bounds are [-0.5, 1.5]
}

TEST_CASE("exact UCB ties resolve to the lowest candidate index") {
  BoOptions options;
  options.candidates = 32;
  options.seed = 1;
  options.bounds = BoBounds{{0.0}, {0.0}};  // every candidate is the same point
  BoProposal p = bo_propose({{0.0}, {1.0}}, {-1.0, -2.0}, options);
  CHECK(p.candidate_index == 0);
}

TEST_CASE("jitter escalates on a singular kernel and is flagged") {
  BoOptions options;
  options.candidates = 16;
  options.jitter = 1e-18;
  BoProposal p = bo_propose({{0.0}, {0.0}}, {-1.0, -2.0}, options);
  CHECK(p.jitter_escalated);

  options.jitter = 1e-300;
  CHECK_THROWS(bo_propose({{0.0}, {0.0}}, {-1.0, -2.0}, options));
}

TEST_CASE("bo_propose rejects malformed inputs") {
  CHECK_THROWS(bo_propose({}, {}, BoOptions{}));
  CHECK_THROWS(bo_propose({{1.0}}, {-1.0, -2.0}, BoOptions{}));
  CHECK_THROWS(bo_propose({{1.0}, {1.0, 2.0}}, {-1.0, -2.0}, BoOptions{}));
}

namespace {

Trace efficiency_fixture_75() {
  Trace trace;
  append_record(trace, make_record(1, Strategy::NotAvailable, repeat_token("for", 2),
                           ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Innovate, repeat_token("for", 5),
                           ValidationStatus::Valid, -2.0));
  append_record(trace, make_record(3, Strategy::Innovate, repeat_token("for", 20),
                           ValidationStatus::Valid, -0.5));
  return trace;
}

Trace efficiency_fixture_100() {
  Trace trace;
  append_record(trace, make_record(1, Strategy::NotAvailable, repeat_token("for", 2),
                           ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Innovate, repeat_token("for", 20),
                           ValidationStatus::Valid, -2.0));
  append_record(trace, make_record(3, Strategy::Refine, repeat_token("for", 5),
                           ValidationStatus::Valid, -0.5));
  return trace;
}

EfficiencyOptions fast_options() {
  EfficiencyOptions options;
  options.bo_candidates = 512;
  options.seed = 7;
  return options;
}

}  // namespace

TEST_CASE("search efficiency: a mixed fixture lands on exactly 75 percent") {
  EfficiencyReport report = search_efficiency(efficiency_fixture_75(), fast_options());
  REQUIRE(report.rows.size() == 3);
  CHECK(!report.rows[0].included);  // no strategy and no prior context
  CHECK(report.rows[1].included);
  CHECK(report.rows[1].agree_baseline == 1);
  CHECK(report.rows[1].agree_implementor == 1);
  CHECK(report.rows[2].included);
  CHECK(report.rows[2].agree_baseline == 0);  // bounds sit inside the halo+hull
  CHECK(report.rows[2].agree_implementor == 1);
  CHECK(report.counted == 2);
  REQUIRE(report.efficiency_percent.has_value());
  CHECK(*report.efficiency_percent == doctest::Approx(75.0).epsilon(1e-12));
}

TEST_CASE("search efficiency: a fully aligned fixture lands on exactly 100 percent") {
  EfficiencyReport report = search_efficiency(efficiency_fixture_100(), fast_options());
  CHECK(report.counted == 2);
  CHECK(report.rows[2].strategist == Phase::Exploitation);  // refine declares exploitation
  CHECK(report.rows[2].implementor == Phase::Exploitation);
  CHECK(report.rows[2].baseline == Phase::Exploitation);
  REQUIRE(report.efficiency_percent.has_value());
  CHECK(*report.efficiency_percent == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("search efficiency is deterministic for a fixed seed") {
  EfficiencyReport a = search_efficiency(efficiency_fixture_75(), fast_options());
  EfficiencyReport b = search_efficiency(efficiency_fixture_75(), fast_options());
  CHECK(*a.efficiency_percent == *b.efficiency_percent);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].baseline == b.rows[i].baseline);
  }
}

TEST_CASE("iterations without code, strategy, context, or scored history are excluded") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 3),
                           ValidationStatus::Valid, -1.0));
  auto no_code = make_record(2, Strategy::Refine, std::nullopt, ValidationStatus::NoCode,
                             std::nullopt);
  append_record(trace, no_code);
  append_record(trace, make_record(3, Strategy::NotAvailable, repeat_token("for", 4),
                           ValidationStatus::Valid, -2.0));
  append_record(trace, make_record(4, Strategy::Refine, repeat_token("for", 4),
                           ValidationStatus::Valid, -0.5));
  EfficiencyReport report = search_efficiency(trace, fast_options());
  CHECK(!report.rows[0].included);  // leading design: no context yet
  CHECK(!report.rows[1].included);  // no artifact
  CHECK(!report.rows[2].included);  // no declared strategy
  CHECK(report.rows[3].included);
  CHECK(report.counted == 1);
}

TEST_CASE("a trace with nothing countable reports no efficiency") {
  Trace empty;
  EfficiencyReport report = search_efficiency(empty, fast_options());
  CHECK(report.rows.empty());
  CHECK(report.counted == 0);
  CHECK(!report.efficiency_percent.has_value());

  Trace lone;
  append_record(lone, make_record(1, Strategy::Innovate, repeat_token("for", 3),
                          ValidationStatus::Valid, -1.0));
  report = search_efficiency(lone, fast_options());
  CHECK(report.counted == 0);
  CHECK(!report.efficiency_percent.has_value());
}

TEST_CASE("valid-only context drops invalid designs from the geometry") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 10),
                           ValidationStatus::Incorrect, std::nullopt));
  append_record(trace, make_record(2, Strategy::Innovate, repeat_token("for", 2),
                           ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(3, Strategy::Innovate, repeat_token("for", 9),
                           ValidationStatus::Valid, -2.0));

  EfficiencyOptions options = fast_options();
  EfficiencyReport with_invalid = search_efficiency(trace, options);
  // Context {10, 2}: artifact 9 sits inside the hull, so innovate disagrees.
  CHECK(with_invalid.counted == 1);
  CHECK(with_invalid.rows[2].implementor == Phase::Exploitation);
  CHECK(*with_invalid.efficiency_percent == doctest::Approx(0.0));

  options.valid_only_context = true;
  EfficiencyReport valid_only = search_efficiency(trace, options);
  // Context {2}: artifact 9 is far outside, so innovate agrees everywhere.
  CHECK(valid_only.counted == 1);
  CHECK(valid_only.rows[2].implementor == Phase::Exploration);
  CHECK(*valid_only.efficiency_percent == doctest::Approx(100.0));
}

TEST_CASE("combine declares exploitation") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 2),
                           ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Combine, repeat_token("for", 2),
                           ValidationStatus::Valid, -2.0));
  EfficiencyReport report = search_efficiency(trace, fast_options());
  CHECK(report.rows[1].strategist == Phase::Exploitation);
  CHECK(report.rows[1].implementor == Phase::Exploitation);  // same point as context
  CHECK(report.rows[1].agree_implementor == 1);
}

TEST_CASE("efficiency stays within 0 and 100 on randomized traces") {
  SplitMix64 rng(99);
  for (int round = 0; round < 5; ++round) {
    Trace trace;
    int n = 4 + static_cast<int>(rng.next_u64() % 6);
    for (int i = 1; i <= n; ++i) {
      Strategy strategy = static_cast<Strategy>(rng.next_u64() % 3);  // real strategies
      int count = 1 + static_cast<int>(rng.next_u64() % 30);
      bool valid = rng.next_double() < 0.7;
      append_record(trace, make_record(
          i, strategy, repeat_token("for", count),
          valid ? ValidationStatus::Valid : ValidationStatus::Incorrect,
          valid ? std::optional<double>(-rng.uniform(0.5, 4.0)) : std::nullopt));
    }
    EfficiencyOptions options = fast_options();
    options.bo_candidates = 128;
    options.seed = static_cast<std::uint64_t>(round);
    EfficiencyReport report = search_efficiency(trace, options);
    if (report.efficiency_percent) {
      CHECK(*report.efficiency_percent >= 0.0);
      CHECK(*report.efficiency_percent <= 100.0);
    }
    std::int64_t included = 0;
    for (const auto& row : report.rows) included += row.included ? 1 : 0;
    CHECK(included == report.counted);
  }
}
