#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "optforge/agents.hpp"
#include "optforge/analysis/clustering.hpp"
#include "optforge/analysis/code_vector.hpp"
#include "optforge/analysis/convergence.hpp"
#include "optforge/analysis/cost.hpp"
#include "optforge/dataio.hpp"
#include "test_util.hpp"

using namespace optforge;
using optforge::testing::make_record;
using optforge::testing::repeat_token;

TEST_CASE("code tokens count keywords and call-ish identifiers") {
  auto tokens = code_tokens("for (int i = 0; i < n; ++i) foo(bar);");
  CHECK(std::count(tokens.begin(), tokens.end(), "for") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "int") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "foo") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "bar") == 0);
  CHECK(std::count(tokens.begin(), tokens.end(), "i") == 0);

  CHECK(code_tokens("x = y + z;").empty());

  auto kw = code_tokens("while (true) { if (a) return 0.0; double d; }");
  CHECK(std::count(kw.begin(), kw.end(), "while") == 1);
  CHECK(std::count(kw.begin(), kw.end(), "if") == 1);
  CHECK(std::count(kw.begin(), kw.end(), "return") == 1);
  CHECK(std::count(kw.begin(), kw.end(), "double") == 1);
  CHECK(std::count(kw.begin(), kw.end(), "true") == 1);
}

TEST_CASE("comments, strings, and char literals are not token sources") {
  auto tokens = code_tokens("// for while\n/* if( */ x(\"while(\");");
  CHECK(tokens == std::vector<std::string>{"x"});
  CHECK(code_tokens("'f'; go()") == std::vector<std::string>{"go"});
  CHECK(code_tokens("\"for for for\"").empty());
}

TEST_CASE("a corpus embeds over the sorted shared vocabulary") {
  Embedding e = embed_corpus({"for for", "while for"});
  CHECK(e.vocabulary == std::vector<std::string>{"for", "while"});
  REQUIRE(e.vectors.size() == 2);
  CHECK(e.vectors[0] == std::vector<double>{2.0, 0.0});
  CHECK(e.vectors[1] == std::vector<double>{1.0, 1.0});

  Embedding empty = embed_corpus({});
  CHECK(empty.vocabulary.empty());
  CHECK(empty.vectors.empty());

  Embedding blank = embed_corpus({"a = b;", "for"});
  CHECK(blank.vocabulary == std::vector<std::string>{"for"});
  CHECK(blank.vectors[0] == std::vector<double>{0.0});
}

TEST_CASE("pca projects onto centered principal axes with fixed signs") {
  std::vector<std::vector<double>> line = {{0, 0}, {1, 1}, {2, 2}};
  auto projected = pca_project(line, 2);
  REQUIRE(projected.size() == 3);
  double r2 = std::sqrt(2.0);
  CHECK(projected[0][0] == doctest::Approx(-r2));
  CHECK(projected[1][0] == doctest::Approx(0.0));
  CHECK(projected[2][0] == doctest::Approx(r2));
  // Rank is 1; the second requested dimension is zero.
  for (const auto& row : projected) CHECK(row[1] == doctest::Approx(0.0));
}

TEST_CASE("full-rank pca is an isometry") {
  SplitMix64 rng(31);
  std::vector<std::vector<double>> points(6, std::vector<double>(3));
  for (auto& p : points)
    for (double& v : p) v = rng.uniform(-4.0, 4.0);
  auto projected = pca_project(points, 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      CHECK(euclidean_distance(projected[i], projected[j]) ==
            doctest::Approx(euclidean_distance(points[i], points[j])).epsilon(1e-9));
    }
  }
}

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance({3.0, 4.0}, {0.0, 0.0}) == doctest::Approx(5.0));
  CHECK(euclidean_distance({1.0}, {1.0}) == 0.0);
}

namespace {

std::vector<std::vector<double>> two_blobs(int per_blob, std::uint64_t seed,
                                           bool interleaved = false) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> a, b;
  for (int i = 0; i < per_blob; ++i) {
    a.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
    b.push_back({25.0 + rng.uniform(-0.5, 0.5), 25.0 + rng.uniform(-0.5, 0.5)});
  }
  std::vector<std::vector<double>> points;
  if (interleaved) {
    for (int i = 0; i < per_blob; ++i) {
      points.push_back(a[i]);
      points.push_back(b[i]);
    }
  } else {
    points = a;
    points.insert(points.end(), b.begin(), b.end());
  }
  return points;
}

}  // namespace

TEST_CASE("kmeans separates two far blobs and is deterministic") {
  auto points = two_blobs(15, 8);
  KMeansResult r1 = kmeans(points, 2, 42);
  KMeansResult r2 = kmeans(points, 2, 42);
  CHECK(r1.assignment == r2.assignment);
  CHECK(r1.centroids == r2.centroids);
  int first = r1.assignment[0];
  for (int i = 0; i < 15; ++i) CHECK(r1.assignment[i] == first);
  for (int i = 15; i < 30; ++i) CHECK(r1.assignment[i] == 1 - first);
  CHECK(r1.inertia < 15.0);  // tight blobs
}

TEST_CASE("kmeans basics on tiny inputs") {
  KMeansResult one = kmeans({{0.0}, {1.0}}, 1, 3);
  CHECK(one.assignment == std::vector<int>{0, 0});
  CHECK(one.centroids[0][0] == doctest::Approx(0.5));
  CHECK(one.inertia == doctest::Approx(0.5));

  KMeansResult two = kmeans({{0.0}, {1.0}}, 2, 3);
  CHECK(two.inertia == doctest::Approx(0.0));
  CHECK(two.assignment[0] != two.assignment[1]);

  CHECK_THROWS(kmeans({}, 1, 0));
  CHECK_THROWS(kmeans({{1.0}}, 2, 0));
  CHECK_THROWS(kmeans({{1.0}}, 0, 0));
}

TEST_CASE("consensus clustering finds exactly two blobs across a seed sweep") {
  auto points = two_blobs(15, 8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ConsensusOptions options;
    options.seed = seed;
    ConsensusResult result = consensus_cluster(points, options);
    CHECK(result.cluster_count == 2);
    for (int i = 0; i < 15; ++i) CHECK(result.labels[i] == 0);
    for (int i = 15; i < 30; ++i) CHECK(result.labels[i] == 1);
  }
}

TEST_CASE("consensus labels are canonical under point permutations") {
  auto points = two_blobs(15, 8, true);
  ConsensusOptions options;
  options.seed = 4;
  ConsensusResult result = consensus_cluster(points, options);
  CHECK(result.cluster_count == 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(result.labels[i] == static_cast<int>(i % 2));
  }
  CHECK(canonical_labels(result.labels) == result.labels);
}

TEST_CASE("co-occurrence rates are high within a blob and zero across") {
  auto points = two_blobs(15, 8);
  ConsensusOptions options;
  options.seed = 1;
  ConsensusResult result = consensus_cluster(points, options);
  CHECK(result.co_occurrence[0][0] == doctest::Approx(1.0));
  CHECK(result.co_occurrence[0][1] > 0.2);
  CHECK(result.co_occurrence[0][15] < 0.05);
  CHECK(result.co_occurrence[0][15] == result.co_occurrence[15][0]);
}

TEST_CASE("consensus degenerate inputs") {
  ConsensusOptions options;
  ConsensusResult empty = consensus_cluster({}, options);
  CHECK(empty.cluster_count == 0);
  CHECK(empty.labels.empty());

  ConsensusResult single = consensus_cluster({{1.0, 2.0}}, options);
  CHECK(single.cluster_count == 1);
  CHECK(single.labels == std::vector<int>{0});

  ConsensusResult identical = consensus_cluster({{3.0}, {3.0}, {3.0}}, options);
  CHECK(identical.cluster_count == 1);
}

TEST_CASE("canonical labels renumber by first appearance") {
  CHECK(canonical_labels({2, 2, 0, 1, 0}) == std::vector<int>{0, 0, 1, 2, 1});
  CHECK(canonical_labels({}) == std::vector<int>{});
  CHECK(canonical_labels({5}) == std::vector<int>{0});
  CHECK(canonical_labels({0, 1, 2}) == std::vector<int>{0, 1, 2});
}

namespace {

Trace convergence_fixture() {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate,
                                   "for for for while while while while",
                                   ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Refine,
                                   repeat_token("for", 6) + " " + repeat_token("while", 8),
                                   ValidationStatus::Valid, -2.0));
  return trace;
}

}  // namespace

TEST_CASE("relative distance: doubling a (3,4) vector moves exactly 1.0") {
  auto curve = relative_distance_curve(convergence_fixture());
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].iteration == 2);
  CHECK(curve[0].value == doctest::Approx(1.0));
}

TEST_CASE("relative distance: identical artifacts move 0") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 4),
                                   ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Refine, repeat_token("for", 4),
                                   ValidationStatus::Valid, -2.0));
  auto curve = relative_distance_curve(trace);
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].value == doctest::Approx(0.0));
}

TEST_CASE("relative distance: a zero-norm predecessor reports the absolute distance") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, "a = b;",
                                   ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Refine, repeat_token("for", 2),
                                   ValidationStatus::Valid, -2.0));
  auto curve = relative_distance_curve(trace);
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].value == doctest::Approx(2.0));
}

TEST_CASE("relative distance skips code-less records entirely") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 3),
                                   ValidationStatus::Valid, -1.0));
  append_record(trace, make_record(2, Strategy::Refine, std::nullopt,
                                   ValidationStatus::NoCode, std::nullopt));
  append_record(trace, make_record(3, Strategy::Refine, repeat_token("for", 6),
                                   ValidationStatus::Valid, -2.0));
  auto curve = relative_distance_curve(trace);
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].iteration == 3);
  CHECK(curve[0].value == doctest::Approx(1.0));  // (3) -> (6), relative to norm 3
}

TEST_CASE("best-solution curve: runtimes 10,8,8,5 map to 0,40,40,100") {
  Trace trace;
  double runtimes[] = {10.0, 8.0, 8.0, 5.0};
  for (int i = 0; i < 4; ++i) {
    append_record(trace, make_record(i + 1, Strategy::Innovate, repeat_token("for", i + 1),
                                     ValidationStatus::Valid, -runtimes[i]));
  }
  auto curve = best_solution_curve(trace);
  REQUIRE(curve.size() == 4);
  CHECK(curve[0].value == doctest::Approx(0.0));
  CHECK(curve[1].value == doctest::Approx(40.0));
  CHECK(curve[2].value == doctest::Approx(40.0));
  CHECK(curve[3].value == doctest::Approx(100.0));
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].value >= curve[i - 1].value);
  CHECK(curve[3].iteration == 4);
}

TEST_CASE("best-solution curve is scale invariant and ends at 100") {
  SplitMix64 rng(17);
  Trace trace, scaled;
  for (int i = 1; i <= 8; ++i) {
    double r = rng.uniform(1.0, 12.0);
    append_record(trace, make_record(i, Strategy::Innovate, repeat_token("for", i),
                                     ValidationStatus::Valid, -r));
    append_record(scaled, make_record(i, Strategy::Innovate, repeat_token("for", i),
                                      ValidationStatus::Valid, -3.0 * r));
  }
  auto base = best_solution_curve(trace);
  auto tripled = best_solution_curve(scaled);
  REQUIRE(base.size() == tripled.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i].value == doctest::Approx(tripled[i].value));
  }
  CHECK(base.back().value == doctest::Approx(100.0));
}

TEST_CASE("best-solution curve carries the best forward through invalid designs") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 1),
                                   ValidationStatus::Valid, -4.0));
  append_record(trace, make_record(2, Strategy::Refine, repeat_token("for", 2),
                                   ValidationStatus::Incorrect, std::nullopt));
  append_record(trace, make_record(3, Strategy::Refine, repeat_token("for", 3),
                                   ValidationStatus::Valid, -2.0));
  auto curve = best_solution_curve(trace);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].iteration == 1);
  CHECK(curve[0].value == doctest::Approx(0.0));
  CHECK(curve[1].iteration == 2);
  CHECK(curve[1].value == doctest::Approx(0.0));
  CHECK(curve[2].iteration == 3);
  CHECK(curve[2].value == doctest::Approx(100.0));

  CHECK(best_solution_curve(Trace{}).empty());
  CHECK(relative_distance_curve(Trace{}).empty());
}

TEST_CASE("a lone valid design sits at 100 immediately") {
  Trace trace;
  append_record(trace, make_record(1, Strategy::Innovate, repeat_token("for", 1),
                                   ValidationStatus::Valid, -4.0));
  auto curve = best_solution_curve(trace);
  REQUIRE(curve.size() == 1);
  CHECK(curve[0].value == doctest::Approx(100.0));
}

TEST_CASE("price tables parse, tolerate a header, and warn on damage") {
  std::string text =
      "# price sheet\n"
      "model, input_per_1M, output_per_1M\n"
      "\n"
      "gpt-large, 2.50, 10\n"
      "bad-row, not-a-number, 3\n"
      "only-two-fields, 4\n"
      ", 1, 2\n"
      "small, 0.1, 0.4\n";
  PriceTable table = parse_price_table(text);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].model == "gpt-large");
  CHECK(table.rows[0].input_per_1m == doctest::Approx(2.5));
  CHECK(table.rows[0].output_per_1m == doctest::Approx(10.0));
  CHECK(table.rows[1].model == "small");
  REQUIRE(table.warnings.size() == 3);
  CHECK(table.warnings[0].find("line 5") != std::string::npos);
  CHECK(table.warnings[1].find("expected 3") != std::string::npos);
  CHECK(table.warnings[1].find("line 6") != std::string::npos);
  CHECK(table.warnings[2].find("line 7") != std::string::npos);

  CHECK(parse_price_table("").rows.empty());
  CHECK(parse_price_table("# just comments\n\n").warnings.empty());
}

namespace {

Trace cost_fixture(int iterations) {
  Trace trace;
  for (int i = 1; i <= iterations; ++i) {
    DesignRecord record = make_record(i, Strategy::Innovate, repeat_token("for", 2),
                                      ValidationStatus::Valid, -1.0);
    record.tokens.strategist_in = 40000;
    record.tokens.strategist_out = 5000;
    record.tokens.implementor_in = 10000;
    record.tokens.implementor_out = 9000;
    record.tokens.estimated = (i == 1);
    append_record(trace, record);
  }
  return trace;
}

}  // namespace

TEST_CASE("78 iterations at 19 cents each price out to 14.82 dollars") {
  Trace trace = cost_fixture(78);
  PriceTable prices;
  prices.rows.push_back({"flat", 1.0, 10.0});
  CostReport report = cost_report(trace, prices);
  CHECK(report.iterations == 78);
  CHECK(report.input_tokens == 78 * 50000);
  CHECK(report.output_tokens == 78 * 14000);
  CHECK(report.any_estimated);
  REQUIRE(report.scenarios.size() == 1);
  CHECK(std::abs(report.scenarios[0].cost_total - 14.82) < 0.005);
  CHECK(report.scenarios[0].cost_total == doctest::Approx(14.82).epsilon(1e-9));
  CHECK(report.scenarios[0].cost_per_iteration == doctest::Approx(0.19).epsilon(1e-9));
}

TEST_CASE("every price row becomes its own scenario") {
  Trace trace = cost_fixture(2);
  PriceTable prices;
  prices.rows.push_back({"a", 1.0, 1.0});
  prices.rows.push_back({"b", 2.0, 2.0});
  CostReport report = cost_report(trace, prices);
  REQUIRE(report.scenarios.size() == 2);
  CHECK(report.scenarios[1].cost_total == doctest::Approx(2.0 * report.scenarios[0].cost_total));
  CHECK(report.scenarios[0].model == "a");

  CostReport bare = cost_report(Trace{}, prices);
  CHECK(bare.iterations == 0);
  CHECK(bare.scenarios[0].cost_total == 0.0);
  CHECK(bare.scenarios[0].cost_per_iteration == 0.0);
  CHECK(!bare.any_estimated);
}

TEST_CASE("token statistics summarize each lane per iteration") {
  Trace trace;
  std::int64_t strategist_in[] = {30000, 40000, 50000};
  std::int64_t implementor_in[] = {10000, 20000, 30000};
  for (int i = 0; i < 3; ++i) {
    DesignRecord record = make_record(i + 1, Strategy::Innovate, repeat_token("for", 2),
                                      ValidationStatus::Valid, -1.0);
    record.tokens.strategist_in = strategist_in[i];
    record.tokens.strategist_out = 5000;
    record.tokens.implementor_in = implementor_in[i];
    record.tokens.implementor_out = 1000 * (i + 1);
    append_record(trace, record);
  }
  auto stats = token_stats(trace, 128000);
  REQUIRE(stats.size() == 4);
  CHECK(stats[0].label == "strategist input");
  CHECK(stats[0].min == 30000);
  CHECK(stats[0].max == 50000);
  CHECK(stats[0].avg == doctest::Approx(40000.0));
  CHECK(stats[0].std_pct ==
        doctest::Approx(100.0 * std::sqrt(2.0e8 / 3.0) / 40000.0).epsilon(1e-9));
  CHECK(stats[0].context_pct == doctest::Approx(31.25));

  CHECK(stats[1].label == "strategist output");
  CHECK(stats[1].avg == doctest::Approx(5000.0));
  CHECK(stats[1].std_pct == doctest::Approx(0.0));
  CHECK(stats[1].context_pct == 0.0);  // output lanes have no context budget

  CHECK(stats[2].label == "implementor input");
  CHECK(stats[2].context_pct == doctest::Approx(100.0 * 20000.0 / 128000.0));

  CHECK(stats[3].label == "implementor output");
  CHECK(stats[3].avg == doctest::Approx(2000.0));

  auto empty = token_stats(Trace{}, 128000);
  REQUIRE(empty.size() == 4);
  CHECK(empty[0].avg == 0.0);
  CHECK(empty[0].min == 0);
  CHECK(empty[0].max == 0);
}

namespace {

DesignRecord with_transcript(DesignRecord record, const std::vector<std::string>& stages) {
  record.implementor_transcript = {{"system", "s"}, {"user", "u"}, {"assistant", "code v1"}};
  for (const std::string& stage : stages) {
    record.implementor_transcript.push_back(build_feedback_message(stage, "details"));
    record.implementor_transcript.push_back({"assistant", "code again"});
  }
  return record;
}

}  // namespace

TEST_CASE("first-compile statistics follow the feedback trail: 4 of 9 is 44.4 percent") {
  Trace trace;
  // Passed the first compile (4): clean, fixed-after-correctness,
  // stuck-on-run, evaluation-failure downgrade with no feedback.
  append_record(trace, with_transcript(make_record(1, Strategy::Innovate, "for",
                                                   ValidationStatus::Valid, -1.0),
                                       {}));
  append_record(trace, with_transcript(make_record(2, Strategy::Refine, "for",
                                                   ValidationStatus::Valid, -2.0),
                                       {"correctness"}));
  append_record(trace, with_transcript(make_record(3, Strategy::Refine, "for",
                                                   ValidationStatus::RunFailed, std::nullopt),
                                       {"run", "run"}));
  append_record(trace, with_transcript(make_record(4, Strategy::Refine, "for",
                                                   ValidationStatus::Incorrect, std::nullopt),
                                       {"correctness", "correctness"}));
  // Failed it (5): four final compile failures without feedback rounds left,
  // one that recovered later but opened with a compile error.
  for (int i = 5; i <= 8; ++i) {
    append_record(trace, with_transcript(make_record(i, Strategy::Innovate, "for",
                                                     ValidationStatus::CompileFailed,
                                                     std::nullopt),
                                         {}));
  }
  append_record(trace, with_transcript(make_record(9, Strategy::Innovate, "for",
                                                   ValidationStatus::Valid, -0.5),
                                       {"compile"}));
  // A code-less record is outside the denominator.
  append_record(trace, make_record(10, Strategy::Refine, std::nullopt,
                                   ValidationStatus::NoCode, std::nullopt));

  CompileStats stats = compile_stats(trace);
  CHECK(stats.code_producing == 9);
  CHECK(stats.first_compile_passed == 4);
  CHECK(stats.first_pass_percent == doctest::Approx(400.0 / 9.0).epsilon(1e-12));

  REQUIRE(stats.status_counts.size() == 5);
  CHECK(stats.status_counts[0].first == "valid");
  CHECK(stats.status_counts[0].second == 3);
  CHECK(stats.status_counts[1].first == "compile-failed");
  CHECK(stats.status_counts[1].second == 4);
  CHECK(stats.status_counts[2].first == "run-failed");
  CHECK(stats.status_counts[2].second == 1);
  CHECK(stats.status_counts[3].first == "incorrect");
  CHECK(stats.status_counts[3].second == 1);
  CHECK(stats.status_counts[4].first == "no-code");
  CHECK(stats.status_counts[4].second == 1);
}

TEST_CASE("compile statistics on an empty trace") {
  CompileStats stats = compile_stats(Trace{});
  CHECK(stats.code_producing == 0);
  CHECK(stats.first_pass_percent == 0.0);
  REQUIRE(stats.status_counts.size() == 5);
  for (const auto& entry : stats.status_counts) CHECK(entry.second == 0);
}
