#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optforge/analysis/clustering.hpp"
#include "optforge/analysis/code_vector.hpp"
#include "optforge/analysis/convergence.hpp"
#include "optforge/analysis/cost.hpp"
#include "optforge/analysis/efficiency.hpp"
#include "optforge/dataio.hpp"
#include "optforge/orchestrator.hpp"
#include "optforge/problems.hpp"
#include "optforge/trace.hpp"

namespace {

using nlohmann::json;
using namespace optforge;

struct OutputOptions {
  std::string format = "text";  // "text" or "structured"
  std::string out_file;         // optional structured copy
};

void add_output_flags(CLI::App* cmd, OutputOptions* out) {
  cmd->add_option("--format", out->format, "Output format: text or structured")
      ->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("--structured-out", out->out_file,
                  "Also write the structured report to this file");
}

void emit(const OutputOptions& options, const json& structured, const std::string& text) {
  if (options.format == "structured") {
    std::cout << structured.dump(2) << "\n";
  } else {
    std::cout << text;
  }
  if (!options.out_file.empty()) {
    write_text_file(options.out_file, structured.dump(2) + "\n");
  }
}

std::string format_row(const std::vector<std::string>& cells, const std::vector<int>& widths) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += "  ";
    line += cells[i];
    if (i + 1 < cells.size() && static_cast<int>(cells[i].size()) < widths[i]) {
      line.append(widths[i] - cells[i].size(), ' ');
    }
  }
  line += "\n";
  return line;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<int> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], static_cast<int>(row[i].size()));
    }
  }
  std::string out;
  for (const auto& row : rows) out += format_row(row, widths);
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("bad number in list: '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty number list");
  return values;
}

struct EmbeddedTrace {
  std::vector<std::int64_t> iterations;  // code-producing records, in order
  std::vector<std::vector<double>> vectors;
};

EmbeddedTrace embed_trace(const Trace& trace, std::size_t pca_dims) {
  EmbeddedTrace result;
  std::vector<std::string> sources;
  for (const DesignRecord& record : trace.records) {
    if (!record.produced_code()) continue;
    result.iterations.push_back(record.iteration);
    sources.push_back(*record.artifact);
  }
  Embedding embedding = embed_corpus(sources);
  result.vectors = pca_dims > 0 ? pca_project(embedding.vectors, pca_dims)
                                : std::move(embedding.vectors);
  return result;
}

int cmd_run(const std::string& config_file, const std::string& trace_file,
            const std::string& work_dir, bool resume, std::optional<std::uint64_t> seed,
            const OutputOptions& output) {
  RunConfig config = load_run_config(config_file);
  if (seed) config.seed = *seed;
  RunPaths paths;
  paths.trace_file = trace_file;
  paths.work_root = work_dir.empty() ? trace_file + ".work" : work_dir;
  RunSummary summary = run_optimization(config, paths, resume);

  json structured = {
      {"trace", trace_file},
      {"iterations_completed", summary.iterations_completed},
      {"valid_designs", summary.valid_designs},
      {"best", nullptr},
  };
  std::string text = "run complete: " + std::to_string(summary.iterations_completed) +
                     " iterations, " + std::to_string(summary.valid_designs) + " valid\n";
  if (summary.best) {
    structured["best"] = {{"iteration", summary.best->iteration},
                          {"score", *summary.best->score}};
    text += "best: iteration " + std::to_string(summary.best->iteration) + ", score " +
            format_double(*summary.best->score) + "\n";
  } else {
    text += "best: none (no valid design)\n";
  }
  text += "trace: " + trace_file + "\n";
  emit(output, structured, text);
  return 0;
}

int cmd_gen_truth(const std::string& problem, const std::string& out_dir, std::uint64_t seed,
                  bool full_scale, const OutputOptions& output) {
  PackOptions options;
  options.seed = seed;
  options.full_scale = full_scale;
  ProblemPack pack = make_pack(problem, options);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json manifest_json = {
      {"problem", pack.name},
      {"seed", seed},
      {"scale", full_scale ? "full" : "desk"},
      {"tolerance", pack.tolerance},
      {"cases", json::array()},
      {"conditions", json::array()},
  };
  std::string manifest;
  manifest += "problem: " + pack.name + "\n";
  manifest += "seed: " + std::to_string(seed) + "\n";
  manifest += std::string("scale: ") + (full_scale ? "full" : "desk") + "\n";
  manifest += "tolerance: " + format_double(pack.tolerance) + "\n";
  for (const CorrectnessCase& c : pack.correctness) {
    std::string input_name = c.name + ".input.txt";
    std::string expected_name = c.name + ".expected.txt";
    write_table(fs::path(out_dir) / input_name, c.input);
    write_table(fs::path(out_dir) / expected_name, c.expected);
    manifest += "case " + c.name + " input=" + input_name + " expected=" + expected_name + "\n";
    manifest_json["cases"].push_back(
        {{"name", c.name}, {"input", input_name}, {"expected", expected_name}});
  }
  for (const EvalCondition& c : pack.conditions) {
    manifest += "condition " + c.name + " (timing grid, input generated at run time)\n";
    manifest_json["conditions"].push_back(c.name);
  }
  write_text_file(fs::path(out_dir) / "manifest.txt", manifest);

  std::string text = "wrote " + std::to_string(pack.correctness.size()) +
                     " correctness cases under " + out_dir + "\n" + "manifest: " +
                     (fs::path(out_dir) / "manifest.txt").string() + "\n";
  emit(output, manifest_json, text);
  return 0;
}

int cmd_efficiency(const std::string& trace_file, const std::string& xi_list,
                   std::uint64_t seed, std::size_t pca_dims, bool valid_only,
                   std::size_t candidates, const OutputOptions& output) {
  Trace trace = TraceStore::read_file(trace_file);
  std::vector<double> xis = parse_double_list(xi_list);

  json structured = {{"trace", trace_file}, {"results", json::array()}};
  std::vector<std::vector<std::string>> table = {{"xi", "efficiency_pct", "counted"}};
  for (double xi : xis) {
    EfficiencyOptions options;
    options.xi = xi;
    options.seed = seed;
    options.pca_dims = pca_dims;
    options.valid_only_context = valid_only;
    options.bo_candidates = candidates;
    EfficiencyReport report = search_efficiency(trace, options);
    json entry = {{"xi", xi},
                  {"counted", report.counted},
                  {"efficiency_pct", nullptr},
                  {"rows", json::array()}};
    if (report.efficiency_percent) entry["efficiency_pct"] = *report.efficiency_percent;
    for (const EfficiencyRow& row : report.rows) {
      entry["rows"].push_back({{"iteration", row.iteration},
                               {"included", row.included},
                               {"strategist", to_string(row.strategist)},
                               {"implementor", to_string(row.implementor)},
                               {"baseline", to_string(row.baseline)},
                               {"agree_baseline", row.agree_baseline},
                               {"agree_implementor", row.agree_implementor}});
    }
    structured["results"].push_back(entry);
    table.push_back({fmt("%g", xi),
                     report.efficiency_percent ? fmt("%.1f", *report.efficiency_percent) : "n/a",
                     std::to_string(report.counted)});
  }
  emit(output, structured, render_table(table));
  return 0;
}

int cmd_clusters(const std::string& trace_file, const ConsensusOptions& options,
                 std::size_t pca_dims, const OutputOptions& output) {
  Trace trace = TraceStore::read_file(trace_file);
  EmbeddedTrace embedded = embed_trace(trace, pca_dims);
  ConsensusResult result = consensus_cluster(embedded.vectors, options);

  json structured = {{"trace", trace_file},
                     {"cluster_count", result.cluster_count},
                     {"members", json::array()}};
  std::vector<std::vector<std::string>> table = {{"iteration", "cluster"}};
  for (std::size_t i = 0; i < embedded.iterations.size(); ++i) {
    structured["members"].push_back(
        {{"iteration", embedded.iterations[i]}, {"cluster", result.labels[i]}});
    table.push_back(
        {std::to_string(embedded.iterations[i]), std::to_string(result.labels[i])});
  }
  std::string text = "clusters: " + std::to_string(result.cluster_count) + "\n" +
                     render_table(table);
  emit(output, structured, text);
  return 0;
}

int cmd_convergence(const std::string& trace_file, const OutputOptions& output) {
  Trace trace = TraceStore::read_file(trace_file);
  std::vector<DistancePoint> distances = relative_distance_curve(trace);
  std::vector<DistancePoint> best = best_solution_curve(trace);

  json structured = {{"trace", trace_file},
                     {"relative_distance", json::array()},
                     {"best_solution_pct", json::array()}};
  std::vector<std::vector<std::string>> dist_table = {{"iteration", "relative_distance"}};
  for (const DistancePoint& p : distances) {
    structured["relative_distance"].push_back({{"iteration", p.iteration}, {"value", p.value}});
    dist_table.push_back({std::to_string(p.iteration), fmt("%.6g", p.value)});
  }
  std::vector<std::vector<std::string>> best_table = {{"iteration", "best_solution_pct"}};
  for (const DistancePoint& p : best) {
    structured["best_solution_pct"].push_back({{"iteration", p.iteration}, {"value", p.value}});
    best_table.push_back({std::to_string(p.iteration), fmt("%.6g", p.value)});
  }
  std::string text = "relative embedding distance (consecutive code-producing designs):\n" +
                     render_table(dist_table) +
                     "best-solution progress (percent of final best):\n" +
                     render_table(best_table);
  emit(output, structured, text);
  return 0;
}

int cmd_export_embedding(const std::string& trace_file, const ConsensusOptions& options,
                         std::size_t pca_dims, const OutputOptions& output) {
  Trace trace = TraceStore::read_file(trace_file);
  EmbeddedTrace embedded = embed_trace(trace, pca_dims);
  std::vector<int> labels(embedded.iterations.size(), 0);
  if (!embedded.vectors.empty()) {
    labels = consensus_cluster(embedded.vectors, options).labels;
  }

  json structured = {{"trace", trace_file}, {"rows", json::array()}};
  std::string text;
  for (std::size_t i = 0; i < embedded.iterations.size(); ++i) {
    structured["rows"].push_back({{"iteration", embedded.iterations[i]},
                                  {"cluster", labels[i]},
                                  {"vector", embedded.vectors[i]}});
    text += std::to_string(embedded.iterations[i]) + " " + std::to_string(labels[i]);
    for (double v : embedded.vectors[i]) text += " " + format_double(v);
    text += "\n";
  }
  emit(output, structured, text);
  return 0;
}

int cmd_stats(const std::string& trace_file, const OutputOptions& output) {
  Trace trace = TraceStore::read_file(trace_file);
  CompileStats compile = compile_stats(trace);
  std::vector<TokenStat> tokens = token_stats(trace);

  json structured = {{"trace", trace_file},
                     {"compile",
                      {{"code_producing", compile.code_producing},
                       {"first_compile_passed", compile.first_compile_passed},
                       {"first_pass_pct", compile.first_pass_percent}}},
                     {"status_counts", json::object()},
                     {"tokens", json::array()}};
  std::vector<std::vector<std::string>> status_table = {{"status", "count"}};
  for (const auto& [status, count] : compile.status_counts) {
    structured["status_counts"][status] = count;
    status_table.push_back({status, std::to_string(count)});
  }
  std::vector<std::vector<std::string>> token_table = {
      {"lane", "min", "max", "avg", "std_pct", "context_pct"}};
  for (const TokenStat& stat : tokens) {
    structured["tokens"].push_back({{"lane", stat.label},
                                    {"min", stat.min},
                                    {"max", stat.max},
                                    {"avg", stat.avg},
                                    {"std_pct", stat.std_pct},
                                    {"context_pct", stat.context_pct}});
    token_table.push_back({stat.label, std::to_string(stat.min), std::to_string(stat.max),
                           fmt("%.1f", stat.avg), fmt("%.1f", stat.std_pct),
                           fmt("%.1f", stat.context_pct)});
  }
  std::string text = "code-producing iterations: " + std::to_string(compile.code_producing) +
                     "\nfirst compile passed: " + std::to_string(compile.first_compile_passed) +
                     " (" + fmt("%.2f", compile.first_pass_percent) + "%)\n" +
                     render_table(status_table) + "per-iteration token usage:\n" +
                     render_table(token_table);
  emit(output, structured, text);
  return 0;
}

int cmd_cost(const std::string& trace_file, const std::string& prices_file,
             const OutputOptions& output) {
  Trace trace = TraceStore::read_file(trace_file);
  PriceTable prices = parse_price_table(read_text_file(prices_file));
  for (const std::string& warning : prices.warnings) {
    std::cerr << "warning: " << prices_file << ": " << warning << "\n";
  }
  if (prices.rows.empty()) {
    throw std::runtime_error("no usable price rows in " + prices_file);
  }
  CostReport report = cost_report(trace, prices);
  std::vector<TokenStat> tokens = token_stats(trace);

  json structured = {{"trace", trace_file},
                     {"iterations", report.iterations},
                     {"input_tokens", report.input_tokens},
                     {"output_tokens", report.output_tokens},
                     {"tokens_estimated", report.any_estimated},
                     {"scenarios", json::array()},
                     {"tokens", json::array()}};
  std::vector<std::vector<std::string>> cost_table = {
      {"model", "total_usd", "per_iteration_usd"}};
  for (const CostScenario& scenario : report.scenarios) {
    structured["scenarios"].push_back({{"model", scenario.model},
                                       {"total_usd", scenario.cost_total},
                                       {"per_iteration_usd", scenario.cost_per_iteration}});
    cost_table.push_back({scenario.model, fmt("%.2f", scenario.cost_total),
                          fmt("%.4f", scenario.cost_per_iteration)});
  }
  std::vector<std::vector<std::string>> token_table = {
      {"lane", "min", "max", "avg", "std_pct", "context_pct"}};
  for (const TokenStat& stat : tokens) {
    structured["tokens"].push_back({{"lane", stat.label},
                                    {"min", stat.min},
                                    {"max", stat.max},
                                    {"avg", stat.avg},
                                    {"std_pct", stat.std_pct},
                                    {"context_pct", stat.context_pct}});
    token_table.push_back({stat.label, std::to_string(stat.min), std::to_string(stat.max),
                           fmt("%.1f", stat.avg), fmt("%.1f", stat.std_pct),
                           fmt("%.1f", stat.context_pct)});
  }
  std::string text = "iterations: " + std::to_string(report.iterations) + "\n" +
                     "input tokens: " + std::to_string(report.input_tokens) + "\n" +
                     "output tokens: " + std::to_string(report.output_tokens) + "\n" +
                     std::string(report.any_estimated ? "(some token counts are estimated)\n" : "") +
                     render_table(cost_table) + "per-iteration token usage:\n" +
                     render_table(token_table);
  emit(output, structured, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optforge: LLM-guided design optimization runs and trace analysis"};
  app.require_subcommand(1);
  std::function<int()> action;

  struct RunArgs {
    std::string config, trace, work_dir;
    bool resume = false;
    std::optional<std::uint64_t> seed;
    OutputOptions output;
  };
  auto add_run_options = [&](CLI::App* cmd, auto args, bool resume_default) {
    cmd->add_option("--config", args->config, "Run configuration file (JSON)")->required();
    cmd->add_option("--trace", args->trace, "Trace file to write (JSONL)")->required();
    cmd->add_option("--work-dir", args->work_dir,
                    "Scratch directory for builds and runs (default: <trace>.work)");
    cmd->add_option("--seed", args->seed, "Override the config seed");
    if (!resume_default) cmd->add_flag("--resume", args->resume, "Continue an existing trace");
    add_output_flags(cmd, &args->output);
    cmd->callback([&, args, resume_default]() {
      action = [args, resume_default]() {
        return cmd_run(args->config, args->trace, args->work_dir,
                       resume_default || args->resume, args->seed, args->output);
      };
    });
  };
  auto run_args = std::make_shared<RunArgs>();
  add_run_options(app.add_subcommand("run", "Execute an optimization run"), run_args, false);
  auto resume_args = std::make_shared<RunArgs>();
  add_run_options(app.add_subcommand("resume", "Continue an interrupted run"), resume_args, true);

  {
    auto problem = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto full_scale = std::make_shared<bool>(false);
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = app.add_subcommand("gen-truth", "Generate ground-truth datasets");
    cmd->add_option("--problem", *problem, "Problem pack: kinetics or matmul")
        ->required()
        ->check(CLI::IsMember(pack_names()));
    cmd->add_option("--out", *out_dir, "Output directory")->required();
    cmd->add_option("--seed", *seed, "Dataset seed")->required();
    cmd->add_flag("--full-scale", *full_scale, "Full-size grids instead of desk-scale");
    add_output_flags(cmd, output.get());
    cmd->callback([&, problem, out_dir, seed, full_scale, output]() {
      action = [=]() { return cmd_gen_truth(*problem, *out_dir, *seed, *full_scale, *output); };
    });
  }

  CLI::App* analyze = app.add_subcommand("analyze", "Analyze a recorded trace");
  analyze->require_subcommand(1);
  {
    auto trace = std::make_shared<std::string>();
    auto xi = std::make_shared<std::string>("2.0");
    auto seed = std::make_shared<std::uint64_t>(0);
    auto pca = std::make_shared<std::size_t>(0);
    auto valid_only = std::make_shared<bool>(false);
    auto candidates = std::make_shared<std::size_t>(4096);
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = analyze->add_subcommand("efficiency", "Search-efficiency score");
    cmd->add_option("--trace", *trace, "Trace file")->required();
    cmd->add_option("--xi", *xi, "Comma-separated UCB exploration factors");
    cmd->add_option("--seed", *seed, "Baseline seed");
    cmd->add_option("--pca", *pca, "Project embeddings to this many principal components");
    cmd->add_flag("--valid-only", *valid_only, "Restrict the context set to valid designs");
    cmd->add_option("--candidates", *candidates, "Quasi-random acquisition candidates");
    add_output_flags(cmd, output.get());
    cmd->callback([&, trace, xi, seed, pca, valid_only, candidates, output]() {
      action = [=]() {
        return cmd_efficiency(*trace, *xi, *seed, *pca, *valid_only, *candidates, *output);
      };
    });
  }
  auto add_cluster_options = [](CLI::App* cmd, ConsensusOptions* options, std::size_t* pca) {
    cmd->add_option("--k-min", options->k_min, "Smallest k in the sweep");
    cmd->add_option("--k-max", options->k_max, "Largest k in the sweep");
    cmd->add_option("--runs", options->runs_per_k, "k-means runs per k");
    cmd->add_option("--seed", options->seed, "Clustering seed");
    cmd->add_option("--threshold", options->co_occurrence_threshold,
                    "Co-occurrence rate a pair must exceed to merge");
    cmd->add_option("--pca", *pca, "Project embeddings to this many principal components");
  };
  {
    auto trace = std::make_shared<std::string>();
    auto options = std::make_shared<ConsensusOptions>();
    auto pca = std::make_shared<std::size_t>(0);
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = analyze->add_subcommand("clusters", "Consensus-cluster the design artifacts");
    cmd->add_option("--trace", *trace, "Trace file")->required();
    add_cluster_options(cmd, options.get(), pca.get());
    add_output_flags(cmd, output.get());
    cmd->callback([&, trace, options, pca, output]() {
      action = [=]() { return cmd_clusters(*trace, *options, *pca, *output); };
    });
  }
  {
    auto trace = std::make_shared<std::string>();
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = analyze->add_subcommand("convergence", "Convergence curves");
    cmd->add_option("--trace", *trace, "Trace file")->required();
    add_output_flags(cmd, output.get());
    cmd->callback([&, trace, output]() {
      action = [=]() { return cmd_convergence(*trace, *output); };
    });
  }
  {
    auto trace = std::make_shared<std::string>();
    auto options = std::make_shared<ConsensusOptions>();
    auto pca = std::make_shared<std::size_t>(0);
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = analyze->add_subcommand(
        "export-embedding", "Emit code vectors plus cluster labels for external plotting");
    cmd->add_option("--trace", *trace, "Trace file")->required();
    add_cluster_options(cmd, options.get(), pca.get());
    add_output_flags(cmd, output.get());
    cmd->callback([&, trace, options, pca, output]() {
      action = [=]() { return cmd_export_embedding(*trace, *options, *pca, *output); };
    });
  }
  {
    auto trace = std::make_shared<std::string>();
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = analyze->add_subcommand("stats", "Compile and token statistics");
    cmd->add_option("--trace", *trace, "Trace file")->required();
    add_output_flags(cmd, output.get());
    cmd->callback([&, trace, output]() {
      action = [=]() { return cmd_stats(*trace, *output); };
    });
  }

  CLI::App* report = app.add_subcommand("report", "Summarize a recorded trace");
  report->require_subcommand(1);
  {
    auto trace = std::make_shared<std::string>();
    auto prices = std::make_shared<std::string>();
    auto output = std::make_shared<OutputOptions>();
    CLI::App* cmd = report->add_subcommand("cost", "Price a trace under a rate table");
    cmd->add_option("--trace", *trace, "Trace file")->required();
    cmd->add_option("--prices", *prices, "Price table: rows 'model, input_per_1M, output_per_1M'")
        ->required();
    add_output_flags(cmd, output.get());
    cmd->callback([&, trace, prices, output]() {
      action = [=]() { return cmd_cost(*trace, *prices, *output); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "run 'optforge --help' or 'optforge <subcommand> --help' for the flag list\n";
    return 2;
  }

  try {
    return action ? action() : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
