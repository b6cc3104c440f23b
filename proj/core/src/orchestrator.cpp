#include "optforge/orchestrator.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "optforge/agents.hpp"
#include "optforge/dataio.hpp"
#include "optforge/evaluator.hpp"

namespace optforge {

using nlohmann::json;

namespace {

constexpr const char* kDefaultCompileCommand = "g++ -O2 -std=c++17 {source} -o {binary}";

AgentEndpoint endpoint_from_json(const json& j, double default_temperature) {
  AgentEndpoint e;
  e.temperature = default_temperature;
  for (const auto& [key, value] : j.items()) {
    if (key == "base_url") {
      e.base_url = value.get<std::string>();
    } else if (key == "model") {
      e.model = value.get<std::string>();
    } else if (key == "temperature") {
      e.temperature = value.get<double>();
    } else if (key == "timeout_seconds") {
      e.timeout_seconds = value.get<double>();
    } else if (key == "max_context") {
      e.max_context = value.get<std::int64_t>();
    } else {
      throw std::invalid_argument("unknown endpoint key: " + key);
    }
  }
  return e;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& file) {
  json j = json::parse(read_text_file(file));
  RunConfig config;
  config.compile_command = kDefaultCompileCommand;
  bool strategist_set = false;
  bool implementor_set = false;
  json strategist_json;
  json implementor_json;

  for (const auto& [key, value] : j.items()) {
    if (key == "problem") {
      config.problem = value.get<std::string>();
    } else if (key == "iterations" || key == "N") {
      config.iterations = value.get<std::int64_t>();
    } else if (key == "top_k" || key == "P") {
      config.top_k = value.get<std::int64_t>();
    } else if (key == "bottom_k" || key == "Q") {
      config.bottom_k = value.get<std::int64_t>();
    } else if (key == "recent_k" || key == "R") {
      config.recent_k = value.get<std::int64_t>();
    } else if (key == "max_fix_attempts" || key == "K") {
      config.max_fix_attempts = value.get<std::int64_t>();
    } else if (key == "innovate_priority_until") {
      config.innovate_priority_until = value.get<std::int64_t>();
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "full_scale") {
      config.full_scale = value.get<bool>();
    } else if (key == "repetitions") {
      config.repetitions = value.get<int>();
    } else if (key == "run_timeout_seconds") {
      config.run_timeout_seconds = value.get<double>();
    } else if (key == "compile_timeout_seconds") {
      config.compile_timeout_seconds = value.get<double>();
    } else if (key == "temperature") {
      config.temperature = value.get<double>();
    } else if (key == "sketch") {
      config.sketch = value.get<std::string>();
    } else if (key == "hints") {
      config.hints = value.get<std::string>();
    } else if (key == "strategist") {
      strategist_json = value;
      strategist_set = true;
    } else if (key == "implementor") {
      implementor_json = value;
      implementor_set = true;
    } else if (key == "api_key") {
      config.api_key = value.get<std::string>();
    } else if (key == "compile_command") {
      config.compile_command = value.get<std::string>();
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  if (!strategist_set || !implementor_set) {
    throw std::invalid_argument("config must define strategist and implementor endpoints");
  }
  config.strategist = endpoint_from_json(strategist_json, config.temperature);
  config.implementor = endpoint_from_json(implementor_json, config.temperature);
  if (config.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (config.max_fix_attempts < 0) throw std::invalid_argument("max_fix_attempts must be >= 0");

  if (const char* base = std::getenv("OPTFORGE_CHAT_BASE_URL"); base && *base) {
    config.strategist.base_url = base;
    config.implementor.base_url = base;
  }
  if (const char* key = std::getenv("OPTFORGE_CHAT_API_KEY"); key && *key) {
    config.api_key = std::string(key);
  }
  return config;
}

std::string config_fingerprint(const RunConfig& config) {
  std::ostringstream out;
  out << "problem=" << config.problem << ";iterations=" << config.iterations
      << ";P=" << config.top_k << ";Q=" << config.bottom_k << ";R=" << config.recent_k
      << ";K=" << config.max_fix_attempts
      << ";innovate_until=" << config.innovate_priority_until << ";seed=" << config.seed
      << ";full_scale=" << config.full_scale << ";reps=" << config.repetitions
      << ";run_timeout=" << format_double(config.run_timeout_seconds)
      << ";compile_timeout=" << format_double(config.compile_timeout_seconds)
      << ";temperature=" << format_double(config.temperature)
      << ";sketch=" << (config.sketch ? *config.sketch : std::string("<none>"))
      << ";hints=" << config.hints << ";compile_command=" << config.compile_command;
  for (const AgentEndpoint* e : {&config.strategist, &config.implementor}) {
    out << ";endpoint=" << e->base_url << "," << e->model << ","
        << format_double(e->temperature) << "," << e->max_context;
  }
  return to_hex(fnv1a64(out.str()));
}

namespace {

std::size_t assistant_count(const std::vector<ChatMessage>& transcript) {
  std::size_t count = 0;
  for (const auto& m : transcript) {
    if (m.role == "assistant") ++count;
  }
  return count;
}

struct IterationTokens {
  TokenUsage* usage;
  void add_strategist(const ChatReply& reply) {
    usage->strategist_in += reply.prompt_tokens;
    usage->strategist_out += reply.completion_tokens;
    usage->estimated = usage->estimated || reply.usage_estimated;
  }
  void add_implementor(const ChatReply& reply) {
    usage->implementor_in += reply.prompt_tokens;
    usage->implementor_out += reply.completion_tokens;
    usage->estimated = usage->estimated || reply.usage_estimated;
  }
};

}  // namespace

std::size_t strategist_ordinal_after(const Trace& trace) {
  std::size_t total = 0;
  for (const auto& r : trace.records) total += assistant_count(r.strategist_transcript);
  return total;
}

std::size_t implementor_ordinal_after(const Trace& trace) {
  std::size_t total = 0;
  for (const auto& r : trace.records) total += assistant_count(r.implementor_transcript);
  return total;
}

RunSummary run_optimization(const RunConfig& config, const RunPaths& paths, bool resume,
                            const RecordObserver& observer) {
  validate_endpoint(config.strategist);
  validate_endpoint(config.implementor);

  PackOptions pack_options;
  pack_options.seed = config.seed;
  pack_options.full_scale = config.full_scale;
  ProblemPack pack = make_pack(config.problem, pack_options);
  if (config.sketch) pack.sketches = {*config.sketch};

  const std::string fingerprint = config_fingerprint(config);
  if (!resume && std::filesystem::exists(paths.trace_file)) {
    Trace existing = TraceStore::read_file(paths.trace_file);
    if (existing.header || !existing.records.empty()) {
      throw std::runtime_error("trace file already exists (use resume): " +
                               paths.trace_file.string());
    }
  }
  TraceStore store(paths.trace_file);
  if (resume) {
    if (!store.trace().header) {
      throw std::runtime_error("cannot resume: trace has no header: " +
                               paths.trace_file.string());
    }
    if (store.trace().header->fingerprint != fingerprint) {
      throw std::runtime_error("cannot resume: config fingerprint mismatch (trace " +
                               store.trace().header->fingerprint + ", config " + fingerprint +
                               ")");
    }
  } else {
    store.write_header(TraceHeader{fingerprint, 1});
  }

  auto strategist = make_chat_backend(config.strategist, "strategist",
                                      strategist_ordinal_after(store.trace()), config.api_key);
  auto implementor = make_chat_backend(config.implementor, "implementor",
                                       implementor_ordinal_after(store.trace()), config.api_key);

  ValidationConfig validation_config;
  validation_config.compile_command = config.compile_command;
  validation_config.compile_timeout_seconds = config.compile_timeout_seconds;
  validation_config.run_timeout_seconds = config.run_timeout_seconds;

  EvaluatorConfig evaluator_config;
  evaluator_config.repetitions = config.repetitions;
  evaluator_config.run_timeout_seconds = config.run_timeout_seconds;

  std::filesystem::create_directories(paths.work_root);

  int consecutive_transport_failures = 0;
  for (std::int64_t iteration = store.trace().last_iteration() + 1;
       iteration <= config.iterations; ++iteration) {
    auto started = std::chrono::steady_clock::now();
    DesignRecord record;
    record.iteration = static_cast<int>(iteration);
    IterationTokens tokens{&record.tokens};

    CuratedContext curated = curate_context(
        store.trace(), static_cast<int>(config.top_k), static_cast<int>(config.bottom_k),
        static_cast<int>(config.recent_k));

    PromptContext prompt_ctx;
    prompt_ctx.problem_brief = pack.brief;
    prompt_ctx.sketches = pack.sketches;
    prompt_ctx.hints = config.hints;
    prompt_ctx.iteration = iteration;
    prompt_ctx.innovate_priority_until = config.innovate_priority_until;

    auto work_dir = paths.work_root / ("iter-" + std::to_string(iteration));

    record.strategist_transcript = build_strategist_prompt(prompt_ctx, curated);
    auto strategist_outcome = strategist->complete(record.strategist_transcript);

    StrategistDecision decision;
    bool implementor_reachable = true;
    if (!strategist_outcome.ok()) {
      record.strategy = Strategy::NotAvailable;
      record.validation.status = ValidationStatus::NoCode;
      record.validation.last_error = "strategist unavailable: " + strategist_outcome.error->message;
      implementor_reachable = false;
      if (strategist_outcome.error->transport) ++consecutive_transport_failures;
    } else {
      consecutive_transport_failures = 0;
      tokens.add_strategist(*strategist_outcome.reply);
      record.strategist_transcript.push_back({"assistant", strategist_outcome.reply->content});
      decision = parse_strategist_reply(strategist_outcome.reply->content);
      record.strategy = decision.strategy;
      record.instructions = decision.instructions;
    }

    if (implementor_reachable) {
      record.implementor_transcript = build_implementor_prompt(prompt_ctx, decision, curated);
      std::optional<std::string> artifact;
      ValidationReport report;
      int attempts_used = 0;
      bool halted = false;  // transport failure or code-less regeneration

      auto implementor_outcome = implementor->complete(record.implementor_transcript);
      if (!implementor_outcome.ok()) {
        record.validation.last_error =
            "implementor unavailable: " + implementor_outcome.error->message;
        halted = true;
      } else {
        tokens.add_implementor(*implementor_outcome.reply);
        record.implementor_transcript.push_back(
            {"assistant", implementor_outcome.reply->content});
        artifact = extract_code_block(implementor_outcome.reply->content);
        if (artifact) report = validate_candidate(*artifact, pack.correctness,
                                                  validation_config, work_dir);
      }

      while (!halted && artifact && report.status != ValidationStatus::Valid &&
             attempts_used < config.max_fix_attempts) {
        record.implementor_transcript.push_back(
            build_feedback_message(report.first_failure_stage, report.diagnostics));
        auto retry = implementor->complete(record.implementor_transcript);
        if (!retry.ok()) {
          halted = true;
          break;
        }
        ++attempts_used;
        tokens.add_implementor(*retry.reply);
        record.implementor_transcript.push_back({"assistant", retry.reply->content});
        auto regenerated = extract_code_block(retry.reply->content);
        if (!regenerated) break;  // keep the most recent failing artifact
        artifact = regenerated;
        report = validate_candidate(*artifact, pack.correctness, validation_config, work_dir);
      }

      record.validation.attempts_used = attempts_used;
      if (!artifact) {
        record.validation.status = ValidationStatus::NoCode;
        if (!record.validation.last_error) {
          record.validation.last_error = "no code block in implementor reply";
        }
      } else {
        record.artifact = artifact;
        record.validation.status = report.status;
        if (report.status == ValidationStatus::Valid) {
          auto evaluation = evaluate_candidate(*report.binary, pack.conditions,
                                               evaluator_config, work_dir);
          if (evaluation.ok()) {
            record.metrics = evaluation.metrics;
            record.score = evaluation.score;
          } else {
            record.validation.status = ValidationStatus::RunFailed;
            record.validation.last_error = "evaluation failed: " + evaluation.failure;
          }
        } else {
          record.validation.last_error = report.diagnostics;
        }
      }
    }

    record.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    store.append(record);
    if (observer) observer(store.trace().records.back());

    if (consecutive_transport_failures >= 3) {
      throw std::runtime_error(
          "endpoint unreachable for 3 consecutive iterations; partial trace kept at " +
          paths.trace_file.string());
    }
  }

  RunSummary summary;
  summary.iterations_completed = store.trace().last_iteration();
  for (const auto& r : store.trace().records) {
    if (r.validation.valid()) ++summary.valid_designs;
  }
  if (const auto* best = best_record(store.trace())) summary.best = *best;
  return summary;
}

}  // namespace optforge
