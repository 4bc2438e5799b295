#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "readtrace/analysis.hpp"
#include "readtrace/error.hpp"
#include "readtrace/heatmap.hpp"
#include "readtrace/prepare.hpp"
#include "readtrace/serialization.hpp"
#include "readtrace/study.hpp"
#include "readtrace/study_http.hpp"

namespace fs = std::filesystem;
using namespace readtrace;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInternal = 1;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::vector<SourceItem> load_source(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_source(in);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

void run_prepare(const fs::path& source, std::uint64_t seed, std::size_t sample_size,
                 const fs::path& out) {
  const PreparedStimuli prepared = prepare_stimuli(load_source(source), seed, sample_size);
  std::string stimuli;
  for (const StimulusRecord& r : prepared.stimuli) {
    stimuli += stimulus_to_json_line(r);
    stimuli += '\n';
  }
  ensure_dir(out);
  write_file(out / "stimuli.jsonl", stimuli);
  write_file(out / "manifest.json", manifest_to_json(prepared.manifest));
  std::cout << render_length_table(prepared.manifest);
}

void run_process(const fs::path& stimuli, const fs::path& export_file,
                 const cli::ToolConfig& config, const fs::path& out) {
  const StimulusCatalog catalog(load_stimuli(stimuli));
  const ProcessedCorpus corpus = process_corpus(load_trials(export_file), catalog, config.analysis);
  write_file(out, analysis_records_jsonl(corpus));
  std::printf("%zu trials, %zu excluded (%zu low coverage, %zu abandoned), %zu malformed\n",
              corpus.exclusions.trials, corpus.exclusions.excluded(), corpus.exclusions.low_coverage,
              corpus.exclusions.abandoned, corpus.malformed_trials);
}

void run_analyze(const fs::path& stimuli, const fs::path& export_file,
                 const std::optional<fs::path>& similarity_file, const cli::ToolConfig& config,
                 const fs::path& out) {
  const StimulusCatalog catalog(load_stimuli(stimuli));
  std::vector<TrialRecord> trials = load_trials(export_file);
  if (trials.empty()) throw ValidationError("export " + export_file.string() + " holds no trials");
  std::optional<std::map<std::string, double>> similarity;
  if (similarity_file) similarity = load_similarities(*similarity_file);
  const AnalysisReport report =
      analyze(std::move(trials), catalog, config.analysis, similarity ? &*similarity : nullptr);
  // Render everything before touching the output directory.
  const std::string agreement = agreement_to_json(report.agreement, config.analysis);
  const std::string behavior = behavior_to_json(report.behavior);
  const std::string summary = render_summary(report);
  ensure_dir(out);
  write_file(out / "agreement.json", agreement);
  write_file(out / "behavior.json", behavior);
  write_file(out / "summary.txt", summary);
  std::cout << summary;
}

void run_heatmap(const fs::path& stimuli, const fs::path& export_file, const std::string& id,
                 const cli::ToolConfig& config, const fs::path& out) {
  const StimulusCatalog catalog(load_stimuli(stimuli));
  if (!catalog.contains(id)) throw ValidationError("unknown stimulus '" + id + "'");
  std::vector<TrialRecord> trials;
  for (TrialRecord& t : load_trials(export_file)) {
    if (t.stimulus_id == id) trials.push_back(std::move(t));
  }
  const ProcessedCorpus corpus = process_corpus(std::move(trials), catalog, config.analysis);
  const TokenizedStimulus& stimulus = catalog.at(id);
  write_file(out, render_heatmap(stimulus, stimulus_aggregate(corpus, stimulus)));
}

void run_export(const fs::path& stimuli, const fs::path& data_dir, const cli::ToolConfig& config,
                const fs::path& out) {
  if (!fs::is_directory(data_dir)) throw ValidationError("no data directory " + data_dir.string());
  StudyService service(load_stimuli(stimuli), config.study, data_dir);
  write_file(out, service.export_jsonl());
}

int run_serve(const fs::path& stimuli, const std::optional<fs::path>& data_dir,
              const cli::ToolConfig& config, const std::string& host, int port) {
  if (data_dir) ensure_dir(*data_dir);
  StudyService service(load_stimuli(stimuli), config.study, data_dir);
  StudyHttpServer server(service);
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread worker([&] { server.listen(); });
  server.wait_until_ready();
  std::printf("listening on %s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  auto last_sweep = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    if (std::chrono::steady_clock::now() - last_sweep > std::chrono::seconds(60)) {
      service.expire_reservations();
      last_sweep = std::chrono::steady_clock::now();
    }
  }
  server.stop();
  worker.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hover-based reading analysis for preference annotation studies"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<fs::path> config_path;
  app.add_option("--config", config_path, "JSON config with \"analysis\" and \"study\" sections")
      ->check(CLI::ExistingFile);

  fs::path source, stimuli, export_file, out, data_dir_arg;
  std::optional<fs::path> data_dir, similarity;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
  std::string stimulus_id;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto* prepare = app.add_subcommand("prepare", "Filter and sample a source corpus into stimuli");
  prepare->add_option("source", source, "Line-delimited {prompt, chosen, rejected}")->required();
  prepare->add_option("--seed", seed)->required();
  prepare->add_option("--sample-size", sample_size)->required();
  prepare->add_option("--out", out, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Run the annotation study service");
  serve->add_option("--stimuli", stimuli)->required()->check(CLI::ExistingFile);
  serve->add_option("--data-dir", data_dir, "Journal directory, replayed on start");
  serve->add_option("--host", host);
  serve->add_option("--port", port, "0 picks a free port");
  serve->add_option("--seed", seed, "Assignment seed");

  auto* process = app.add_subcommand("process", "Per-trial pipeline output as JSON lines");
  process->add_option("--stimuli", stimuli)->required()->check(CLI::ExistingFile);
  process->add_option("--export", export_file)->required()->check(CLI::ExistingFile);
  process->add_option("--out", out)->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "Agreement report and behavioral summary");
  analyze_cmd->add_option("--stimuli", stimuli)->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--export", export_file)->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--similarity", similarity, "Line-delimited {stimulus_id, similarity}")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", out, "Output directory")->required();

  auto* heatmap = app.add_subcommand("heatmap", "Word-level attention heatmap as HTML");
  heatmap->add_option("--stimuli", stimuli)->required()->check(CLI::ExistingFile);
  heatmap->add_option("--export", export_file)->required()->check(CLI::ExistingFile);
  heatmap->add_option("--stimulus-id", stimulus_id)->required();
  heatmap->add_option("--out", out)->required();

  auto* export_cmd = app.add_subcommand("export", "Export trial records from a service journal");
  export_cmd->add_option("--stimuli", stimuli)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--data-dir", data_dir_arg)->required();
  export_cmd->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    cli::ToolConfig config = cli::load_config(config_path);
    if (serve->parsed() && serve->count("--seed") > 0) config.study.seed = seed;
    if (prepare->parsed()) run_prepare(source, seed, sample_size, out);
    if (serve->parsed()) return run_serve(stimuli, data_dir, config, host, port);
    if (process->parsed()) run_process(stimuli, export_file, config, out);
    if (analyze_cmd->parsed()) run_analyze(stimuli, export_file, similarity, config, out);
    if (heatmap->parsed()) run_heatmap(stimuli, export_file, stimulus_id, config, out);
    if (export_cmd->parsed()) run_export(stimuli, data_dir_arg, config, out);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const NotFoundError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const MalformedTrialError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return 0;
}
