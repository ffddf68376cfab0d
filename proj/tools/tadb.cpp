// tadb: interactive debugger, protocol server and determinism checker for
// timing-annotated guest programs.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tadb/determinism.hpp"
#include "tadb/error.hpp"
#include "tadb/protocol.hpp"
#include "tadb/repl.hpp"
#include "tadb/server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Timing-annotated deterministic debugger"};
  std::string program_path, model_path, mode_name = "det", serve_spec, script_path;
  std::uint64_t seed = 0;
  int determinism_runs = 0;

  app.add_option("-p,--program", program_path, "guest program (.tasm)")->check(CLI::ExistingFile);
  app.add_option("-m,--model", model_path, "timing model (key=value lines); default is uniform cost 1")
      ->check(CLI::ExistingFile);
  app.add_option("--mode", mode_name, "scheduling mode")->check(CLI::IsMember({"det", "rand"}));
  app.add_option("--seed", seed, "seed for rand mode (first seed for --check-determinism)");
  auto* serve = app.add_option("--serve", serve_spec, "serve the JSON-line protocol: stdio, tcp:<port> or ws:<port>");
  auto* script = app.add_option("--script", script_path, "run debugger commands from a file, echoing each one")
                     ->check(CLI::ExistingFile);
  auto* check = app.add_option("--check-determinism", determinism_runs,
                               "run the program to completion N times and count distinct outcomes")
                    ->check(CLI::Range(2, 1'000'000));
  serve->excludes(script);
  serve->excludes(check);
  script->excludes(check);
  CLI11_PARSE(app, argc, argv);

  auto mode = mode_name == "rand" ? tadb::SchedulerMode::random(seed) : tadb::SchedulerMode::deterministic();

  try {
    std::string program_text, model_text;
    if (!program_path.empty()) program_text = tadb::read_text_file(program_path);
    if (!model_path.empty()) model_text = tadb::read_text_file(model_path);

    if (determinism_runs > 0) {
      if (program_path.empty()) {
        std::cerr << "--check-determinism needs --program\n";
        return 2;
      }
      auto report = tadb::check_determinism(program_text, model_text, determinism_runs, mode);
      std::cout << tadb::format_report(report, mode);
      if (mode.kind == tadb::SchedulerMode::Kind::Deterministic) {
        bool ok = report.distinct_hashes == 1;
        std::cout << (ok ? "deterministic\n" : "NOT deterministic\n");
        return ok ? 0 : 1;
      }
      return 0;
    }

    if (!serve_spec.empty()) {
      if (!program_path.empty()) tadb::parse_program(program_text);  // fail early on a bad program
      if (!model_path.empty()) tadb::load_model(model_text);
      auto factory = [&]() {
        auto session = std::make_unique<tadb::ProtocolSession>();
        if (!program_path.empty()) session->open(program_text, model_text, mode);
        return session;
      };
      return tadb::serve(serve_spec, factory, std::cin, std::cout, std::cerr);
    }

    tadb::Repl repl(std::cout);
    if (!program_path.empty()) repl.open(program_text, model_text, mode);
    if (!script_path.empty()) {
      std::ifstream in(script_path);
      repl.run(in, true);
    } else {
      repl.run(std::cin, false);
    }
    return 0;
  } catch (const tadb::Error& e) {
    std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
    return 1;
  }
}
