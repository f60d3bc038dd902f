// Copyright 2026 The ensq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ensq <experiment> --config FILE [--seed S] [--trials T] [--threads N] [--out DIR]
// ensq program FILE        print the canonical form of a pulse program
//
// Exit status: 0 success, 2 configuration/schema/parse error, 3 numerical
// failure, 1 anything else. Errors are printed as "error: <kind>: <message>".

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ensq/program_text.hpp"
#include "ensq/runner.hpp"

namespace {

int fail(const char* kind, const std::string& what, int code) {
  std::cerr << "error: " << kind << ": " << what << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulation of Rydberg-blockaded ensemble qubits"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::int64_t trials = 0;
    int threads = 0;
  };
  Options opt;
  std::vector<CLI::App*> experiments;
  for (const auto& name : ensq::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", opt.config, "INI configuration file");
    sub->add_option("--seed", opt.seed, "override run.seed");
    sub->add_option("--trials", opt.trials, "override run.trials");
    sub->add_option("--threads", opt.threads, "override run.threads");
    sub->add_option("--out", opt.out, "output directory (default: run.output_dir, $ENSQ_OUTPUT_DIR, ./ensq-out)");
    experiments.push_back(sub);
  }
  std::string program_file;
  auto* program = app.add_subcommand("program", "parse a pulse program and print its canonical form");
  program->add_option("file", program_file, "program text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (program->parsed()) {
      std::ifstream in(program_file);
      if (!in) return fail("schema", "cannot open " + program_file, 2);
      std::stringstream buf;
      buf << in.rdbuf();
      std::cout << ensq::format_program(ensq::parse_program(buf.str()));
      return 0;
    }
    for (auto* sub : experiments) {
      if (!sub->parsed()) continue;
      ensq::Config cfg = opt.config.empty() ? ensq::Config{} : ensq::Config::from_file(opt.config);
      if (sub->count("--seed")) cfg.set("run.seed", std::to_string(opt.seed));
      if (sub->count("--trials")) cfg.set("run.trials", std::to_string(opt.trials));
      if (sub->count("--threads")) cfg.set("run.threads", std::to_string(opt.threads));
      const auto dir = ensq::resolve_output_dir(cfg, opt.out);
      const auto files = ensq::run_experiment(sub->get_name(), cfg);
      ensq::write_artifacts(dir, files);
      std::cout << "wrote " << files.size() << " files to " << dir.string() << '\n';
      return 0;
    }
  } catch (const ensq::ParseError& e) {
    return fail("parse", e.what(), 2);
  } catch (const ensq::ValidationError& e) {
    return fail("schema", e.what(), 2);
  } catch (const ensq::NumericalError& e) {
    return fail("numerical", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 1;
}
