/*
 * Copyright 2026 The envmx Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// envmx command-line driver: run, tentpole, filter, serve.
// Exit codes: 0 ok, 1 usage/config/input error, 2 evaluation failure under fail_fast.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "envmx/envmx.hpp"
#include "envmx/serve.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

unsigned default_threads() {
  if (const char* env = std::getenv("ENVMX_THREADS")) {
    if (auto v = envmx::parse_integer(env); v && *v > 0) return static_cast<unsigned>(*v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

int cmd_run(const std::string& config_path, std::string out_dir, std::optional<std::uint64_t> seed,
            unsigned threads, bool fail_fast) {
  envmx::SweepConfig cfg = envmx::parse_config(config_path);
  if (fail_fast) cfg.fail_fast = true;
  if (out_dir.empty()) out_dir = cfg.output.directory;

  const envmx::PreparedSweep prepared = envmx::prepare(cfg, seed);
  envmx::ResultTable table;
  try {
    table = envmx::run(prepared, threads);
  } catch (const envmx::RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);
  envmx::write_file((out / "results.csv").string(), envmx::to_csv(table.rows));
  envmx::export_bundle(table, (out / "bundle.json").string());
  envmx::write_file((out / "config.canonical.json").string(), envmx::canonical_config_text(prepared.config));
  if (prepared.config.output.per_technology_csv) envmx::export_per_technology(table.rows, out_dir);
  if (prepared.config.faults && prepared.config.faults->accuracy_floor) {
    const auto kept = envmx::accuracy_filter(table.rows, *prepared.config.faults->accuracy_floor);
    envmx::write_file((out / "results.filtered.csv").string(), envmx::to_csv(kept));
  }

  std::size_t errors = 0;
  for (const auto& r : table.rows) errors += r.error ? 1 : 0;
  std::cerr << table.rows.size() << " rows (" << errors << " errors) -> " << out_dir
            << " [fingerprint " << table.config_fingerprint << "]\n";
  return kExitOk;
}

int cmd_tentpole(const std::string& records_path, const std::string& tech_name,
                 const std::string& polarity_name, const std::string& defaults_path) {
  const auto tech = envmx::Technology::parse(tech_name);
  if (!tech) {
    std::cerr << "error: unknown technology '" << tech_name << "'\n";
    return kExitUsage;
  }
  const auto polarity = envmx::parse_polarity(polarity_name);
  if (!polarity) {
    std::cerr << "error: unknown polarity '" << polarity_name << "'\n";
    return kExitUsage;
  }
  const auto records = envmx::load_cell_records(records_path);
  envmx::CellDefaults defaults;
  std::string dpath = defaults_path;
  if (dpath.empty()) {
    const auto sibling = std::filesystem::path(records_path).parent_path() / "defaults.csv";
    if (std::filesystem::exists(sibling)) dpath = sibling.string();
  }
  if (!dpath.empty()) defaults = envmx::CellDefaults::load(dpath);
  const auto def = envmx::build_tentpole(records, *tech, *polarity, defaults);
  std::cout << envmx::cell_definition_json(def).dump(2) << "\n";
  return kExitOk;
}

int cmd_filter(const std::string& csv_path, const std::string& where) {
  const envmx::CsvTable table = envmx::parse_result_csv(envmx::read_file(csv_path));
  std::optional<envmx::Predicate> pred;
  try {
    pred = envmx::Predicate::compile(where, table.columns);
  } catch (const envmx::ExpressionError& e) {
    std::cerr << "error: " << e.what() << "\n  " << where << "\n  "
              << std::string(e.position(), ' ') << "^\n";
    return kExitUsage;
  }
  std::string out = table.raw_header + "\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if ((*pred)(table.rows[i])) out += table.raw_rows[i] + "\n";
  }
  std::cout << out;
  return kExitOk;
}

int cmd_serve(const std::string& bundle, int port, const std::string& assets) {
  envmx::ServeOptions opt;
  opt.bundle_path = bundle;
  opt.port = port;
  opt.assets_dir = assets;
  if (!envmx::serve(opt)) {
    std::cerr << "error: cannot listen on port " << port << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envmx: embedded NVM design-space exploration"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Evaluate every point of a sweep configuration");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = default_threads();
  bool fail_fast = false;
  run->add_option("config", config_path, "Sweep configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (default: output.directory)");
  run->add_option("--seed", seed, "Override the configuration seed");
  run->add_option("--threads", threads, "Worker threads (default: ENVMX_THREADS or core count)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--fail-fast", fail_fast, "Abort with exit 2 on the first failing point");

  auto* tent = app.add_subcommand("tentpole", "Print a tentpole cell definition as JSON");
  std::string records_path, tech, polarity = "optimistic", defaults_path;
  tent->add_option("records", records_path, "Cell record CSV")->required();
  tent->add_option("--tech", tech, "Technology")->required();
  tent->add_option("--polarity", polarity, "optimistic or pessimistic");
  tent->add_option("--defaults", defaults_path, "Per-technology defaults CSV");

  auto* filt = app.add_subcommand("filter", "Filter a results CSV with a predicate");
  std::string csv_path, where;
  filt->add_option("results", csv_path, "Results CSV")->required();
  filt->add_option("--where", where, "Predicate expression")->required();

  auto* srv = app.add_subcommand("serve", "Serve a bundle and dashboard assets locally");
  std::string bundle_path, assets;
  int port = 8765;
  srv->add_option("bundle", bundle_path, "bundle.json")->required();
  srv->add_option("--port", port, "TCP port");
  srv->add_option("--assets", assets, "Dashboard static assets directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, seed, threads, fail_fast);
    if (*tent) return cmd_tentpole(records_path, tech, polarity, defaults_path);
    if (*filt) return cmd_filter(csv_path, where);
    if (*srv) return cmd_serve(bundle_path, port, assets);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
