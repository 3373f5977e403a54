// parakon: run, list and validate experiments.
//
// Exit codes: 0 all checks passed, 2 usage or domain error, 3 numerical
// failure, 4 an acceptance threshold failed.

#include "parakon/cli/experiments.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace parakon;
using namespace parakon::cli;

namespace {

enum Exit { ok = 0, usage = 2, numerical = 3, threshold = 4 };

struct Outcome {
  int code = ok;
  std::string message;
};

int list_command(const std::string& dir) {
  std::size_t width = 0;
  for (const auto& e : registry()) width = std::max(width, e.name.size());
  for (const auto& e : registry()) std::cout << e.name << std::string(width + 2 - e.name.size(), ' ') << e.doc << '\n';
  if (dir.empty()) return ok;
  if (!fs::is_directory(dir)) {
    std::cerr << "error: config directory '" << dir << "' not found\n";
    return usage;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".toml") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (!files.empty()) std::cout << "\nconfigs in " << dir << ":\n";
  for (const auto& f : files) {
    try {
      const auto c = load_config(f);
      std::cout << "  " << f.filename().string() << "  (" << (c.kind.empty() ? "no kind" : c.kind) << ")\n";
    } catch (const std::exception& e) {
      std::cout << "  " << f.filename().string() << "  (invalid: " << e.what() << ")\n";
    }
  }
  return ok;
}

int validate_command(const std::string& file) {
  try {
    if (!fs::exists(file)) throw usage_error("config '" + file + "' not found");
    const auto c = load_config(file);
    validate(c, experiment_names());
    std::cout << file << ": ok (" << c.kind << ")\n";
    return ok;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
}

int schema_command() {
  for (const auto& k : config_schema()) std::cout << k.key << " (" << k.type << "): " << k.doc << '\n';
  return ok;
}

int run_command(std::vector<std::string> kinds, const std::string& config, const std::string& out,
                std::optional<std::uint64_t> seed, unsigned jobs) {
  std::vector<ExperimentConfig> cfgs;
  try {
    if (kinds.size() == 1 && kinds[0] == "all") kinds = experiment_names();
    if (!config.empty() && kinds.size() != 1) throw usage_error("--config applies to a single experiment");
    for (const auto& k : kinds) {
      find_experiment(k);
      ExperimentConfig c = config.empty() ? defaults_for(k) : load_config(config, k);
      if (c.kind != k) throw usage_error(config + ": config is for '" + c.kind + "', not '" + k + "'");
      if (seed) c.seed = *seed;
      validate(c, experiment_names());
      cfgs.push_back(std::move(c));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }

  std::vector<Outcome> outcomes(cfgs.size());
  auto run_one = [&](std::size_t i) {
    const auto& c = cfgs[i];
    fs::path root = c.out_dir;
    if (!out.empty()) root = out;
    if (const char* env = std::getenv("PARAKON_OUT"); env && *env) root = env;
    Outcome& o = outcomes[i];
    try {
      const ExperimentResult r = run_experiment(c, root);
      if (r.passed()) {
        o.message = c.kind + ": pass (" + r.dir.string() + ")";
      } else {
        o.code = threshold;
        std::string failed;
        for (const auto& f : r.failed_checks) failed += (failed.empty() ? "" : ", ") + f;
        o.message = c.kind + ": FAIL " + failed + " (" + r.dir.string() + ")";
      }
    } catch (const numerical_error& e) {
      o = {numerical, c.kind + ": numerical error: " + e.what()};
    } catch (const usage_error& e) {
      o = {usage, c.kind + ": error: " + std::string(e.what())};
    } catch (const domain_error& e) {
      o = {usage, c.kind + ": domain error: " + std::string(e.what())};
    } catch (const std::exception& e) {
      o = {numerical, c.kind + ": " + std::string(e.what())};
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) run_one(i);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfgs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = ok;
  for (const auto& o : outcomes) {
    (o.code == ok ? std::cout : std::cerr) << o.message << '\n';
    // usage beats numerical beats threshold
    if (o.code != ok && (code == ok || o.code < code)) code = o.code;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parabolic power concavity experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one or more experiments ('all' runs every kind)");
  std::vector<std::string> kinds;
  std::string config, out;
  std::uint64_t seed_value = 0;
  unsigned jobs = 1;
  run->add_option("kind", kinds, "experiment kinds")->required();
  run->add_option("--config", config, "TOML config file")->check(CLI::ExistingFile);
  run->add_option("--out", out, "output root (PARAKON_OUT overrides)");
  auto* seed_opt = run->add_option("--seed", seed_value, "seed override");
  run->add_option("--jobs", jobs, "experiments run concurrently")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list built-in experiments");
  std::string config_dir;
  list->add_option("--configs", config_dir, "also list the configs in this directory");

  auto* val = app.add_subcommand("validate", "parse and range-check a config without running");
  std::string file;
  val->add_option("file", file, "config file")->required();

  auto* schema = app.add_subcommand("schema", "print the accepted config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  if (*run) {
    std::optional<std::uint64_t> seed;
    if (*seed_opt) seed = seed_value;
    return run_command(kinds, config, out, seed, jobs);
  }
  if (*list) return list_command(config_dir);
  if (*val) return validate_command(file);
  if (*schema) return schema_command();
  return usage;
}
