// outagecast: command-line driver for the outage forecasting pipeline.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "outage/error.hpp"
#include "outage/pipeline.hpp"
#include "outage/synth.hpp"

namespace {

int run_synth(std::size_t counties, std::size_t hours, std::uint64_t seed, const std::filesystem::path& dir) {
  outage::SynthConfig cfg;
  cfg.counties = counties;
  cfg.hours = hours;
  cfg.seed = seed;
  const auto data = outage::generate_synth(cfg);
  outage::write_synth(data, dir);
  std::ofstream out(dir / "pipeline.json", std::ios::binary);
  if (!out) throw outage::UserError("cannot write '" + (dir / "pipeline.json").string() + "'");
  out << outage::synth_pipeline_config(data.storms, seed).dump(2) << '\n';
  std::cout << "wrote synthetic inputs for " << counties << " counties x " << hours << " hours to " << dir.string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"County-level outage forecasting for extreme weather events"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  std::size_t counties = 5, hours = 2000;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "write a reproducible toy dataset and a matching pipeline.json");
  synth->add_option("--counties", counties, "number of counties")->check(CLI::PositiveNumber);
  synth->add_option("--hours", hours, "number of hours")->check(CLI::Range(48, 1000000));
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out-dir", out_dir, "directory for the generated files");

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"ingest", "parse inputs and build the hourly panel"},
      {"impute", "fill missing cells from nearby counties"},
      {"hilp", "identify storm seeds and weather analogs"},
      {"features", "build lagged feature rows and hold out the test event"},
      {"rebalance", "rebalance the training target"},
      {"train", "train the configured models"},
      {"evaluate", "score every model on the held-out event"},
      {"report", "write plot series, importances and a summary"},
      {"all", "run every stage in order"}};
  std::vector<CLI::App*> stage_cmds;
  for (const auto& [name, help] : stages) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", out_dir, "artifact directory");
    cmd->add_option("--seed", seed, "global seed (overrides the config)");
    stage_cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return run_synth(counties, hours, synth_seed, out_dir);
    auto cfg = outage::PipelineConfig::load(config_path);
    if (seed) cfg.set_seed(*seed);
    outage::Pipeline pipeline(std::move(cfg), out_dir);
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (!stage_cmds[i]->parsed()) continue;
      if (stages[i].first == "all") {
        for (auto s : outage::kStages) {
          pipeline.run(s);
          std::cout << s << ": ok\n";
        }
      } else {
        pipeline.run(stages[i].first);
        std::cout << stages[i].first << ": ok\n";
      }
    }
    return 0;
  } catch (const outage::UserError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
