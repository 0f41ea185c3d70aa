#pragma once

// Stage orchestration: every stage reads the previous stage's artifacts from
// the output directory, checks them against that stage's manifest, and writes
// its own artifacts plus manifest_<stage>.json.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "outage/adaboost.hpp"
#include "outage/features.hpp"
#include "outage/forest.hpp"
#include "outage/hilp.hpp"
#include "outage/impute.hpp"
#include "outage/lstm.hpp"
#include "outage/model_io.hpp"
#include "outage/rebalance.hpp"

namespace outage {

struct PipelineInputs {
  std::string outages = "outages.csv";
  std::string weather = "weather.csv";
  std::string census = "census.csv";
  std::string infrastructure = "infrastructure.csv";
  std::string storms = "storms.csv";
};

struct PipelineConfig {
  std::filesystem::path base_dir;  // relative input paths resolve here
  PipelineInputs inputs;
  std::optional<UtcTime> start;    // panel range; derived from the outage feed when absent
  std::optional<UtcTime> end;      // exclusive
  Hours utc_offset{-5};
  ImputeOptions impute;
  HilpConfig hilp;
  LagConfig lag;
  bool rebalance_enabled = true;
  RebalanceConfig rebalance;
  std::vector<ModelKind> models{ModelKind::Forest, ModelKind::AdaBoost, ModelKind::Lstm};
  ForestConfig forest;
  BoostConfig boost;
  LstmConfig lstm;
  std::optional<HeldOutEvent> held_out;
  std::optional<std::uint64_t> seed;

  /// Canonical form, hashed into every manifest. Omits base_dir.
  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j, std::filesystem::path base_dir);
  static PipelineConfig load(const std::filesystem::path& path);

  /// Applies `seed` to every stochastic block.
  void set_seed(std::uint64_t s);
};

inline constexpr std::array<std::string_view, 8> kStages = {"ingest",    "impute", "hilp",     "features",
                                                            "rebalance", "train",  "evaluate", "report"};

class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path out_dir);

  void run(std::string_view stage);
  void run_all();

  const std::filesystem::path& out_dir() const noexcept { return out_; }

 private:
  void ingest();
  void impute();
  void hilp();
  void features();
  void rebalance();
  void train();
  void evaluate();
  void report();

  std::filesystem::path artifact(std::string_view name) const { return out_ / std::string(name); }
  /// Throws "run <stage> first" when the stage has not run, or when `name` no
  /// longer matches the hash that stage recorded.
  void require(std::string_view stage, std::string_view name) const;
  void finish(std::string_view stage, const std::vector<std::filesystem::path>& inputs,
              const std::vector<std::string>& outputs) const;
  std::uint64_t require_seed(std::string_view stage) const;
  std::vector<CountyStatic> statics() const;
  PanelDataset imputed_panel() const;

  PipelineConfig cfg_;
  std::filesystem::path out_;
  std::string config_hash_;
};

/// Config written next to synthetic inputs: lightweight model blocks and the
/// longest storm of the first county as the held-out event.
nlohmann::json synth_pipeline_config(std::span<const StormEvent> storms, std::uint64_t seed);

}  // namespace outage
