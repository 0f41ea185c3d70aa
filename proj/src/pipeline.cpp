#include "outage/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "outage/error.hpp"
#include "outage/eval.hpp"
#include "outage/graph.hpp"
#include "outage/manifest.hpp"

namespace outage {

using nlohmann::json;

namespace {

constexpr int kStageVersion = 1;

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UserError("cannot write '" + p.string() + "'");
  return out;
}

void write_json(const json& j, const std::filesystem::path& p) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw UserError("cannot open '" + p.string() + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw UserError("malformed JSON in '" + p.string() + "': " + e.what());
  }
}

std::string aggregation_name(WeatherAggregation a) { return a == WeatherAggregation::Daily ? "daily" : "hourly"; }

WeatherAggregation parse_aggregation(const std::string& s) {
  if (s == "hourly") return WeatherAggregation::Hourly;
  if (s == "daily") return WeatherAggregation::Daily;
  throw UserError("unknown weather aggregation '" + s + "'");
}

std::string loss_text(BoostLoss l) {
  switch (l) {
    case BoostLoss::Square:
      return "square";
    case BoostLoss::Exponential:
      return "exponential";
    default:
      return "linear";
  }
}

BoostLoss loss_from_text(const std::string& s) {
  if (s == "linear") return BoostLoss::Linear;
  if (s == "square") return BoostLoss::Square;
  if (s == "exponential") return BoostLoss::Exponential;
  throw UserError("unknown boosting loss '" + s + "'");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  if (!j.is_object()) throw UserError(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw UserError("unknown key '" + k + "' in " + std::string(where));
}

std::string model_file(ModelKind k) { return "model_" + std::string(kind_name(k)) + ".json"; }
std::string report_file(ModelKind k) { return "report_" + std::string(kind_name(k)) + ".json"; }

}  // namespace

json PipelineConfig::to_json() const {
  json models_json = json::array();
  for (auto k : models) models_json.push_back(kind_name(k));
  json j = {
      {"inputs",
       {{"outages", inputs.outages},
        {"weather", inputs.weather},
        {"census", inputs.census},
        {"infrastructure", inputs.infrastructure},
        {"storms", inputs.storms}}},
      {"utc_offset_hours", utc_offset.count()},
      {"impute", {{"k", impute.k}, {"impute_targets", impute.impute_targets}}},
      {"hilp",
       {{"alpha", hilp.alpha},
        {"analogs_per_seed", hilp.analogs_per_seed},
        {"season_window", hilp.season_window},
        {"aggregation", aggregation_name(hilp.aggregation)}}},
      {"features", {{"lag_n", lag.n}, {"include_current_weather", lag.include_current_weather}}},
      {"rebalance",
       {{"enabled", rebalance_enabled},
        {"tau", rebalance.tau},
        {"k_neighbors", rebalance.k_neighbors},
        {"oversample_rate", rebalance.oversample_rate},
        {"undersample_rate", rebalance.undersample_rate},
        {"noise_fraction", rebalance.noise_fraction}}},
      {"models", models_json},
      {"random_forest",
       {{"estimators", forest.estimators},
        {"max_depth", forest.tree.max_depth},
        {"min_samples_leaf", forest.tree.min_samples_leaf},
        {"bootstrap", forest.bootstrap},
        {"threads", forest.threads}}},
      {"adaboost",
       {{"estimators", boost.estimators},
        {"learning_rate", boost.learning_rate},
        {"loss", loss_text(boost.loss)},
        {"max_depth", boost.tree.max_depth},
        {"min_samples_leaf", boost.tree.min_samples_leaf}}},
      {"lstm",
       {{"hidden", lstm.hidden},
        {"epochs", lstm.epochs},
        {"learning_rate", lstm.learning_rate},
        {"batch_size", lstm.batch_size},
        {"all_sigmoid", lstm.all_sigmoid}}},
  };
  if (start) j["start_utc"] = format_utc(*start);
  if (end) j["end_utc"] = format_utc(*end);
  if (held_out)
    j["held_out"] = {{"id", held_out->id},
                     {"county_id", held_out->county_id},
                     {"start_utc", format_utc(held_out->start)},
                     {"end_utc", format_utc(held_out->end)}};
  if (seed) j["seed"] = *seed;
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j, std::filesystem::path base_dir) {
  PipelineConfig c;
  c.base_dir = std::move(base_dir);
  try {
    reject_unknown(j,
                   {"inputs", "start_utc", "end_utc", "utc_offset_hours", "impute", "hilp", "features", "rebalance",
                    "models", "random_forest", "adaboost", "lstm", "held_out", "seed"},
                   "config");
    if (j.contains("inputs")) {
      const auto& in = j["inputs"];
      reject_unknown(in, {"outages", "weather", "census", "infrastructure", "storms"}, "inputs");
      c.inputs.outages = in.value("outages", c.inputs.outages);
      c.inputs.weather = in.value("weather", c.inputs.weather);
      c.inputs.census = in.value("census", c.inputs.census);
      c.inputs.infrastructure = in.value("infrastructure", c.inputs.infrastructure);
      c.inputs.storms = in.value("storms", c.inputs.storms);
    }
    if (j.contains("start_utc")) c.start = parse_utc(j["start_utc"].get<std::string>());
    if (j.contains("end_utc")) c.end = parse_utc(j["end_utc"].get<std::string>());
    c.utc_offset = Hours{j.value("utc_offset_hours", -5LL)};
    if (j.contains("impute")) {
      const auto& s = j["impute"];
      reject_unknown(s, {"k", "impute_targets"}, "impute");
      c.impute.k = s.value("k", c.impute.k);
      c.impute.impute_targets = s.value("impute_targets", c.impute.impute_targets);
    }
    if (j.contains("hilp")) {
      const auto& s = j["hilp"];
      reject_unknown(s, {"alpha", "analogs_per_seed", "season_window", "aggregation"}, "hilp");
      c.hilp.alpha = s.value("alpha", c.hilp.alpha);
      c.hilp.analogs_per_seed = s.value("analogs_per_seed", c.hilp.analogs_per_seed);
      c.hilp.season_window = s.value("season_window", c.hilp.season_window);
      c.hilp.aggregation = parse_aggregation(s.value("aggregation", std::string("hourly")));
    }
    if (j.contains("features")) {
      const auto& s = j["features"];
      reject_unknown(s, {"lag_n", "include_current_weather"}, "features");
      c.lag.n = s.value("lag_n", c.lag.n);
      c.lag.include_current_weather = s.value("include_current_weather", c.lag.include_current_weather);
    }
    if (j.contains("rebalance")) {
      const auto& s = j["rebalance"];
      reject_unknown(s, {"enabled", "tau", "k_neighbors", "oversample_rate", "undersample_rate", "noise_fraction"},
                     "rebalance");
      c.rebalance_enabled = s.value("enabled", c.rebalance_enabled);
      c.rebalance.tau = s.value("tau", c.rebalance.tau);
      c.rebalance.k_neighbors = s.value("k_neighbors", c.rebalance.k_neighbors);
      c.rebalance.oversample_rate = s.value("oversample_rate", c.rebalance.oversample_rate);
      c.rebalance.undersample_rate = s.value("undersample_rate", c.rebalance.undersample_rate);
      c.rebalance.noise_fraction = s.value("noise_fraction", c.rebalance.noise_fraction);
      c.rebalance.validate();
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j["models"]) {
        const auto k = parse_model_kind(m.get<std::string>());
        if (std::find(c.models.begin(), c.models.end(), k) == c.models.end()) c.models.push_back(k);
      }
      if (c.models.empty()) throw UserError("config lists no models");
    }
    if (j.contains("random_forest")) {
      const auto& s = j["random_forest"];
      reject_unknown(s, {"estimators", "max_depth", "min_samples_leaf", "bootstrap", "threads"}, "random_forest");
      c.forest.estimators = s.value("estimators", c.forest.estimators);
      c.forest.tree.max_depth = s.value("max_depth", c.forest.tree.max_depth);
      c.forest.tree.min_samples_leaf = s.value("min_samples_leaf", c.forest.tree.min_samples_leaf);
      c.forest.bootstrap = s.value("bootstrap", c.forest.bootstrap);
      c.forest.threads = s.value("threads", c.forest.threads);
    }
    if (j.contains("adaboost")) {
      const auto& s = j["adaboost"];
      reject_unknown(s, {"estimators", "learning_rate", "loss", "max_depth", "min_samples_leaf"}, "adaboost");
      c.boost.estimators = s.value("estimators", c.boost.estimators);
      c.boost.learning_rate = s.value("learning_rate", c.boost.learning_rate);
      c.boost.loss = loss_from_text(s.value("loss", std::string("linear")));
      c.boost.tree.max_depth = s.value("max_depth", c.boost.tree.max_depth);
      c.boost.tree.min_samples_leaf = s.value("min_samples_leaf", c.boost.tree.min_samples_leaf);
    }
    if (j.contains("lstm")) {
      const auto& s = j["lstm"];
      reject_unknown(s, {"hidden", "epochs", "learning_rate", "batch_size", "all_sigmoid"}, "lstm");
      c.lstm.hidden = s.value("hidden", c.lstm.hidden);
      c.lstm.epochs = s.value("epochs", c.lstm.epochs);
      c.lstm.learning_rate = s.value("learning_rate", c.lstm.learning_rate);
      c.lstm.batch_size = s.value("batch_size", c.lstm.batch_size);
      c.lstm.all_sigmoid = s.value("all_sigmoid", c.lstm.all_sigmoid);
    }
    if (j.contains("held_out")) {
      const auto& s = j["held_out"];
      reject_unknown(s, {"id", "county_id", "start_utc", "end_utc"}, "held_out");
      HeldOutEvent e;
      e.id = s.at("id").get<std::string>();
      e.county_id = s.at("county_id").get<std::string>();
      e.start = parse_utc(s.at("start_utc").get<std::string>());
      e.end = parse_utc(s.at("end_utc").get<std::string>());
      if (e.end < e.start) throw UserError("held_out event ends before it starts");
      c.held_out = e;
    }
    if (j.contains("seed")) c.set_seed(j["seed"].get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw UserError(std::string("invalid config: ") + e.what());
  }
  c.hilp.utc_offset = c.utc_offset;
  c.lag.utc_offset = c.utc_offset;
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_json(read_json(path), path.parent_path());
}

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  rebalance.seed = s;
  forest.seed = s;
  boost.seed = s;
  lstm.seed = s;
}

Pipeline::Pipeline(PipelineConfig config, std::filesystem::path out_dir)
    : cfg_(std::move(config)), out_(std::move(out_dir)), config_hash_(sha256_hex(cfg_.to_json().dump())) {
  std::filesystem::create_directories(out_);
}

void Pipeline::run(std::string_view stage) {
  if (stage == "ingest") ingest();
  else if (stage == "impute") impute();
  else if (stage == "hilp") hilp();
  else if (stage == "features") features();
  else if (stage == "rebalance") rebalance();
  else if (stage == "train") train();
  else if (stage == "evaluate") evaluate();
  else if (stage == "report") report();
  else throw UserError("unknown stage '" + std::string(stage) + "'");
}

void Pipeline::run_all() {
  for (auto s : kStages) run(s);
}

void Pipeline::require(std::string_view stage, std::string_view name) const {
  const auto mpath = artifact("manifest_" + std::string(stage) + ".json");
  const std::string hint = "run " + std::string(stage) + " first";
  if (!std::filesystem::exists(mpath) || !std::filesystem::exists(artifact(name)))
    throw UserError(std::string(name) + " not found; " + hint);
  const auto m = read_manifest(mpath);
  const auto it = m.outputs.find(std::string(name));
  if (it == m.outputs.end()) throw UserError(std::string(name) + " was not produced by " + std::string(stage) + "; " + hint);
  if (it->second != sha256_file(artifact(name)))
    throw UserError(std::string(name) + " does not match the hash recorded by " + std::string(stage) +
                    " (modified since); " + hint);
}

void Pipeline::finish(std::string_view stage, const std::vector<std::filesystem::path>& inputs,
                      const std::vector<std::string>& outputs) const {
  StageManifest m;
  m.stage = std::string(stage);
  m.version = kStageVersion;
  m.seed = cfg_.seed.value_or(0);
  m.config_sha256 = config_hash_;
  for (const auto& p : inputs) m.inputs[p.filename().string()] = sha256_file(p);
  for (const auto& name : outputs) m.outputs[name] = sha256_file(artifact(name));
  write_manifest(m, artifact("manifest_" + std::string(stage) + ".json"));
}

std::uint64_t Pipeline::require_seed(std::string_view stage) const {
  if (!cfg_.seed) throw UserError("stage " + std::string(stage) + " needs a seed (config 'seed' or --seed)");
  return *cfg_.seed;
}

std::vector<CountyStatic> Pipeline::statics() const {
  require("ingest", "statics.csv");
  return read_statics_csv(artifact("statics.csv"));
}

PanelDataset Pipeline::imputed_panel() const {
  require("impute", "panel_imputed.csv");
  return read_panel_csv(artifact("panel_imputed.csv"), statics());
}

void Pipeline::ingest() {
  auto resolve = [&](const std::string& p) { return cfg_.base_dir / p; };
  const std::vector<std::filesystem::path> in = {resolve(cfg_.inputs.outages), resolve(cfg_.inputs.weather),
                                                 resolve(cfg_.inputs.census), resolve(cfg_.inputs.infrastructure),
                                                 resolve(cfg_.inputs.storms)};
  const auto outages = parse_outage_csv(in[0]);
  const auto weather = parse_weather_csv(in[1]);
  const auto census = parse_census_csv(in[2]);
  const auto infra = parse_infrastructure_csv(in[3]);
  const auto storms = parse_storm_events_csv(in[4]);
  if (outages.empty()) throw UserError("outage feed is empty");

  auto st = assemble_statics(census, infra);
  TimeRange range;
  if (cfg_.start) {
    range.start = *cfg_.start;
  } else {
    range.start = floor_hour(std::min_element(outages.begin(), outages.end(), [](const auto& a, const auto& b) {
                                return a.timestamp < b.timestamp;
                              })->timestamp);
  }
  if (cfg_.end) {
    range.end = *cfg_.end;
  } else {
    range.end = floor_hour(std::max_element(outages.begin(), outages.end(), [](const auto& a, const auto& b) {
                              return a.timestamp < b.timestamp;
                            })->timestamp) +
                Hours{1};
  }
  const auto hourly = resample_outages_hourly(outages);
  const auto panel = build_panel(hourly, weather, st, range);
  {
    auto out = open_out(artifact("panel.csv"));
    write_panel_csv(out, panel);
  }
  {
    auto out = open_out(artifact("statics.csv"));
    write_statics_csv(out, st);
  }
  {
    auto out = open_out(artifact("storms.csv"));
    write_storm_events_csv(out, storms);
  }
  finish("ingest", in, {"panel.csv", "statics.csv", "storms.csv"});
}

void Pipeline::impute() {
  require("ingest", "panel.csv");
  const auto st = statics();
  const auto panel = read_panel_csv(artifact("panel.csv"), st);
  ImputeSummary summary;
  const auto filled = impute_missing(panel, nearest_counties(st), cfg_.impute, &summary);
  {
    auto out = open_out(artifact("panel_imputed.csv"));
    write_panel_csv(out, filled);
  }
  write_json({{"nearest", summary.nearest},
              {"widened", summary.widened},
              {"interpolated", summary.interpolated},
              {"county_mean", summary.county_mean},
              {"global_mean", summary.global_mean},
              {"remaining_missing_outage", filled.missing_outage_cells()},
              {"remaining_missing_weather", filled.missing_weather_cells()}},
             artifact("impute_summary.json"));
  finish("impute", {artifact("panel.csv"), artifact("statics.csv")}, {"panel_imputed.csv", "impute_summary.json"});
}

void Pipeline::hilp() {
  require("ingest", "storms.csv");
  const auto panel = imputed_panel();
  const auto storms = parse_storm_events_csv(artifact("storms.csv"));
  const auto set = build_extreme_set(panel, storms, cfg_.hilp);
  {
    auto out = open_out(artifact("extreme_set.csv"));
    write_extreme_set_csv(out, set, panel);
  }
  finish("hilp", {artifact("panel_imputed.csv"), artifact("storms.csv")}, {"extreme_set.csv"});
}

void Pipeline::features() {
  if (!cfg_.held_out) throw UserError("config lacks a held_out event");
  const auto& event = *cfg_.held_out;
  require("hilp", "extreme_set.csv");
  const auto panel = imputed_panel();
  if (!panel.find_county(event.county_id)) throw UserError("held_out county " + event.county_id + " is not in the panel");
  const auto set = read_extreme_set_csv(artifact("extreme_set.csv"), panel);

  const auto all = build_feature_matrix(panel, set, cfg_.lag);
  const auto train = filter_rows(all, [&](const RowKey& k) { return !touches_event(k, event, cfg_.lag.n); });
  if (train.rows() == 0) throw UserError("no training rows remain after removing the held-out event");
  const auto cells = event_cells(panel, event);
  const auto test = build_feature_matrix(panel, cells, cfg_.lag);

  {
    auto out = open_out(artifact("features_train.csv"));
    write_feature_csv(out, train);
  }
  {
    auto out = open_out(artifact("features_test.csv"));
    write_feature_csv(out, test);
  }
  MinMaxScaler scaler;
  scaler.fit(train.values);
  write_json({{"columns", train.columns},
              {"lag", lag_to_json(cfg_.lag)},
              {"scaler", scaler_to_json(scaler)},
              {"train_rows", train.rows()},
              {"test_rows", test.rows()},
              {"dropped_without_history", all.dropped},
              {"removed_for_held_out", all.rows() - train.rows()},
              {"held_out", {{"id", event.id}, {"county_id", event.county_id},
                            {"start_utc", format_utc(event.start)}, {"end_utc", format_utc(event.end)}}}},
             artifact("features.json"));

  const auto graph = build_graph(panel);
  {
    auto out = open_out(artifact("graph_nodes.csv"));
    write_graph_nodes_csv(out, graph, panel);
  }
  {
    auto out = open_out(artifact("graph_edges.csv"));
    write_graph_edges_csv(out, graph);
  }
  finish("features", {artifact("panel_imputed.csv"), artifact("extreme_set.csv")},
         {"features_train.csv", "features_test.csv", "features.json", "graph_nodes.csv", "graph_edges.csv"});
}

namespace {

LagConfig features_lag(const std::filesystem::path& manifest) { return lag_from_json(read_json(manifest).at("lag")); }

}  // namespace

void Pipeline::rebalance() {
  require("features", "features_train.csv");
  require("features", "features.json");
  const auto lag = features_lag(artifact("features.json"));
  const auto train = read_feature_csv(artifact("features_train.csv"), lag);
  FeatureMatrix balanced = train;
  if (cfg_.rebalance_enabled) {
    auto rc = cfg_.rebalance;
    rc.seed = require_seed("rebalance");
    balanced = rebalance_matrix(train, rc);
  }
  {
    auto out = open_out(artifact("features_balanced.csv"));
    write_feature_csv(out, balanced);
  }
  finish("rebalance", {artifact("features_train.csv")}, {"features_balanced.csv"});
}

void Pipeline::train() {
  require("rebalance", "features_balanced.csv");
  require("features", "features.json");
  const auto lag = features_lag(artifact("features.json"));
  const auto data = read_feature_csv(artifact("features_balanced.csv"), lag);
  require_seed("train");
  std::vector<std::string> outputs;
  for (auto kind : cfg_.models) {
    TrainedModel model;
    switch (kind) {
      case ModelKind::Forest:
        model = train_forest(data, cfg_.forest);
        break;
      case ModelKind::AdaBoost:
        model = train_adaboost(data, cfg_.boost);
        break;
      case ModelKind::Lstm:
        model = train_lstm(data, cfg_.lstm);
        break;
    }
    save_model(model, artifact(model_file(kind)));
    outputs.push_back(model_file(kind));
  }
  finish("train", {artifact("features_balanced.csv")}, outputs);
}

void Pipeline::evaluate() {
  if (!cfg_.held_out) throw UserError("config lacks a held_out event");
  for (auto kind : cfg_.models) require("train", model_file(kind));
  require("features", "features_test.csv");
  require("features", "features.json");
  const auto lag = features_lag(artifact("features.json"));
  const auto test = read_feature_csv(artifact("features_test.csv"), lag);
  std::vector<std::filesystem::path> inputs = {artifact("features_test.csv")};
  std::vector<std::string> outputs;
  for (auto kind : cfg_.models) {
    const auto model = load_model(artifact(model_file(kind)));
    save_report(evaluate_event(model, test, *cfg_.held_out), artifact(report_file(kind)));
    inputs.push_back(artifact(model_file(kind)));
    outputs.push_back(report_file(kind));
  }
  finish("evaluate", inputs, outputs);
}

void Pipeline::report() {
  std::vector<std::filesystem::path> inputs;
  std::vector<std::string> outputs;
  json summary = json::object();
  for (auto kind : cfg_.models) {
    require("evaluate", report_file(kind));
    const auto rep = load_report(artifact(report_file(kind)));
    const std::string name(kind_name(kind));
    emit_plot_data(rep, artifact("plot_" + name + ".csv"));
    outputs.push_back("plot_" + name + ".csv");
    outputs.push_back("plot_" + name + ".csv.metrics.json");
    inputs.push_back(artifact(report_file(kind)));
    summary[name] = {{"mape_pct", rep.mape_pct}, {"r2_pct", rep.r2_pct}, {"excluded_hours", rep.excluded},
                     {"hours", rep.timestamps.size()}};
    if (kind == ModelKind::Forest) {
      require("train", model_file(kind));
      const auto model = load_model(artifact(model_file(kind)));
      emit_plot_data(forest_importance(std::get<ForestModel>(model)), artifact("importance_" + name + ".csv"));
      outputs.push_back("importance_" + name + ".csv");
      outputs.push_back("importance_" + name + ".csv.metrics.json");
      inputs.push_back(artifact(model_file(kind)));
    }
  }
  write_json(summary, artifact("summary.json"));
  outputs.push_back("summary.json");
  finish("report", inputs, outputs);
}

json synth_pipeline_config(std::span<const StormEvent> storms, std::uint64_t seed) {
  if (storms.empty()) throw UserError("synthetic fixture has no storms");
  const std::string first = std::min_element(storms.begin(), storms.end(), [](const auto& a, const auto& b) {
                              return a.county_id < b.county_id;
                            })->county_id;
  const StormEvent* best = nullptr;
  for (const auto& s : storms)
    if (s.county_id == first && (!best || s.end - s.start > best->end - best->start)) best = &s;
  return {{"seed", seed},
          {"inputs",
           {{"outages", "outages.csv"},
            {"weather", "weather.csv"},
            {"census", "census.csv"},
            {"infrastructure", "infrastructure.csv"},
            {"storms", "storms.csv"}}},
          {"utc_offset_hours", -5},
          {"impute", {{"k", 5}}},
          {"hilp", {{"alpha", 0.7}, {"analogs_per_seed", 10}, {"season_window", 1}}},
          {"features", {{"lag_n", 6}, {"include_current_weather", true}}},
          {"rebalance", {{"enabled", true}, {"tau", 380.0}, {"k_neighbors", 5}, {"oversample_rate", 1},
                         {"undersample_rate", 0.5}, {"noise_fraction", 0.02}}},
          {"models", {"random_forest", "adaboost", "lstm"}},
          {"random_forest", {{"estimators", 50}}},
          {"adaboost", {{"estimators", 120}, {"learning_rate", 0.001}}},
          {"lstm", {{"hidden", 16}, {"epochs", 15}, {"learning_rate", 0.005}}},
          {"held_out",
           {{"id", "synth-" + first + "-" + format_utc(best->start)},
            {"county_id", first},
            {"start_utc", format_utc(best->start)},
            {"end_utc", format_utc(best->end)}}}};
}

}  // namespace outage
