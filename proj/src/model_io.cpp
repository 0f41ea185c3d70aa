#include "outage/model_io.hpp"

#include <fstream>

#include "outage/error.hpp"

namespace outage {

using nlohmann::json;

namespace {

json tree_params_to_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth}, {"min_samples_leaf", p.min_samples_leaf}};
}

TreeParams tree_params_from_json(const json& j) {
  return {j.at("max_depth").get<std::size_t>(), j.at("min_samples_leaf").get<std::size_t>()};
}

json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes())
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.samples, n.impurity_decrease});
  return {{"features", t.feature_count()}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.value = n.at(4).get<double>();
    node.samples = n.at(5).get<std::size_t>();
    node.impurity_decrease = n.at(6).get<double>();
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes), j.at("features").get<std::size_t>());
}

std::string_view loss_name(BoostLoss l) {
  switch (l) {
    case BoostLoss::Linear:
      return "linear";
    case BoostLoss::Square:
      return "square";
    case BoostLoss::Exponential:
      return "exponential";
  }
  return "linear";
}

BoostLoss parse_loss(const std::string& s) {
  if (s == "linear") return BoostLoss::Linear;
  if (s == "square") return BoostLoss::Square;
  if (s == "exponential") return BoostLoss::Exponential;
  throw UserError("unknown boosting loss '" + s + "'");
}

json forest_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
  return {{"config",
           {{"estimators", m.config.estimators},
            {"tree", tree_params_to_json(m.config.tree)},
            {"bootstrap", m.config.bootstrap},
            {"seed", m.config.seed}}},
          {"feature_names", m.feature_names},
          {"tree_seeds", m.tree_seeds},
          {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const json& j) {
  ForestModel m;
  const auto& c = j.at("config");
  m.config.estimators = c.at("estimators").get<std::size_t>();
  m.config.tree = tree_params_from_json(c.at("tree"));
  m.config.bootstrap = c.at("bootstrap").get<bool>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  return m;
}

json boost_to_json(const BoostModel& m) {
  json learners = json::array();
  for (const auto& t : m.learners) learners.push_back(tree_to_json(t));
  return {{"config",
           {{"estimators", m.config.estimators},
            {"learning_rate", m.config.learning_rate},
            {"loss", loss_name(m.config.loss)},
            {"tree", tree_params_to_json(m.config.tree)},
            {"seed", m.config.seed}}},
          {"feature_names", m.feature_names},
          {"betas", m.betas},
          {"weights", m.weights},
          {"warning", m.warning},
          {"learners", std::move(learners)}};
}

BoostModel boost_from_json(const json& j) {
  BoostModel m;
  const auto& c = j.at("config");
  m.config.estimators = c.at("estimators").get<std::size_t>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.loss = parse_loss(c.at("loss").get<std::string>());
  m.config.tree = tree_params_from_json(c.at("tree"));
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.betas = j.at("betas").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.warning = j.at("warning").get<std::string>();
  for (const auto& t : j.at("learners")) m.learners.push_back(tree_from_json(t));
  if (m.learners.size() != m.weights.size() || m.learners.size() != m.betas.size())
    throw UserError("boosted model: learner/weight count mismatch");
  return m;
}

json lstm_to_json(const LstmModel& m) {
  json steps = json::array();
  for (const auto& s : m.layout.step_columns) steps.push_back(s);
  const auto p = m.network.parameters();
  return {{"config",
           {{"hidden", m.config.hidden},
            {"epochs", m.config.epochs},
            {"learning_rate", m.config.learning_rate},
            {"batch_size", m.config.batch_size},
            {"beta1", m.config.beta1},
            {"beta2", m.config.beta2},
            {"epsilon", m.config.epsilon},
            {"all_sigmoid", m.config.all_sigmoid},
            {"seed", m.config.seed}}},
          {"feature_names", m.feature_names},
          {"input_size", m.network.input_size()},
          {"parameters", std::vector<double>(p.begin(), p.end())},
          {"layout", {{"steps", m.layout.steps}, {"step_width", m.layout.step_width}, {"step_columns", steps}}},
          {"input_scaler", scaler_to_json(m.input_scaler)},
          {"target_scaler", scaler_to_json(m.target_scaler)},
          {"training_curve", m.training_curve}};
}

LstmModel lstm_from_json(const json& j) {
  LstmModel m;
  const auto& c = j.at("config");
  m.config.hidden = c.at("hidden").get<std::size_t>();
  m.config.epochs = c.at("epochs").get<std::size_t>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.batch_size = c.at("batch_size").get<std::size_t>();
  m.config.beta1 = c.at("beta1").get<double>();
  m.config.beta2 = c.at("beta2").get<double>();
  m.config.epsilon = c.at("epsilon").get<double>();
  m.config.all_sigmoid = c.at("all_sigmoid").get<bool>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.network = LstmNetwork(j.at("input_size").get<std::size_t>(), m.config.hidden, m.config.all_sigmoid);
  const auto params = j.at("parameters").get<std::vector<double>>();
  auto theta = m.network.parameters();
  if (params.size() != theta.size()) throw UserError("LSTM parameter count does not match its shape");
  std::copy(params.begin(), params.end(), theta.begin());
  const auto& layout = j.at("layout");
  m.layout.steps = layout.at("steps").get<std::size_t>();
  m.layout.step_width = layout.at("step_width").get<std::size_t>();
  m.layout.step_columns = layout.at("step_columns").get<std::vector<std::vector<std::size_t>>>();
  m.input_scaler = scaler_from_json(j.at("input_scaler"));
  m.target_scaler = scaler_from_json(j.at("target_scaler"));
  m.training_curve = j.at("training_curve").get<std::vector<double>>();
  return m;
}

}  // namespace

std::string_view kind_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Forest:
      return "random_forest";
    case ModelKind::AdaBoost:
      return "adaboost";
    case ModelKind::Lstm:
      return "lstm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "random_forest" || name == "rf") return ModelKind::Forest;
  if (name == "adaboost") return ModelKind::AdaBoost;
  if (name == "lstm") return ModelKind::Lstm;
  throw UserError("unknown model kind '" + std::string(name) + "'");
}

ModelKind kind_of(const TrainedModel& model) noexcept { return static_cast<ModelKind>(model.index()); }

std::vector<double> predict(const TrainedModel& model, const FeatureMatrix& m) {
  return std::visit(
      [&](const auto& mdl) -> std::vector<double> {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, ForestModel>) return predict_forest(mdl, m.values);
        else if constexpr (std::is_same_v<T, BoostModel>) return predict_adaboost(mdl, m.values);
        else return predict_lstm(mdl, m);
      },
      model);
}

json scaler_to_json(const MinMaxScaler& s) {
  if (!s.fitted()) return nullptr;
  return {{"min", s.min()}, {"max", s.max()}};
}

MinMaxScaler scaler_from_json(const json& j) {
  if (j.is_null()) return {};
  return MinMaxScaler(j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>());
}

json lag_to_json(const LagConfig& lag) {
  return {{"n", lag.n}, {"include_current_weather", lag.include_current_weather},
          {"utc_offset_hours", lag.utc_offset.count()}};
}

LagConfig lag_from_json(const json& j) {
  LagConfig lag;
  lag.n = j.at("n").get<std::size_t>();
  lag.include_current_weather = j.at("include_current_weather").get<bool>();
  lag.utc_offset = Hours{j.at("utc_offset_hours").get<long long>()};
  return lag;
}

json model_to_json(const TrainedModel& model) {
  json body = std::visit(
      [](const auto& mdl) -> json {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, ForestModel>) return forest_to_json(mdl);
        else if constexpr (std::is_same_v<T, BoostModel>) return boost_to_json(mdl);
        else return lstm_to_json(mdl);
      },
      model);
  return {{"format", kModelFormat}, {"kind", kind_name(kind_of(model))}, {"model", std::move(body)}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat)
      throw UserError("unsupported model format '" + j.at("format").get<std::string>() + "'");
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto& body = j.at("model");
    switch (kind) {
      case ModelKind::Forest:
        return forest_from_json(body);
      case ModelKind::AdaBoost:
        return boost_from_json(body);
      case ModelKind::Lstm:
        return lstm_from_json(body);
    }
  } catch (const json::exception& e) {
    throw UserError(std::string("malformed model file: ") + e.what());
  }
  throw UserError("malformed model file");
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write '" + path.string() + "'");
  out << model_to_json(model).dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UserError("malformed model file '" + path.string() + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace outage
