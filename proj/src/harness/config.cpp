#include "latentid/harness/config.hpp"

#include <fstream>
#include <set>

#include "latentid/error.hpp"

namespace latentid::harness {

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InvalidArgument("config: at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw InvalidArgument("config: seeds must be distinct");
  if (training.steps < 1) throw InvalidArgument("config: training.steps must be at least 1");
  if (training.batch_size < 1) throw InvalidArgument("config: training.batch_size must be at least 1");
  if (training.eval_interval < 1) throw InvalidArgument("config: training.eval_interval must be at least 1");
  if (!(training.lr > 0.0)) throw InvalidArgument("config: training.lr must be positive");
  if (!(training.train_fraction > 0.0 && training.train_fraction < 1.0))
    throw InvalidArgument("config: training.train_fraction must lie in (0, 1)");
  if (!(training.plateau_decay > 0.0 && training.plateau_decay < 1.0) || training.plateau_patience < 1)
    throw InvalidArgument("config: plateau decay must lie in (0, 1) and patience be at least 1");
  if (model.d_z == 0) throw InvalidArgument("config: d_z must be positive");
  if (!metrics.absolute_corr)
    throw InvalidArgument("config: only absolute correlations are supported (MCC values live in [0, 1])");
  if (!(metrics.ridge >= 0.0)) throw InvalidArgument("config: metrics.ridge must be non-negative");
  if (!(identifiability.alpha >= 0.0)) throw InvalidArgument("config: identifiability.alpha must be non-negative");
  if (!(identifiability.noise_scale >= 0.0))
    throw InvalidArgument("config: identifiability.noise_scale must be non-negative");
  if (u_task.kind != "segments" && u_task.kind != "rademacher")
    throw InvalidArgument("config: u_task.kind must be 'segments' or 'rademacher'");
  if (u_task.kind == "rademacher" && (u_task.bits < 1 || u_task.bits > 20))
    throw InvalidArgument("config: u_task.bits must lie in [1, 20]");
  if (jobs < 1) throw InvalidArgument("config: jobs must be at least 1");
  if (!dataset_path) dataset.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  const auto& m = c.model;
  j = {{"model_kind", models::to_string(m.kind)},
       {"d_z", m.d_z},
       {"encoder", {{"hidden", m.encoder_hidden}}},
       {"decoder", {{"hidden", m.decoder_hidden}}},
       {"activation_slope", m.activation_slope},
       {"dropout_rate", m.dropout_rate},
       {"decoder_log_var", m.decoder_log_var},
       {"seeds", c.seeds},
       {"training",
        {{"steps", c.training.steps},
         {"batch_size", c.training.batch_size},
         {"lr", c.training.lr},
         {"eval_interval", c.training.eval_interval},
         {"plateau",
          {{"decay", c.training.plateau_decay},
           {"patience", c.training.plateau_patience},
           {"min_improvement", c.training.plateau_min_improvement}}},
         {"train_fraction", c.training.train_fraction}}},
       {"metrics",
        {{"d_cca", c.metrics.d_cca},
         {"ridge", c.metrics.ridge},
         {"absolute_corr", c.metrics.absolute_corr},
         {"self_pairs", c.metrics.self_pairs}}},
       {"identifiability",
        {{"check_L", c.identifiability.check_L},
         {"alpha", c.identifiability.alpha},
         {"noise_scale", c.identifiability.noise_scale}}},
       {"u_task", {{"kind", c.u_task.kind}, {"bits", c.u_task.bits}, {"seed", c.u_task.seed}}},
       {"output_dir", c.output_dir.string()},
       {"jobs", c.jobs}};
  if (c.n_components_given) j["K"] = m.n_components;
  if (c.dataset_path) j["dataset_path"] = c.dataset_path->string();
  else j["dataset"] = c.dataset;
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  auto& m = c.model;
  if (j.contains("model_kind")) m.kind = models::parse_model_kind(j.at("model_kind").get<std::string>());
  m.d_z = j.value("d_z", m.d_z);
  if (j.contains("K")) {
    m.n_components = j.at("K").get<std::size_t>();
    c.n_components_given = true;
  }
  if (j.contains("encoder")) m.encoder_hidden = j.at("encoder").value("hidden", m.encoder_hidden);
  if (j.contains("decoder")) m.decoder_hidden = j.at("decoder").value("hidden", m.decoder_hidden);
  m.activation_slope = j.value("activation_slope", m.activation_slope);
  m.dropout_rate = j.value("dropout_rate", m.dropout_rate);
  m.decoder_log_var = j.value("decoder_log_var", m.decoder_log_var);

  if (j.contains("dataset_path")) c.dataset_path = j.at("dataset_path").get<std::string>();
  if (j.contains("dataset")) c.dataset = j.at("dataset").get<datagen::TclConfig>();
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();

  if (j.contains("training")) {
    const auto& t = j.at("training");
    auto& o = c.training;
    o.steps = t.value("steps", o.steps);
    o.batch_size = t.value("batch_size", o.batch_size);
    o.lr = t.value("lr", o.lr);
    o.eval_interval = t.value("eval_interval", o.eval_interval);
    o.train_fraction = t.value("train_fraction", o.train_fraction);
    if (t.contains("plateau")) {
      const auto& p = t.at("plateau");
      o.plateau_decay = p.value("decay", o.plateau_decay);
      o.plateau_patience = p.value("patience", o.plateau_patience);
      o.plateau_min_improvement = p.value("min_improvement", o.plateau_min_improvement);
    }
  }
  if (j.contains("metrics")) {
    const auto& t = j.at("metrics");
    auto& o = c.metrics;
    o.d_cca = t.value("d_cca", o.d_cca);
    o.ridge = t.value("ridge", o.ridge);
    o.absolute_corr = t.value("absolute_corr", o.absolute_corr);
    o.self_pairs = t.value("self_pairs", o.self_pairs);
  }
  if (j.contains("identifiability")) {
    const auto& t = j.at("identifiability");
    auto& o = c.identifiability;
    o.check_L = t.value("check_L", o.check_L);
    o.alpha = t.value("alpha", o.alpha);
    o.noise_scale = t.value("noise_scale", o.noise_scale);
  }
  if (j.contains("u_task")) {
    const auto& t = j.at("u_task");
    c.u_task.kind = t.value("kind", c.u_task.kind);
    c.u_task.bits = t.value("bits", c.u_task.bits);
    c.u_task.seed = t.value("seed", c.u_task.seed);
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  c.jobs = j.value("jobs", c.jobs);
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c = j.get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_json_file(path));
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace latentid::harness
