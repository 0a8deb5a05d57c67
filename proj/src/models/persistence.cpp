#include "latentid/models/persistence.hpp"

#include <fstream>

#include "latentid/error.hpp"
#include "latentid/ndmath/csv.hpp"
#include "latentid/nn/serialize.hpp"

#include <json.hpp>

namespace latentid::models {

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace

void save_model(const std::filesystem::path& dir, const GenerativeModel& model, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  nn::save_mlp(dir / "encoder", model.encoder_spec, model.encoder);
  nn::save_mlp(dir / "decoder", model.decoder_spec, model.decoder);

  nlohmann::json prior{{"kind", "standard_normal"}, {"K", model.n_components}};
  if (const auto* c = std::get_if<ConditionalGaussianPrior>(&model.prior)) {
    prior["kind"] = "conditional_gaussian";
    write_matrix_csv(dir / "prior_means.csv", c->means);
    write_matrix_csv(dir / "prior_log_vars.csv", c->log_vars);
    prior["means"] = "prior_means.csv";
    prior["log_vars"] = "prior_log_vars.csv";
  } else if (const auto* g = std::get_if<GaussianMixturePrior>(&model.prior)) {
    prior["kind"] = "gaussian_mixture";
    write_matrix_csv(dir / "prior_logits.csv", g->logits);
    write_matrix_csv(dir / "prior_means.csv", g->means);
    write_matrix_csv(dir / "prior_log_vars.csv", g->log_vars);
    prior["logits"] = "prior_logits.csv";
    prior["means"] = "prior_means.csv";
    prior["log_vars"] = "prior_log_vars.csv";
  }
  write_json(dir / "prior.json", prior);
  write_json(dir / "manifest.json", {{"kind", to_string(model.kind)},
                                     {"d_x", model.d_x},
                                     {"d_z", model.d_z},
                                     {"K", model.n_components},
                                     {"decoder_log_var", model.decoder_log_var},
                                     {"seed", seed}});
}

GenerativeModel load_model(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  const auto prior = read_json(dir / "prior.json");
  GenerativeModel m;
  m.kind = parse_model_kind(manifest.at("kind").get<std::string>());
  m.d_x = manifest.at("d_x").get<std::size_t>();
  m.d_z = manifest.at("d_z").get<std::size_t>();
  m.n_components = manifest.at("K").get<std::size_t>();
  m.decoder_log_var = manifest.at("decoder_log_var").get<double>();
  std::tie(m.encoder_spec, m.encoder) = nn::load_mlp(dir / "encoder");
  std::tie(m.decoder_spec, m.decoder) = nn::load_mlp(dir / "decoder");
  const std::string kind = prior.at("kind").get<std::string>();
  auto csv = [&](const char* key) { return read_matrix_csv(dir / prior.at(key).get<std::string>()); };
  if (kind == "standard_normal") {
    m.prior = StandardNormalPrior{};
  } else if (kind == "conditional_gaussian") {
    m.prior = ConditionalGaussianPrior{csv("means"), csv("log_vars")};
  } else if (kind == "gaussian_mixture") {
    m.prior = GaussianMixturePrior{csv("logits"), csv("means"), csv("log_vars")};
  } else {
    throw IoError("prior.json: unknown prior kind '" + kind + "'");
  }
  m.validate();
  return m;
}

}  // namespace latentid::models
