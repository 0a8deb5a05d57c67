#include "latentid/nn/serialize.hpp"

#include <fstream>
#include <string>

#include "latentid/error.hpp"
#include "latentid/ndmath/csv.hpp"

namespace latentid::nn {

void to_json(nlohmann::json& j, const MlpSpec& spec) {
  j = nlohmann::json{{"layer_widths", spec.layer_widths},
                     {"activation_slope", spec.activation_slope},
                     {"dropout_rate", spec.dropout_rate},
                     {"final_linear", spec.final_linear}};
}

void from_json(const nlohmann::json& j, MlpSpec& spec) {
  spec.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
  spec.activation_slope = j.value("activation_slope", 0.1);
  spec.dropout_rate = j.value("dropout_rate", 0.0);
  spec.final_linear = j.value("final_linear", true);
}

void save_mlp(const std::filesystem::path& dir, const MlpSpec& spec, const MlpParams& params) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["spec"] = spec;
  manifest["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const std::string w = "layer_" + std::to_string(l) + "_weight.csv";
    const std::string b = "layer_" + std::to_string(l) + "_bias.csv";
    write_matrix_csv(dir / w, params.layers[l].weight);
    write_matrix_csv(dir / b, params.layers[l].bias);
    manifest["layers"].push_back({{"weight", w}, {"bias", b}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

std::pair<MlpSpec, MlpParams> load_mlp(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  const auto manifest = nlohmann::json::parse(in);
  MlpSpec spec = manifest.at("spec").get<MlpSpec>();
  spec.validate();
  MlpParams params;
  for (const auto& l : manifest.at("layers")) {
    params.layers.push_back({read_matrix_csv(dir / l.at("weight").get<std::string>()),
                             read_matrix_csv(dir / l.at("bias").get<std::string>())});
  }
  if (params.layers.size() != spec.num_layers()) throw IoError("mlp manifest: layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != spec.layer_widths[l] || layer.weight.cols() != spec.layer_widths[l + 1] ||
        layer.bias.rows() != 1 || layer.bias.cols() != spec.layer_widths[l + 1])
      throw IoError("mlp manifest: layer " + std::to_string(l) + " has the wrong shape");
  }
  params.touch();
  return {std::move(spec), std::move(params)};
}

}  // namespace latentid::nn
