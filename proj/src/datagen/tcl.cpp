#include "latentid/datagen/tcl.hpp"

#include <cmath>
#include <fstream>

#include "latentid/error.hpp"
#include "latentid/ndmath/csv.hpp"
#include "latentid/ndmath/linalg.hpp"

namespace latentid::datagen {

void TclConfig::validate() const {
  if (d < 1) throw InvalidArgument("tcl: d must be at least 1");
  if (n_segments < 2) throw InvalidArgument("tcl: need at least 2 segments");
  if (samples_per_segment < 1) throw InvalidArgument("tcl: samples_per_segment must be positive");
  if (n_mixing_layers < 1) throw InvalidArgument("tcl: need at least one mixing layer");
  if (!(mean_lo < mean_hi)) throw InvalidArgument("tcl: empty mean range");
  if (!(std_lo > 0.0 && std_lo < std_hi)) throw InvalidArgument("tcl: std range must be positive and non-empty");
  if (!(min_singular_value > 0.0)) throw InvalidArgument("tcl: min_singular_value must be positive");
  if (!(activation_slope > 0.0 && activation_slope < 1.0))
    throw InvalidArgument("tcl: activation_slope must lie in (0, 1)");
}

void to_json(nlohmann::json& j, const TclConfig& c) {
  j = nlohmann::json{{"d", c.d},
                     {"n_segments", c.n_segments},
                     {"samples_per_segment", c.samples_per_segment},
                     {"n_mixing_layers", c.n_mixing_layers},
                     {"mean_range", {c.mean_lo, c.mean_hi}},
                     {"std_range", {c.std_lo, c.std_hi}},
                     {"min_singular_value", c.min_singular_value},
                     {"activation_slope", c.activation_slope},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TclConfig& c) {
  TclConfig d;
  c.d = j.value("d", d.d);
  c.n_segments = j.value("n_segments", d.n_segments);
  c.samples_per_segment = j.value("samples_per_segment", d.samples_per_segment);
  c.n_mixing_layers = j.value("n_mixing_layers", d.n_mixing_layers);
  if (j.contains("mean_range")) {
    c.mean_lo = j.at("mean_range").at(0).get<double>();
    c.mean_hi = j.at("mean_range").at(1).get<double>();
  }
  if (j.contains("std_range")) {
    c.std_lo = j.at("std_range").at(0).get<double>();
    c.std_hi = j.at("std_range").at(1).get<double>();
  }
  c.min_singular_value = j.value("min_singular_value", d.min_singular_value);
  c.activation_slope = j.value("activation_slope", d.activation_slope);
  c.seed = j.value("seed", d.seed);
}

Sources generate_sources(const TclConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t n = cfg.n_segments * cfg.samples_per_segment;
  Sources out{Matrix(n, cfg.d), std::vector<std::size_t>(n),
              SegmentParams{sample_uniform(rng, cfg.n_segments, cfg.d, cfg.mean_lo, cfg.mean_hi),
                            sample_uniform(rng, cfg.n_segments, cfg.d, cfg.std_lo, cfg.std_hi)}};
  std::size_t row = 0;
  for (std::size_t k = 0; k < cfg.n_segments; ++k) {
    for (std::size_t i = 0; i < cfg.samples_per_segment; ++i, ++row) {
      out.u[row] = k;
      for (std::size_t j = 0; j < cfg.d; ++j)
        out.s(row, j) = out.params.means(k, j) + out.params.stds(k, j) * rng.normal();
    }
  }
  return out;
}

MixingNetwork sample_mixing_mlp(const TclConfig& cfg, RngStream& rng) {
  cfg.validate();
  MixingNetwork net;
  net.spec.layer_widths.assign(cfg.n_mixing_layers + 1, cfg.d);
  net.spec.activation_slope = cfg.activation_slope;
  net.spec.dropout_rate = 0.0;
  net.spec.final_linear = true;
  const double bound = std::sqrt(6.0 / static_cast<double>(2 * cfg.d));
  constexpr int kMaxRejections = 100;
  for (std::size_t l = 0; l < cfg.n_mixing_layers; ++l) {
    int failures = 0;
    for (;;) {
      Matrix w = sample_uniform(rng, cfg.d, cfg.d, -bound, bound);
      if (svd(w).s.back() >= cfg.min_singular_value) {
        net.params.layers.push_back({std::move(w), Matrix(1, cfg.d)});
        break;
      }
      if (++failures == kMaxRejections)
        throw InvalidArgument("sample_mixing_mlp: 100 consecutive layers fell below min_singular_value");
    }
  }
  net.params.touch();
  return net;
}

Matrix mix_sources(const MixingNetwork& net, const Matrix& s) {
  return nn::predict(net.params, net.spec, s);
}

SyntheticDataset generate_tcl_dataset(const TclConfig& cfg, RngStream& rng) {
  Sources src = generate_sources(cfg, rng);
  MixingNetwork mixing = sample_mixing_mlp(cfg, rng);
  LabeledDataset data;
  data.x = mix_sources(mixing, src.s);
  data.u = std::move(src.u);
  data.n_labels = cfg.n_segments;
  data.s = std::move(src.s);
  return SyntheticDataset{std::move(data), std::move(src.params), std::move(mixing)};
}

SyntheticDataset generate_tcl_dataset(const TclConfig& cfg) {
  RngStream rng(cfg.seed, 0);
  return generate_tcl_dataset(cfg, rng);
}

void write_dataset_dir(const std::filesystem::path& dir, const LabeledDataset& ds,
                       const nlohmann::json& config) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "X.csv", ds.x);
  if (ds.s) write_matrix_csv(dir / "S.csv", *ds.s);
  write_labels(dir / "U.csv", ds.u);
  nlohmann::json meta = config;
  meta["n_labels"] = ds.n_labels;
  std::ofstream out(dir / "config.json");
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  out << meta.dump(2) << '\n';
}

LabeledDataset read_dataset_dir(const std::filesystem::path& dir) {
  LabeledDataset ds;
  ds.x = read_matrix_csv(dir / "X.csv");
  ds.u = read_labels(dir / "U.csv");
  if (std::filesystem::exists(dir / "S.csv")) ds.s = read_matrix_csv(dir / "S.csv");
  std::size_t n_labels = 0;
  for (std::size_t v : ds.u) n_labels = std::max(n_labels, v + 1);
  if (std::filesystem::exists(dir / "config.json")) {
    std::ifstream in(dir / "config.json");
    const auto j = nlohmann::json::parse(in);
    n_labels = j.value("n_labels", j.value("n_segments", n_labels));
  }
  ds.n_labels = n_labels;
  ds.validate();
  return ds;
}

}  // namespace latentid::datagen
