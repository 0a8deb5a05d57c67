#include "latentid/models/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "latentid/error.hpp"

namespace latentid::models {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::vae: return "vae";
    case ModelKind::ivae: return "ivae";
    case ModelKind::vade: return "vade";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "vae") return ModelKind::vae;
  if (lower == "ivae") return ModelKind::ivae;
  if (lower == "vade") return ModelKind::vade;
  throw InvalidArgument("unknown model kind '" + name + "'");
}

std::vector<double> GaussianMixturePrior::log_weights() const {
  const auto l = logits.values();
  const double m = *std::max_element(l.begin(), l.end());
  double acc = 0.0;
  for (double v : l) acc += std::exp(v - m);
  const double lse = m + std::log(acc);
  std::vector<double> out(l.size());
  for (std::size_t k = 0; k < l.size(); ++k) out[k] = l[k] - lse;
  return out;
}

std::vector<Matrix*> GenerativeModel::parameters() {
  std::vector<Matrix*> out;
  for (auto& l : encoder.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (auto& l : decoder.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  if (auto* p = std::get_if<ConditionalGaussianPrior>(&prior)) {
    out.push_back(&p->means);
    out.push_back(&p->log_vars);
  } else if (auto* g = std::get_if<GaussianMixturePrior>(&prior)) {
    out.push_back(&g->logits);
    out.push_back(&g->means);
    out.push_back(&g->log_vars);
  }
  return out;
}

void GenerativeModel::touch() {
  encoder.touch();
  decoder.touch();
}

void GenerativeModel::validate() const {
  encoder_spec.validate();
  decoder_spec.validate();
  const std::size_t enc_in = kind == ModelKind::ivae ? d_x + n_components : d_x;
  if (encoder_spec.input_width() != enc_in)
    throw InvalidArgument("model: encoder input width does not match d_x (+K for iVAE)");
  if (encoder_spec.output_width() != 2 * d_z)
    throw InvalidArgument("model: encoder must emit 2·d_z values");
  if (decoder_spec.input_width() != d_z || decoder_spec.output_width() != d_x)
    throw InvalidArgument("model: decoder must map d_z to d_x");
  auto check_table = [&](const Matrix& means, const Matrix& log_vars) {
    if (means.rows() != n_components || means.cols() != d_z || log_vars.rows() != n_components ||
        log_vars.cols() != d_z)
      throw InvalidArgument("model: prior table must be K × d_z");
    if (!log_vars.all_finite() || !means.all_finite())
      throw InvalidArgument("model: prior parameters must be finite");
  };
  switch (kind) {
    case ModelKind::vae:
      if (!std::holds_alternative<StandardNormalPrior>(prior))
        throw InvalidArgument("model: VAE requires the standard normal prior");
      break;
    case ModelKind::ivae: {
      const auto* p = std::get_if<ConditionalGaussianPrior>(&prior);
      if (!p) throw InvalidArgument("model: iVAE requires a conditional Gaussian prior");
      if (n_components < 1) throw InvalidArgument("model: iVAE needs K >= 1");
      check_table(p->means, p->log_vars);
      break;
    }
    case ModelKind::vade: {
      const auto* g = std::get_if<GaussianMixturePrior>(&prior);
      if (!g) throw InvalidArgument("model: VaDE requires a Gaussian mixture prior");
      if (n_components < 1) throw InvalidArgument("model: VaDE needs K >= 1");
      if (g->logits.rows() != 1 || g->logits.cols() != n_components)
        throw InvalidArgument("model: mixture logits must be 1 × K");
      check_table(g->means, g->log_vars);
      break;
    }
  }
}

namespace {

nn::MlpSpec make_spec(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                      double slope, double dropout) {
  nn::MlpSpec spec;
  spec.layer_widths.push_back(in);
  spec.layer_widths.insert(spec.layer_widths.end(), hidden.begin(), hidden.end());
  spec.layer_widths.push_back(out);
  spec.activation_slope = slope;
  spec.dropout_rate = dropout;
  spec.final_linear = true;
  return spec;
}

Matrix xavier_table(RngStream& rng, std::size_t k, std::size_t d) {
  const double bound = std::sqrt(6.0 / static_cast<double>(k + d));
  return sample_uniform(rng, k, d, -bound, bound);
}

}  // namespace

GenerativeModel make_model(const ModelConfig& cfg, RngStream& rng) {
  if (cfg.d_x == 0 || cfg.d_z == 0) throw InvalidArgument("make_model: dimensions must be positive");
  GenerativeModel m;
  m.kind = cfg.kind;
  m.d_x = cfg.d_x;
  m.d_z = cfg.d_z;
  m.n_components = cfg.kind == ModelKind::vae ? 0 : cfg.n_components;
  if (cfg.kind != ModelKind::vae && m.n_components == 0)
    throw InvalidArgument("make_model: iVAE/VaDE need at least one component");
  m.decoder_log_var = cfg.decoder_log_var;
  const std::size_t enc_in = cfg.kind == ModelKind::ivae ? cfg.d_x + m.n_components : cfg.d_x;
  m.encoder_spec = make_spec(enc_in, cfg.encoder_hidden, 2 * cfg.d_z, cfg.activation_slope, cfg.dropout_rate);
  m.decoder_spec = make_spec(cfg.d_z, cfg.decoder_hidden, cfg.d_x, cfg.activation_slope, cfg.dropout_rate);
  m.encoder = nn::init_xavier_uniform(m.encoder_spec, rng);
  m.decoder = nn::init_xavier_uniform(m.decoder_spec, rng);
  switch (cfg.kind) {
    case ModelKind::vae:
      m.prior = StandardNormalPrior{};
      break;
    case ModelKind::ivae: {
      ConditionalGaussianPrior p;
      p.means = xavier_table(rng, m.n_components, cfg.d_z);
      p.log_vars = xavier_table(rng, m.n_components, cfg.d_z);
      m.prior = std::move(p);
      break;
    }
    case ModelKind::vade: {
      GaussianMixturePrior g;
      g.logits = Matrix(1, m.n_components);
      g.means = xavier_table(rng, m.n_components, cfg.d_z);
      g.log_vars = xavier_table(rng, m.n_components, cfg.d_z);
      m.prior = std::move(g);
      break;
    }
  }
  m.validate();
  return m;
}

Matrix one_hot(std::span<const std::size_t> labels, std::size_t k) {
  Matrix out(labels.size(), k);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= k) throw InvalidArgument("label " + std::to_string(labels[r]) + " out of range");
    out(r, labels[r]) = 1.0;
  }
  return out;
}

namespace detail {

Matrix encoder_input(const GenerativeModel& model, const Matrix& x, LabelSpan u) {
  if (x.cols() != model.d_x) throw ShapeError("encode: x has the wrong number of columns");
  if (model.kind == ModelKind::ivae) {
    if (!u) throw InvalidArgument("encode: iVAE requires labels u");
    if (u->size() != x.rows()) throw ShapeError("encode: label count differs from batch size");
    return hconcat(x, one_hot(*u, model.n_components));
  }
  if (u) throw InvalidArgument("encode: labels are only accepted by iVAE models");
  return x;
}

EncoderOutput split_heads(const Matrix& out, std::size_t d_z) {
  return EncoderOutput{slice_cols(out, 0, d_z), slice_cols(out, d_z, 2 * d_z)};
}

}  // namespace detail

EncoderOutput encode(const GenerativeModel& model, const Matrix& x, LabelSpan u, bool train_mode,
                     RngStream& rng) {
  const Matrix in = detail::encoder_input(model, x, u);
  return detail::split_heads(nn::forward(model.encoder, model.encoder_spec, in, train_mode, rng).output,
                             model.d_z);
}

Matrix reparameterize(const EncoderOutput& enc, RngStream& rng) {
  if (enc.mu.rows() != enc.log_var.rows() || enc.mu.cols() != enc.log_var.cols())
    throw ShapeError("reparameterize: mu and log_var shapes differ");
  Matrix z = enc.mu;
  auto zv = z.values();
  auto lv = enc.log_var.values();
  for (std::size_t i = 0; i < zv.size(); ++i) zv[i] += std::exp(0.5 * lv[i]) * rng.normal();
  return z;
}

Matrix extract_representations(const GenerativeModel& model, const Matrix& x, LabelSpan u) {
  RngStream unused(0);
  return encode(model, x, u, false, unused).mu;
}

}  // namespace latentid::models
