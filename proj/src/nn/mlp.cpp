#include "latentid/nn/mlp.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "latentid/error.hpp"

namespace latentid::nn {

namespace {

std::atomic<std::uint64_t> g_version{0};

double leaky(double v, double slope) { return v >= 0.0 ? v : slope * v; }

bool is_activated(const MlpSpec& spec, std::size_t layer) {
  return !(spec.final_linear && layer + 1 == spec.num_layers());
}

}  // namespace

std::optional<std::size_t> MlpSpec::dropout_layer() const {
  if (dropout_rate <= 0.0) return std::nullopt;
  const std::size_t hidden = num_layers() - 1;
  if (hidden == 0) return std::nullopt;
  return std::min<std::size_t>(hidden, 2) - 1;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw InvalidArgument("MlpSpec: need at least two widths");
  for (std::size_t w : layer_widths)
    if (w == 0) throw InvalidArgument("MlpSpec: widths must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw InvalidArgument("MlpSpec: dropout_rate must lie in [0, 1)");
  if (!(activation_slope > 0.0 && activation_slope < 1.0))
    throw InvalidArgument("MlpSpec: activation_slope must lie in (0, 1)");
}

void MlpParams::touch() noexcept { version = ++g_version; }

MlpGradients zeros_like(const MlpParams& params) {
  MlpGradients g;
  g.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    g.push_back({Matrix(l.weight.rows(), l.weight.cols()), Matrix(1, l.bias.cols())});
  }
  return g;
}

MlpParams init_xavier_uniform(const MlpSpec& spec, RngStream& rng) {
  spec.validate();
  MlpParams p;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t fan_in = spec.layer_widths[l];
    const std::size_t fan_out = spec.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    p.layers.push_back({sample_uniform(rng, fan_in, fan_out, -bound, bound), Matrix(1, fan_out)});
  }
  p.touch();
  return p;
}

ForwardResult forward(const MlpParams& params, const MlpSpec& spec, const Matrix& x,
                      bool train_mode, RngStream& rng) {
  if (params.layers.size() != spec.num_layers())
    throw ShapeError("forward: parameter count does not match spec");
  if (x.cols() != spec.input_width())
    throw ShapeError("forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                     std::to_string(spec.input_width()));

  ForwardResult res;
  Tape& tape = res.tape;
  tape.params_version = params.version;
  tape.widths = spec.layer_widths;
  if (train_mode) tape.dropout_layer = spec.dropout_layer();

  Matrix h = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const Layer& layer = params.layers[l];
    Matrix pre = matmul(h, layer.weight);
    add_row_broadcast(pre, layer.bias);
    tape.layer_inputs.push_back(std::move(h));
    h = pre;
    if (is_activated(spec, l)) {
      for (double& v : h.values()) v = leaky(v, spec.activation_slope);
    }
    tape.pre_activations.push_back(std::move(pre));
    if (tape.dropout_layer && *tape.dropout_layer == l) {
      const double keep = 1.0 - spec.dropout_rate;
      tape.dropout_scale = Matrix(h.rows(), h.cols());
      auto scale = tape.dropout_scale.values();
      auto hv = h.values();
      for (std::size_t i = 0; i < hv.size(); ++i) {
        scale[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
        hv[i] *= scale[i];
      }
    }
  }
  res.output = std::move(h);
  return res;
}

Matrix predict(const MlpParams& params, const MlpSpec& spec, const Matrix& x) {
  RngStream unused(0);
  return forward(params, spec, x, false, unused).output;
}

BackwardResult backward(const MlpParams& params, const MlpSpec& spec, const Tape& tape,
                        const Matrix& output_grad) {
  if (tape.params_version != params.version || tape.widths != spec.layer_widths ||
      tape.layer_inputs.size() != params.layers.size()) {
    throw InvalidArgument("backward: tape was recorded against different parameters");
  }
  const Matrix& last = tape.pre_activations.back();
  if (output_grad.rows() != last.rows() || output_grad.cols() != last.cols())
    throw ShapeError("backward: output gradient shape does not match the forward output");

  BackwardResult res;
  res.grads = zeros_like(params);
  Matrix g = output_grad;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    if (tape.dropout_layer && *tape.dropout_layer == l) {
      auto gv = g.values();
      auto sv = tape.dropout_scale.values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= sv[i];
    }
    if (is_activated(spec, l)) {
      auto gv = g.values();
      auto pv = tape.pre_activations[l].values();
      for (std::size_t i = 0; i < gv.size(); ++i)
        if (pv[i] < 0.0) gv[i] *= spec.activation_slope;
    }
    res.grads[l].weight = matmul_tn(tape.layer_inputs[l], g);
    res.grads[l].bias = column_sums(g);
    g = matmul_nt(g, params.layers[l].weight);
  }
  res.input_grad = std::move(g);
  return res;
}

}  // namespace latentid::nn
