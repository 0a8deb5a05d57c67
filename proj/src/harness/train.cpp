#include "latentid/harness/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "latentid/error.hpp"
#include "latentid/models/elbo.hpp"
#include "latentid/models/identifiability.hpp"
#include "latentid/nn/optim.hpp"

namespace latentid::harness {

namespace {

RngStream stream(std::uint64_t seed, Stream s) { return RngStream(seed, static_cast<std::uint64_t>(s)); }

const Matrix* prior_means(const models::GenerativeModel& m) {
  if (const auto* c = std::get_if<models::ConditionalGaussianPrior>(&m.prior)) return &c->means;
  if (const auto* g = std::get_if<models::GaussianMixturePrior>(&m.prior)) return &g->means;
  return nullptr;
}

const Matrix* prior_log_vars(const models::GenerativeModel& m) {
  if (const auto* c = std::get_if<models::ConditionalGaussianPrior>(&m.prior)) return &c->log_vars;
  if (const auto* g = std::get_if<models::GaussianMixturePrior>(&m.prior)) return &g->log_vars;
  return nullptr;
}

bool l_check_applies(const ExperimentConfig& cfg, const models::GenerativeModel& m) {
  return cfg.identifiability.check_L && m.kind != models::ModelKind::vae &&
         m.n_components >= 2 * m.d_z + 1;
}

models::IdentifiabilityCheck check_of(const models::GenerativeModel& m, const std::vector<std::size_t>& idx) {
  return std::visit(
      [&](const auto& p) -> models::IdentifiabilityCheck {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, models::StandardNormalPrior>) {
          throw InvalidArgument("L matrix requested for a standard normal prior");
        } else {
          return models::build_L_matrix(p, idx);
        }
      },
      m.prior);
}

// Re-checks L and applies the noise repair; returns the resulting CN.
double repair_if_needed(models::GenerativeModel& m, const ExperimentConfig& cfg,
                        const std::vector<std::size_t>& idx, RngStream& rng, std::size_t& repairs) {
  const auto check = check_of(m, idx);
  if (check.satisfied) return check.condition_number;
  std::visit(
      [&](auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (!std::is_same_v<P, models::StandardNormalPrior>)
          p = models::enforce_identifiability(p, check, cfg.identifiability.noise_scale, rng);
      },
      m.prior);
  ++repairs;
  return check_of(m, idx).condition_number;
}

// Hashed labels may leave some values unused, so only ranges are checked.
void check_labels(const LabeledDataset& ds) {
  if (ds.u.size() != ds.x.rows()) throw ShapeError("train_model: label count differs from row count");
  if (ds.x.rows() == 0) throw InvalidArgument("train_model: empty dataset");
  for (std::size_t v : ds.u)
    if (v >= ds.n_labels) throw InvalidArgument("train_model: label out of range");
}

}  // namespace

void to_json(nlohmann::json& j, const TracePoint& t) {
  j = {{"step", t.step},
       {"train_elbo", t.train_elbo},
       {"eval_elbo", t.eval_elbo},
       {"lr", t.lr},
       {"condition_number", std::isfinite(t.condition_number) ? nlohmann::json(t.condition_number)
                                                              : nlohmann::json("inf")}};
}

models::ModelConfig resolve_model_config(const ExperimentConfig& cfg, const LabeledDataset& data) {
  models::ModelConfig m = cfg.model;
  m.d_x = data.x.cols();
  if (m.kind == models::ModelKind::ivae) {
    if (!cfg.n_components_given) m.n_components = data.n_labels;
    if (m.n_components != data.n_labels)
      throw InvalidArgument("config: iVAE K (" + std::to_string(m.n_components) +
                            ") differs from the number of u values (" + std::to_string(data.n_labels) + ")");
  }
  return m;
}

models::LabelSpan encoder_labels(const models::GenerativeModel& model, const LabeledDataset& data) {
  if (model.kind != models::ModelKind::ivae) return std::nullopt;
  return std::span<const std::size_t>(data.u);
}

double evaluation_elbo(const models::GenerativeModel& model, const LabeledDataset& data, std::uint64_t seed) {
  RngStream rng = stream(seed, Stream::eval);
  return models::elbo(model, data.x, encoder_labels(model, data), rng, false).total;
}

RunArtifact train_model(const ExperimentConfig& cfg, const LabeledDataset& train, const LabeledDataset& eval,
                        std::uint64_t seed, const std::function<void(const TracePoint&)>& on_eval) {
  const auto started = std::chrono::steady_clock::now();
  check_labels(train);
  check_labels(eval);
  if (train.x.cols() != eval.x.cols()) throw InvalidArgument("train_model: train and eval widths differ");
  const models::ModelConfig mcfg = resolve_model_config(cfg, train);
  const TrainingConfig& tc = cfg.training;

  RngStream init_rng = stream(seed, Stream::init);
  RngStream batch_rng = stream(seed, Stream::batches);
  RngStream noise_rng = stream(seed, Stream::noise);
  RngStream repair_rng = stream(seed, Stream::repair);

  RunArtifact art;
  art.seed = seed;
  art.model = models::make_model(mcfg, init_rng);
  models::GenerativeModel& model = art.model;

  const bool check_l = l_check_applies(cfg, model);
  const std::vector<std::size_t> u_idx =
      check_l ? models::default_u_indices(model.n_components, model.d_z) : std::vector<std::size_t>{};
  double cn = check_l ? repair_if_needed(model, cfg, u_idx, repair_rng, art.identifiability_repairs) : 0.0;

  art.baseline_representation = models::extract_representations(model, eval.x, encoder_labels(model, eval));
  art.initial_eval_elbo = evaluation_elbo(model, eval, seed);
  if (!std::isfinite(art.initial_eval_elbo)) throw NumericalError("non-finite evaluation ELBO", 0);
  art.trace.push_back({0, std::nan(""), art.initial_eval_elbo, tc.lr, cn});

  std::vector<Matrix*> params = model.parameters();
  nn::AdamState adam(nn::AdamConfig{tc.lr}, params);
  nn::PlateauScheduler sched;
  sched.decay_factor = tc.plateau_decay;
  sched.patience = tc.plateau_patience;
  sched.min_improvement = tc.plateau_min_improvement;
  sched.validate();

  const std::size_t n = train.size();
  const std::size_t batch = std::min(tc.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // forces a shuffle before the first batch
  std::vector<std::size_t> rows(batch);
  std::vector<std::size_t> labels(batch);
  double window_sum = 0.0;
  std::size_t window_count = 0;
  double lr = tc.lr;

  for (std::size_t step = 1; step <= tc.steps; ++step) {
    if (cursor + batch > n) {
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[batch_rng.uniform_int(i)]);
      cursor = 0;
    }
    for (std::size_t i = 0; i < batch; ++i) {
      rows[i] = order[cursor + i];
      labels[i] = train.u[rows[i]];
    }
    cursor += batch;
    const Matrix xb = select_rows(train.x, rows);
    const models::LabelSpan ub =
        model.kind == models::ModelKind::ivae ? models::LabelSpan(labels) : std::nullopt;

    models::ElboWithGradients ew = models::elbo_with_gradients(model, xb, ub, noise_rng, true);
    if (!std::isfinite(ew.elbo.total)) throw NumericalError("non-finite training ELBO", step);
    std::vector<Matrix> grads = ew.grads.flatten();
    for (Matrix& g : grads) g *= -1.0;

    if (check_l && cfg.identifiability.alpha > 0.0 && std::isfinite(cn)) {
      // Loss gains alpha·CN(L); its gradient reaches the prior tables only.
      const auto [gm, gl] = models::condition_number_gradient(*prior_means(model), *prior_log_vars(model), u_idx);
      const std::size_t nm = grads.size() - 2;
      grads[nm] += cfg.identifiability.alpha * gm;
      grads[nm + 1] += cfg.identifiability.alpha * gl;
    }
    nn::adam_step(adam, params, grads);
    model.touch();
    window_sum += ew.elbo.total;
    ++window_count;

    const bool at_interval = step % tc.eval_interval == 0;
    if (at_interval || step == tc.steps) {
      if (check_l) cn = repair_if_needed(model, cfg, u_idx, repair_rng, art.identifiability_repairs);
      const double ev = evaluation_elbo(model, eval, seed);
      if (!std::isfinite(ev)) throw NumericalError("non-finite evaluation ELBO", step);
      if (at_interval) {
        lr = nn::plateau_update(sched, ev, lr);
        adam.config.lr = lr;
      }
      TracePoint tp{step, window_sum / static_cast<double>(window_count), ev, lr, cn};
      art.trace.push_back(tp);
      if (on_eval) on_eval(tp);
      art.final_train_elbo = tp.train_elbo;
      art.final_eval_elbo = ev;
      window_sum = 0.0;
      window_count = 0;
    }
  }
  if (tc.steps == 0) art.final_eval_elbo = art.initial_eval_elbo;

  art.representation = models::extract_representations(model, eval.x, encoder_labels(model, eval));
  if (!art.representation.all_finite()) throw NumericalError("non-finite representation", tc.steps);
  art.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return art;
}

}  // namespace latentid::harness
