#include "latentid/nn/optim.hpp"

#include <cmath>

#include "latentid/error.hpp"

namespace latentid::nn {

AdamState::AdamState(AdamConfig cfg, std::span<Matrix* const> params) : config(cfg) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Matrix* p : params) {
    first_moment.emplace_back(p->rows(), p->cols());
    second_moment.emplace_back(p->rows(), p->cols());
  }
}

void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw ShapeError("adam_step: tensor count mismatch");
  ++state.step;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    if (p.size() != g.size() || p.size() != m.size())
      throw ShapeError("adam_step: gradient shape does not match parameter");
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

void PlateauScheduler::validate() const {
  if (!(decay_factor > 0.0 && decay_factor < 1.0))
    throw InvalidArgument("plateau: decay_factor must lie in (0, 1)");
  if (patience < 1) throw InvalidArgument("plateau: patience must be at least 1");
}

double plateau_update(PlateauScheduler& sched, double metric, double current_lr) {
  if (!std::isfinite(metric)) throw InvalidArgument("plateau_update: metric is not finite");
  if (metric > sched.best_metric + sched.min_improvement) {
    sched.best_metric = metric;
    sched.bad_windows = 0;
    return current_lr;
  }
  if (++sched.bad_windows >= sched.patience) {
    sched.bad_windows = 0;
    return current_lr * sched.decay_factor;
  }
  return current_lr;
}

}  // namespace latentid::nn
