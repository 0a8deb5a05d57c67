#include "latentid/harness/experiment.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <thread>

#include "latentid/datagen/tcl.hpp"
#include "latentid/error.hpp"
#include "latentid/metrics/correlation.hpp"
#include "latentid/models/persistence.hpp"
#include "latentid/models/rademacher.hpp"
#include "latentid/ndmath/csv.hpp"

namespace latentid::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kHalfStream = 102;
constexpr std::uint64_t kHashStream = 103;

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData d;
  d.full = cfg.dataset_path ? datagen::read_dataset_dir(*cfg.dataset_path)
                            : datagen::generate_tcl_dataset(cfg.dataset).data;
  d.full.validate();
  RngStream split_rng(cfg.dataset.seed, kSplitStream);
  d.split = split_dataset(d.full, cfg.training.train_fraction, split_rng);
  d.train = subset(d.full, d.split.train);
  d.eval = subset(d.full, d.split.eval);
  RngStream half_rng(cfg.dataset.seed, kHalfStream);
  const DatasetSplit halves = split_dataset(d.eval, 0.5, half_rng);
  d.eval_fit = halves.train;
  d.eval_score = halves.eval;

  if (cfg.model.kind == models::ModelKind::ivae && cfg.u_task.kind == "rademacher") {
    RngStream hash_rng(cfg.u_task.seed, kHashStream);
    const auto hasher = models::build_rademacher_hasher(cfg.u_task.bits, d.full.x.cols(), hash_rng);
    for (LabeledDataset* ds : {&d.train, &d.eval}) {
      ds->u = models::hash_u(hasher, ds->x);
      ds->n_labels = hasher.n_labels();
    }
  }
  return d;
}

MetricSummary summarize_values(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("aggregate: no values");
  MetricSummary s;
  s.count = values.size();
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

MetricSummary summarize(const std::vector<const metrics::MccReport*>& reports) {
  if (reports.empty()) throw InvalidArgument("aggregate: no pair reports");
  std::vector<double> finals;
  for (const auto* r : reports) finals.push_back(r->final_mcc);
  MetricSummary s = summarize_values(finals);
  const std::size_t len = reports.front()->cumulative_means.size();
  for (const auto* r : reports)
    if (r->cumulative_means.size() != len) throw ShapeError("aggregate: curves have different lengths");
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> col;
    for (const auto* r : reports) col.push_back(r->cumulative_means[i]);
    const MetricSummary c = summarize_values(col);
    s.curve_mean.push_back(c.mean);
    s.curve_std.push_back(c.std);
  }
  return s;
}

PairAggregate aggregate(const std::vector<PairReport>& reports) {
  if (reports.empty()) throw InvalidArgument("aggregate: no pair reports");
  auto pick = [&](auto member) {
    std::vector<const metrics::MccReport*> out;
    for (const auto& r : reports) out.push_back(&member(r));
    return summarize(out);
  };
  PairAggregate a;
  a.n_pairs = reports.size();
  a.strong_in = pick([](const PairReport& r) -> const metrics::MccReport& { return r.strong.in_sample; });
  a.strong_out = pick([](const PairReport& r) -> const metrics::MccReport& { return r.strong.out_of_sample; });
  a.weak_in = pick([](const PairReport& r) -> const metrics::MccReport& { return r.weak.in_sample; });
  a.weak_out = pick([](const PairReport& r) -> const metrics::MccReport& { return r.weak.out_of_sample; });
  return a;
}

metrics::WilcoxonResult compare_models(std::span<const double> a, std::span<const double> b,
                                       metrics::WilcoxonMethod method) {
  return metrics::wilcoxon_signed_rank(a, b, method);
}

std::optional<SourceScores> source_scores(const RunArtifact& run, const LabeledDataset& eval) {
  if (!eval.s) return std::nullopt;
  return SourceScores{metrics::strong_mcc(run.representation, *eval.s).final_mcc,
                      metrics::strong_mcc(run.baseline_representation, *eval.s).final_mcc};
}

PairReport compare_runs(const RunArtifact& a, const RunArtifact& b, const PreparedData& data,
                        const MetricsConfig& mc) {
  PairReport p;
  p.seed_a = a.seed;
  p.seed_b = b.seed;
  p.strong = metrics::strong_mcc_split(a.representation, b.representation, data.eval_fit, data.eval_score);
  const std::size_t d_cca = mc.d_cca ? mc.d_cca
                                     : metrics::default_d_cca(a.representation.cols(), b.representation.cols());
  p.weak = metrics::weak_mcc(a.representation, b.representation, data.eval_fit, data.eval_score, d_cca, mc.ridge);
  p.sources_a = source_scores(a, data.eval);
  p.sources_b = source_scores(b, data.eval);
  return p;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_indices(std::size_t n_runs, bool self_pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_runs; ++i)
    for (std::size_t j = self_pairs ? i : i + 1; j < n_runs; ++j) out.emplace_back(i, j);
  return out;
}

std::pair<std::vector<RunArtifact>, std::vector<RunFailure>> train_all(const ExperimentConfig& cfg,
                                                                       const PreparedData& data, bool verbose) {
  const std::size_t n = cfg.seeds.size();
  std::vector<std::optional<RunArtifact>> slots(n);
  std::vector<std::optional<RunFailure>> errors(n);
  std::mutex log_mutex;
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    std::function<void(const TracePoint&)> log;
    if (verbose)
      log = [&, seed](const TracePoint& t) {
        std::lock_guard lock(log_mutex);
        std::cerr << "seed " << seed << " step " << t.step << " train_elbo " << t.train_elbo << " eval_elbo "
                  << t.eval_elbo << " lr " << t.lr << "\n";
      };
    try {
      slots[i] = train_model(cfg, data.train, data.eval, seed, log);
    } catch (const Error& e) {
      errors[i] = RunFailure{seed, e.kind(), e.what()};
    } catch (const std::exception& e) {
      errors[i] = RunFailure{seed, "error", e.what()};
    }
  });
  std::vector<RunArtifact> runs;
  std::vector<RunFailure> failures;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) runs.push_back(std::move(*slots[i]));
    if (errors[i]) failures.push_back(*errors[i]);
  }
  return {std::move(runs), std::move(failures)};
}

void write_run(const fs::path& dir, const RunArtifact& run, const std::optional<SourceScores>& src) {
  fs::create_directories(dir);
  models::save_model(dir / "model", run.model, run.seed);
  write_matrix_csv(dir / "representation.csv", run.representation);
  write_matrix_csv(dir / "baseline_representation.csv", run.baseline_representation);
  nlohmann::json j = {{"seed", run.seed},
                      {"model_path", "model"},
                      {"representation_path", "representation.csv"},
                      {"baseline_representation_path", "baseline_representation.csv"},
                      {"rows", run.representation.rows()},
                      {"d_z", run.representation.cols()},
                      {"initial_eval_elbo", run.initial_eval_elbo},
                      {"final_train_elbo", run.final_train_elbo},
                      {"final_eval_elbo", run.final_eval_elbo},
                      {"identifiability_repairs", run.identifiability_repairs},
                      {"trace", run.trace}};
  if (src) j["mcc_to_sources"] = *src;
  write_json_file(dir / "run.json", j);
  write_json_file(dir / "timing.json", {{"wall_clock_seconds", run.wall_clock_seconds}});
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool verbose) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  write_json_file(out / "config.json", cfg);

  const PreparedData data = prepare_data(cfg);
  nlohmann::json data_cfg = cfg.dataset_path ? nlohmann::json{{"dataset_path", cfg.dataset_path->string()}}
                                             : nlohmann::json(cfg.dataset);
  datagen::write_dataset_dir(out / "dataset", data.full, data_cfg);
  write_json_file(out / "split.json", {{"train", data.split.train},
                                       {"eval", data.split.eval},
                                       {"eval_fit", data.eval_fit},
                                       {"eval_score", data.eval_score}});

  ExperimentResult res;
  std::tie(res.runs, res.failures) = train_all(cfg, data, verbose);
  for (const auto& f : res.failures)
    if (verbose) std::cerr << "seed " << f.seed << " failed: " << f.message << "\n";

  for (const RunArtifact& r : res.runs) {
    const auto src = source_scores(r, data.eval);
    write_run(out / "runs" / seed_dir_name(r.seed), r, src);
    res.summary.runs.push_back({r.seed, r.initial_eval_elbo, r.final_eval_elbo, r.final_train_elbo,
                                r.identifiability_repairs, src});
  }
  res.summary.failures = res.failures;
  if (res.runs.size() < 2)
    throw InvalidArgument("experiment: only " + std::to_string(res.runs.size()) +
                          " run(s) survived; at least two are needed for pair metrics");

  const auto idx = pair_indices(res.runs.size(), cfg.metrics.self_pairs);
  res.pairs.resize(idx.size());
  parallel_for(idx.size(), cfg.jobs, [&](std::size_t p) {
    res.pairs[p] = compare_runs(res.runs[idx[p].first], res.runs[idx[p].second], data, cfg.metrics);
  });
  res.summary.pairs = aggregate(res.pairs);

  if (data.eval.s) {
    std::vector<double> trained, baseline, elbos;
    for (const auto& r : res.summary.runs) {
      trained.push_back(r.sources->trained);
      baseline.push_back(r.sources->baseline);
      elbos.push_back(r.final_eval_elbo);
    }
    res.summary.mcc_to_sources = summarize_values(trained);
    res.summary.baseline_mcc_to_sources = summarize_values(baseline);
    if (trained.size() >= 3) {
      try {
        res.summary.elbo_mcc_correlation = metrics::elbo_mcc_correlation(elbos, trained);
      } catch (const InvalidArgument&) {
        // constant ELBO or MCC across runs: correlation undefined
      }
    }
  }

  write_json_file(out / "pairs.json", res.pairs);
  write_json_file(out / "summary.json", res.summary);
  return res;
}

void to_json(nlohmann::json& j, const RunFailure& f) {
  j = {{"seed", f.seed}, {"error", f.kind}, {"message", f.message}};
}

void to_json(nlohmann::json& j, const SourceScores& s) {
  j = {{"trained", s.trained}, {"baseline", s.baseline}};
}

void to_json(nlohmann::json& j, const PairReport& p) {
  j = {{"seed_a", p.seed_a}, {"seed_b", p.seed_b}, {"strong", p.strong}, {"weak", p.weak}};
  if (p.sources_a) j["mcc_to_sources_a"] = *p.sources_a;
  if (p.sources_b) j["mcc_to_sources_b"] = *p.sources_b;
}

void from_json(const nlohmann::json& j, PairReport& p) {
  p = PairReport{};
  j.at("seed_a").get_to(p.seed_a);
  j.at("seed_b").get_to(p.seed_b);
  j.at("strong").get_to(p.strong);
  j.at("weak").get_to(p.weak);
  auto scores = [](const nlohmann::json& s) {
    return SourceScores{s.at("trained").get<double>(), s.at("baseline").get<double>()};
  };
  if (j.contains("mcc_to_sources_a")) p.sources_a = scores(j.at("mcc_to_sources_a"));
  if (j.contains("mcc_to_sources_b")) p.sources_b = scores(j.at("mcc_to_sources_b"));
}

void to_json(nlohmann::json& j, const MetricSummary& m) {
  j = {{"count", m.count}, {"mean", m.mean}, {"std", m.std}};
  if (!m.curve_mean.empty()) {
    j["curve_mean"] = m.curve_mean;
    j["curve_std"] = m.curve_std;
  }
}

void to_json(nlohmann::json& j, const PairAggregate& a) {
  j = {{"n_pairs", a.n_pairs},
       {"strong_in", a.strong_in},
       {"strong_out", a.strong_out},
       {"weak_in", a.weak_in},
       {"weak_out", a.weak_out}};
}

void to_json(nlohmann::json& j, const RunSummary& r) {
  j = {{"seed", r.seed},
       {"initial_eval_elbo", r.initial_eval_elbo},
       {"final_eval_elbo", r.final_eval_elbo},
       {"final_train_elbo", r.final_train_elbo},
       {"identifiability_repairs", r.identifiability_repairs}};
  if (r.sources) j["mcc_to_sources"] = *r.sources;
}

void to_json(nlohmann::json& j, const ExperimentSummary& s) {
  j = {{"pairs", s.pairs}, {"runs", s.runs}, {"failures", s.failures}};
  if (s.mcc_to_sources) j["mcc_to_sources"] = *s.mcc_to_sources;
  if (s.baseline_mcc_to_sources) j["baseline_mcc_to_sources"] = *s.baseline_mcc_to_sources;
  j["elbo_mcc_correlation"] = s.elbo_mcc_correlation ? nlohmann::json(*s.elbo_mcc_correlation) : nlohmann::json();
}

}  // namespace latentid::harness
