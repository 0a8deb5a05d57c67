// Command-line front end: data generation, training, representation
// extraction, MCC and Wilcoxon on CSV files, full experiments, reports.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentid/datagen/tcl.hpp"
#include "latentid/error.hpp"
#include "latentid/harness/experiment.hpp"
#include "latentid/models/persistence.hpp"
#include "latentid/ndmath/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace latentid;

namespace {

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

int fail(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return 1;
}

datagen::TclConfig tcl_from_file(const fs::path& path) {
  const json j = harness::read_json_file(path);
  try {
    if (j.contains("dataset")) return harness::parse_experiment_config(j).dataset;
    datagen::TclConfig c = j.get<datagen::TclConfig>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("dataset config: ") + e.what());
  }
}

int cmd_gen_data(const fs::path& config, const fs::path& out) {
  const auto cfg = tcl_from_file(config);
  const auto ds = datagen::generate_tcl_dataset(cfg);
  datagen::write_dataset_dir(out, ds.data, cfg);
  print({{"output", out.string()}, {"rows", ds.data.size()}, {"d", ds.data.x.cols()}, {"segments", ds.data.n_labels}});
  return 0;
}

int cmd_train(const fs::path& config, bool verbose) {
  const auto cfg = harness::load_experiment_config(config);
  const auto data = harness::prepare_data(cfg);
  auto [runs, failures] = harness::train_all(cfg, data, verbose);
  json out = {{"runs", json::array()}, {"failures", failures}};
  for (const auto& r : runs) {
    const auto dir = cfg.output_dir / "runs" / ("seed_" + std::to_string(r.seed));
    const auto src = harness::source_scores(r, data.eval);
    harness::write_run(dir, r, src);
    json rj = {{"seed", r.seed}, {"dir", dir.string()}, {"final_eval_elbo", r.final_eval_elbo},
               {"initial_eval_elbo", r.initial_eval_elbo}};
    if (src) rj["mcc_to_sources"] = *src;
    out["runs"].push_back(rj);
  }
  print(out);
  return runs.empty() ? 1 : 0;
}

int cmd_extract(const fs::path& model_dir, const fs::path& x_path, const fs::path& out, const std::string& u_path) {
  const auto model = models::load_model(model_dir);
  const Matrix x = read_matrix_csv(x_path);
  std::vector<std::size_t> u;
  models::LabelSpan span;
  if (!u_path.empty()) {
    u = read_labels(u_path);
    span = std::span<const std::size_t>(u);
  } else if (model.kind == models::ModelKind::ivae) {
    throw InvalidArgument("extract: iVAE models need --u with the labels of X");
  }
  const Matrix rep = models::extract_representations(model, x, span);
  write_matrix_csv(out, rep);
  print({{"output", out.string()}, {"rows", rep.rows()}, {"cols", rep.cols()}});
  return 0;
}

int cmd_mcc(const fs::path& a_path, const fs::path& b_path, bool weak, std::size_t d_cca, bool split,
            std::uint64_t seed, double ridge) {
  const Matrix a = read_matrix_csv(a_path);
  const Matrix b = read_matrix_csv(b_path);
  if (a.rows() != b.rows()) throw ShapeError("mcc: representations have different row counts");
  std::vector<std::size_t> fit(a.rows());
  std::iota(fit.begin(), fit.end(), 0);
  std::vector<std::size_t> eval = fit;
  if (split) {
    RngStream rng(seed);
    for (std::size_t i = fit.size(); i > 1; --i) std::swap(fit[i - 1], fit[rng.uniform_int(i)]);
    eval.assign(fit.begin() + static_cast<std::ptrdiff_t>(fit.size() / 2), fit.end());
    fit.resize(fit.size() / 2);
    std::sort(fit.begin(), fit.end());
    std::sort(eval.begin(), eval.end());
  }
  json out;
  if (weak) {
    const std::size_t d = d_cca ? d_cca : metrics::default_d_cca(a.cols(), b.cols());
    const auto r = metrics::weak_mcc(a, b, fit, eval, d, ridge);
    out = {{"kind", "weak"}, {"d_cca", d}};
    out["in_sample"] = r.in_sample;
    if (split) out["out_of_sample"] = r.out_of_sample;
  } else if (split) {
    const auto r = metrics::strong_mcc_split(a, b, fit, eval);
    out = {{"kind", "strong"}, {"in_sample", r.in_sample}, {"out_of_sample", r.out_of_sample}};
  } else {
    out = {{"kind", "strong"}, {"in_sample", metrics::strong_mcc(a, b)}};
  }
  print(out);
  return 0;
}

int cmd_wilcoxon(const fs::path& a_path, const fs::path& b_path, const std::string& method) {
  metrics::WilcoxonMethod m = metrics::WilcoxonMethod::automatic;
  if (method == "exact") m = metrics::WilcoxonMethod::exact;
  else if (method == "normal") m = metrics::WilcoxonMethod::normal;
  const auto a = read_vector(a_path);
  const auto b = read_vector(b_path);
  print(harness::compare_models(a, b, m));
  return 0;
}

int cmd_experiment(const fs::path& config, std::size_t jobs, bool verbose, const std::string& out_dir) {
  auto cfg = harness::load_experiment_config(config);
  if (jobs) cfg.jobs = jobs;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const auto res = harness::run_experiment(cfg, verbose);
  json out = res.summary;
  out["output_dir"] = cfg.output_dir.string();
  print(out);
  return 0;
}

void write_curves(const fs::path& path, const harness::PairAggregate& agg) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os.precision(17);
  os << "metric,k,mean,std\n";
  const std::pair<const char*, const harness::MetricSummary*> rows[] = {
      {"strong_in", &agg.strong_in}, {"strong_out", &agg.strong_out},
      {"weak_in", &agg.weak_in}, {"weak_out", &agg.weak_out}};
  for (const auto& [name, m] : rows)
    for (std::size_t k = 0; k < m->curve_mean.size(); ++k)
      os << name << "," << k + 1 << "," << m->curve_mean[k] << "," << m->curve_std[k] << "\n";
  if (!os) throw IoError("failed writing " + path.string());
}

int cmd_report(const fs::path& dir) {
  const json pairs_json = harness::read_json_file(dir / "pairs.json");
  std::vector<harness::PairReport> pairs;
  try {
    pairs = pairs_json.get<std::vector<harness::PairReport>>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("pairs.json: ") + e.what());
  }
  const auto agg = harness::aggregate(pairs);
  json report = {{"pairs", agg}};
  if (fs::exists(dir / "summary.json")) {
    const json summary = harness::read_json_file(dir / "summary.json");
    for (const char* key : {"runs", "failures", "mcc_to_sources", "baseline_mcc_to_sources", "elbo_mcc_correlation"})
      if (summary.contains(key)) report[key] = summary[key];
  }
  harness::write_json_file(dir / "report.json", report);
  write_curves(dir / "curves.csv", agg);
  print(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identifiability experiments for VAE, iVAE and VaDE representations"};
  app.require_subcommand(1);

  std::string p1, p2, p3, u_path, method = "auto", out_dir;
  bool weak = false, split = false, verbose = false;
  std::size_t d_cca = 0, jobs = 0;
  std::uint64_t seed = 0;
  double ridge = metrics::kDefaultCcaRidge;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic segmented dataset");
  gen->add_option("config", p1, "JSON with the dataset settings (or a full experiment config)")->required();
  gen->add_option("out_dir", p2, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train every seed of a config and write the runs");
  train->add_option("config", p1)->required();
  train->add_flag("--verbose", verbose, "Log evaluation points to stderr");

  auto* extract = app.add_subcommand("extract", "Posterior means of a saved model on X");
  extract->add_option("model_dir", p1)->required();
  extract->add_option("x_csv", p2)->required();
  extract->add_option("out_csv", p3)->required();
  extract->add_option("--u", u_path, "Label file for iVAE models");

  auto* mcc = app.add_subcommand("mcc", "MCC between two representation CSVs");
  mcc->add_option("rep_a", p1)->required();
  mcc->add_option("rep_b", p2)->required();
  mcc->add_flag("--weak", weak, "CCA-based weak MCC");
  mcc->add_option("--d-cca", d_cca, "Canonical dimensions (default min(20, d))");
  mcc->add_flag("--in-out-split", split, "Fit on a random half, score the other half");
  mcc->add_option("--seed", seed, "Seed of the half split");
  mcc->add_option("--ridge", ridge, "CCA covariance ridge");

  auto* wil = app.add_subcommand("wilcoxon", "Two-sided Wilcoxon signed-rank test on paired values");
  wil->add_option("a", p1)->required();
  wil->add_option("b", p2)->required();
  wil->add_option("--method", method, "auto, exact or normal")->check(CLI::IsMember({"auto", "exact", "normal"}));

  auto* exp = app.add_subcommand("experiment", "Run the full multi-seed experiment");
  exp->add_option("config", p1)->required();
  exp->add_option("--jobs", jobs, "Concurrent seeds (overrides the config)");
  exp->add_option("--output-dir", out_dir, "Output directory (overrides the config)");
  exp->add_flag("--verbose", verbose);

  auto* rep = app.add_subcommand("report", "Aggregate an experiment directory into report.json and curves.csv");
  rep->add_option("experiment_dir", p1)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*gen) return cmd_gen_data(p1, p2);
    if (*train) return cmd_train(p1, verbose);
    if (*extract) return cmd_extract(p1, p2, p3, u_path);
    if (*mcc) return cmd_mcc(p1, p2, weak, d_cca, split, seed, ridge);
    if (*wil) return cmd_wilcoxon(p1, p2, method);
    if (*exp) return cmd_experiment(p1, jobs, verbose, out_dir);
    if (*rep) return cmd_report(p1);
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const json::exception& e) {
    return fail("invalid_argument", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what());
  } catch (const std::exception& e) {
    return fail("error", e.what());
  }
  return fail("usage", "no subcommand");
}
