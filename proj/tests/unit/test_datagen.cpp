#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "latentid/datagen/dataset.hpp"
#include "latentid/datagen/tcl.hpp"
#include "latentid/error.hpp"
#include "latentid/ndmath/linalg.hpp"

using namespace latentid;
using namespace latentid::datagen;

namespace {

TclConfig small_config(std::size_t per_segment = 100) {
  TclConfig c;
  c.samples_per_segment = per_segment;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  TclConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_segments = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = TclConfig{};
  c.std_lo = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = TclConfig{};
  c.n_mixing_layers = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);

  const TclConfig d = small_config();
  nlohmann::json j = d;
  CHECK(j.at("mean_range") == nlohmann::json::array({-3.0, 3.0}));
  CHECK(j.get<TclConfig>() == d);
}

TEST_CASE("sources have the requested layout") {
  RngStream rng(1);
  const Sources src = generate_sources(small_config(), rng);
  CHECK(src.s.rows() == 2000);
  CHECK(src.s.cols() == 5);
  CHECK(std::set<std::size_t>(src.u.begin(), src.u.end()).size() == 20);
  for (std::size_t r = 0; r < 2000; ++r) CHECK(src.u[r] == r / 100);
  for (double m : src.params.means.values()) CHECK((m >= -3.0 && m < 3.0));
  for (double s : src.params.stds.values()) CHECK((s >= 0.01 && s < 3.0));
}

TEST_CASE("degenerate stds pin samples to segment means") {
  TclConfig c = small_config(10);
  c.std_lo = 1e-9;
  c.std_hi = 2e-9;
  RngStream rng(2);
  const Sources src = generate_sources(c, rng);
  for (std::size_t r = 0; r < src.s.rows(); ++r)
    for (std::size_t j = 0; j < c.d; ++j)
      CHECK(std::abs(src.s(r, j) - src.params.means(src.u[r], j)) <= 1e-6);
}

TEST_CASE("segment moments match stored parameters") {
  const TclConfig c = small_config(2000);
  RngStream rng(3);
  const Sources src = generate_sources(c, rng);
  const double n = static_cast<double>(c.samples_per_segment);
  for (std::size_t k = 0; k < c.n_segments; ++k) {
    for (std::size_t j = 0; j < c.d; ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t r = k * c.samples_per_segment; r < (k + 1) * c.samples_per_segment; ++r) {
        mean += src.s(r, j);
        sq += src.s(r, j) * src.s(r, j);
      }
      mean /= n;
      const double var = sq / n - mean * mean;
      const double sd = src.params.stds(k, j);
      CHECK(std::abs(mean - src.params.means(k, j)) <= 4.0 * sd / std::sqrt(n));
      // Sampling sd of the variance estimate for Gaussians is σ²·√(2/n).
      CHECK(std::abs(var - sd * sd) <= 6.0 * sd * sd * std::sqrt(2.0 / n));
    }
  }
}

TEST_CASE("mixing network layers are well conditioned") {
  RngStream rng(4);
  const MixingNetwork net = sample_mixing_mlp(small_config(), rng);
  CHECK(net.params.layers.size() == 4);
  for (const auto& l : net.params.layers) {
    CHECK(l.weight.rows() == 5);
    CHECK(l.weight.cols() == 5);
    CHECK(svd(l.weight).s.back() >= 0.1);
    for (double b : l.bias.values()) CHECK(b == 0.0);
  }
  CHECK(net.spec.final_linear);
  CHECK(net.spec.activation_slope == 0.1);

  TclConfig single = small_config();
  single.n_mixing_layers = 1;
  const MixingNetwork lin = sample_mixing_mlp(single, rng);
  const Matrix s = sample_gaussian(rng, 20, 5, 0.0, 1.0);
  CHECK(max_abs_diff(mix_sources(lin, s), matmul(s, lin.params.layers[0].weight)) == 0.0);

  TclConfig impossible = small_config();
  impossible.min_singular_value = 100.0;
  CHECK_THROWS_AS(sample_mixing_mlp(impossible, rng), InvalidArgument);
}

TEST_CASE("identity mixing reproduces the sources") {
  RngStream rng(5);
  TclConfig c = small_config();
  c.n_mixing_layers = 1;
  MixingNetwork net = sample_mixing_mlp(c, rng);
  net.params.layers[0].weight = Matrix::identity(c.d);
  net.params.touch();
  const Sources src = generate_sources(c, rng);
  CHECK(mix_sources(net, src.s) == src.s);
}

TEST_CASE("full dataset") {
  TclConfig c;
  c.seed = 11;
  const SyntheticDataset a = generate_tcl_dataset(c);
  CHECK(a.data.x.rows() == 10000);
  CHECK(a.data.x.cols() == 5);
  REQUIRE(a.data.s.has_value());
  CHECK(a.data.n_labels == 20);
  CHECK(mix_sources(a.mixing, *a.data.s) == a.data.x);

  const SyntheticDataset b = generate_tcl_dataset(c);
  CHECK(a.data.x == b.data.x);
  CHECK(*a.data.s == *b.data.s);
  CHECK(a.data.u == b.data.u);

  // Distinct sources stay distinct after mixing.
  std::size_t collisions = 0;
  for (std::size_t i = 0; i < 1000; ++i)
    for (std::size_t j = i + 1; j < 1000; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < 5; ++k) d = std::max(d, std::abs(a.data.x(i, k) - a.data.x(j, k)));
      collisions += d == 0.0;
    }
  CHECK(collisions == 0);
}

TEST_CASE("stratified split") {
  const SyntheticDataset ds = generate_tcl_dataset(small_config());
  RngStream r1(6), r2(6);
  const DatasetSplit s = split_dataset(ds.data, 0.5, r1);
  CHECK(s.train.size() == 1000);
  CHECK(s.eval.size() == 1000);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.eval.begin(), s.eval.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  std::vector<int> balance(20, 0);
  for (std::size_t r : s.train) ++balance[ds.data.u[r]];
  for (std::size_t r : s.eval) --balance[ds.data.u[r]];
  for (int b : balance) CHECK(std::abs(b) <= 1);

  const DatasetSplit again = split_dataset(ds.data, 0.5, r2);
  CHECK(again.train == s.train);

  RngStream r3(7);
  const DatasetSplit odd = split_dataset(ds.data, 0.37, r3);
  CHECK(odd.train.size() == 740);

  CHECK_THROWS_AS(split_dataset(ds.data, 0.0, r3), InvalidArgument);
  CHECK_THROWS_AS(split_dataset(ds.data, 1.0, r3), InvalidArgument);
  LabeledDataset tiny = subset(ds.data, {0, 100, 101});
  tiny.n_labels = 2;
  for (auto& u : tiny.u) u = u == 0 ? 0 : 1;
  CHECK_THROWS_AS(split_dataset(tiny, 0.5, r3), InvalidArgument);
}

TEST_CASE("dataset directory round trip") {
  const TclConfig c = small_config(20);
  const SyntheticDataset ds = generate_tcl_dataset(c);
  const auto dir = std::filesystem::temp_directory_path() / "latentid_dataset_roundtrip";
  std::filesystem::remove_all(dir);
  write_dataset_dir(dir, ds.data, c);
  for (const char* f : {"X.csv", "S.csv", "U.csv", "config.json"}) CHECK(std::filesystem::exists(dir / f));
  const LabeledDataset back = read_dataset_dir(dir);
  CHECK(back.x == ds.data.x);
  CHECK(*back.s == *ds.data.s);
  CHECK(back.u == ds.data.u);
  CHECK(back.n_labels == 20);
  std::filesystem::remove_all(dir);
}
