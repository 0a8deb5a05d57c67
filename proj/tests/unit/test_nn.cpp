#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "latentid/error.hpp"
#include "latentid/ndmath/rng.hpp"
#include "latentid/nn/mlp.hpp"
#include "latentid/nn/optim.hpp"
#include "latentid/nn/serialize.hpp"

using namespace latentid;
using namespace latentid::nn;

namespace {

MlpSpec make_spec(std::vector<std::size_t> widths, double dropout = 0.0) {
  MlpSpec s;
  s.layer_widths = std::move(widths);
  s.dropout_rate = dropout;
  return s;
}

double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(make_spec({3}).validate(), InvalidArgument);
  CHECK_THROWS_AS(make_spec({3, 0, 2}).validate(), InvalidArgument);
  CHECK_THROWS_AS(make_spec({3, 2}, 1.0).validate(), InvalidArgument);
  MlpSpec s = make_spec({3, 2});
  s.activation_slope = 1.0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  CHECK(make_spec({3, 8, 8, 8, 2}, 0.1).dropout_layer() == 1u);
  CHECK(make_spec({3, 8, 2}, 0.1).dropout_layer() == 0u);
  CHECK_FALSE(make_spec({3, 8, 8, 2}, 0.0).dropout_layer().has_value());
}

TEST_CASE("xavier bounds") {
  RngStream rng(1);
  const double root3 = std::sqrt(3.0);
  for (int i = 0; i < 100; ++i) {
    const auto p = init_xavier_uniform(make_spec({1, 1}), rng);
    CHECK(std::abs(p.layers[0].weight(0, 0)) <= root3);
  }
  const auto p3 = init_xavier_uniform(make_spec({3, 3}), rng);
  for (double w : p3.layers[0].weight.values()) CHECK(std::abs(w) <= 1.0);
  for (double b : p3.layers[0].bias.values()) CHECK(b == 0.0);

  double mx = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto p = init_xavier_uniform(make_spec({50, 50}), rng);
    for (double w : p.layers[0].weight.values()) mx = std::max(mx, std::abs(w));
  }
  const double bound = std::sqrt(6.0 / 100.0);
  CHECK(mx <= bound);
  CHECK(mx >= 0.98 * bound);
}

TEST_CASE("forward basics") {
  RngStream rng(2);
  MlpSpec spec = make_spec({2, 3, 2});
  auto p = init_xavier_uniform(spec, rng);
  for (auto& l : p.layers) l.weight.fill(0.0);
  p.layers[1].bias = Matrix::from_rows({{0.5, -1.5}});
  const Matrix x = sample_gaussian(rng, 4, 2, 0.0, 1.0);
  const Matrix y = predict(p, spec, x);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(y(r, 0) == 0.5);
    CHECK(y(r, 1) == -1.5);
  }

  MlpSpec lin = make_spec({2, 2});
  MlpParams lp = init_xavier_uniform(lin, rng);
  lp.layers[0].bias = Matrix::from_rows({{1.0, 2.0}});
  Matrix expect = matmul(x, lp.layers[0].weight);
  add_row_broadcast(expect, lp.layers[0].bias);
  CHECK(predict(lp, lin, x) == expect);

  // LeakyReLU(-2) = -0.2 flows into the final layer unchanged.
  MlpSpec two = make_spec({1, 1, 1});
  MlpParams tp;
  tp.layers = {{Matrix(1, 1, 1.0), Matrix(1, 1)}, {Matrix(1, 1, 1.0), Matrix(1, 1)}};
  tp.touch();
  CHECK(predict(tp, two, Matrix(1, 1, -2.0))(0, 0) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK_THROWS_AS(predict(tp, two, Matrix(1, 2)), ShapeError);
}

TEST_CASE("dropout is identity in eval mode and inverted in train mode") {
  RngStream rng(3);
  const MlpSpec spec = make_spec({4, 16, 16, 3}, 0.5);
  const MlpSpec no_drop = make_spec({4, 16, 16, 3}, 0.0);
  const auto p = init_xavier_uniform(spec, rng);
  const Matrix x = sample_gaussian(rng, 6, 4, 0.0, 1.0);
  RngStream r1(9), r2(9);
  CHECK(forward(p, spec, x, false, r1).output == forward(p, no_drop, x, true, r2).output);
  CHECK(r1.counter() == 0);

  RngStream r3(10);
  const auto fr = forward(p, spec, x, true, r3);
  for (double s : fr.tape.dropout_scale.values()) CHECK((s == 0.0 || s == 2.0));
  RngStream r4(10);
  CHECK(forward(p, spec, x, true, r4).output == fr.output);
}

TEST_CASE("backward of a linear layer") {
  RngStream rng(4);
  const MlpSpec spec = make_spec({3, 2});
  const auto p = init_xavier_uniform(spec, rng);
  const Matrix x = sample_gaussian(rng, 5, 3, 0.0, 1.0);
  const auto fr = forward(p, spec, x, false, rng);
  const auto br = backward(p, spec, fr.tape, Matrix(5, 2, 1.0));
  for (std::size_t i = 0; i < 3; ++i) {
    double col = 0.0;
    for (std::size_t r = 0; r < 5; ++r) col += x(r, i);
    for (std::size_t j = 0; j < 2; ++j) CHECK(br.grads[0].weight(i, j) == doctest::Approx(col));
  }
  for (double b : br.grads[0].bias.values()) CHECK(b == 5.0);
}

TEST_CASE("leaky relu gradient at a negative pre-activation") {
  const MlpSpec spec = make_spec({1, 1, 1});
  MlpParams p;
  p.layers = {{Matrix(1, 1, 1.0), Matrix(1, 1)}, {Matrix(1, 1, 1.0), Matrix(1, 1)}};
  p.touch();
  RngStream rng(0);
  const auto fr = forward(p, spec, Matrix(1, 1, -2.0), false, rng);
  const auto br = backward(p, spec, fr.tape, Matrix(1, 1, 1.0));
  CHECK(br.input_grad(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("backward matches central finite differences") {
  RngStream rng(5);
  const MlpSpec spec = make_spec({4, 7, 6, 3}, 0.3);
  auto p = init_xavier_uniform(spec, rng);
  for (auto& l : p.layers) l.bias = sample_gaussian(rng, 1, l.bias.cols(), 0.0, 0.3);
  const Matrix x = sample_gaussian(rng, 5, 4, 0.0, 1.0);
  const Matrix dir = sample_gaussian(rng, 5, 3, 0.0, 1.0);

  // Fixed dropout mask: replay the same rng state for every evaluation.
  const RngStream mask_rng(77);
  auto loss = [&](const MlpParams& q) {
    RngStream r = mask_rng;
    return dot(forward(q, spec, x, true, r).output, dir);
  };
  RngStream r = mask_rng;
  const auto fr = forward(p, spec, x, true, r);
  const auto br = backward(p, spec, fr.tape, dir);

  const double h = 1e-5;
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (int which = 0; which < 2; ++which) {
      Matrix& target = which == 0 ? p.layers[l].weight : p.layers[l].bias;
      const Matrix& grad = which == 0 ? br.grads[l].weight : br.grads[l].bias;
      for (std::size_t k = 0; k < target.size(); ++k) {
        const double orig = target.values()[k];
        target.values()[k] = orig + h;
        const double up = loss(p);
        target.values()[k] = orig - h;
        const double down = loss(p);
        target.values()[k] = orig;
        const double fd = (up - down) / (2 * h);
        const double an = grad.values()[k];
        const double rel = std::abs(fd - an) / std::max(1e-6, std::max(std::abs(fd), std::abs(an)));
        worst = std::max(worst, rel);
        ++checked;
      }
    }
  }
  CHECK(checked >= 100);
  CHECK(worst < 1e-4);

  // Input gradient too.
  Matrix xp = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = xp.values()[k];
    auto eval = [&](double v) {
      xp.values()[k] = v;
      RngStream rr = mask_rng;
      return dot(forward(p, spec, xp, true, rr).output, dir);
    };
    const double fd = (eval(orig + h) - eval(orig - h)) / (2 * h);
    xp.values()[k] = orig;
    CHECK(std::abs(fd - br.input_grad.values()[k]) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("stale tapes are rejected") {
  RngStream rng(6);
  const MlpSpec spec = make_spec({2, 3, 1});
  auto p = init_xavier_uniform(spec, rng);
  const auto fr = forward(p, spec, Matrix(2, 2, 1.0), false, rng);
  CHECK_THROWS_AS(backward(p, spec, fr.tape, Matrix(2, 2)), ShapeError);
  p.touch();
  CHECK_THROWS_AS(backward(p, spec, fr.tape, Matrix(2, 1)), InvalidArgument);
}

TEST_CASE("adam") {
  SUBCASE("zero gradients leave parameters unchanged") {
    Matrix w = Matrix::from_rows({{1.0, -2.0}});
    std::vector<Matrix*> ps{&w};
    AdamState st(AdamConfig{}, ps);
    const Matrix before = w;
    for (int i = 0; i < 5; ++i) adam_step(st, ps, std::vector<Matrix>{Matrix(1, 2)});
    CHECK(w == before);
    CHECK(st.step == 5);
  }
  SUBCASE("first step moves by lr along -sign(g)") {
    Matrix w(1, 3);
    std::vector<Matrix*> ps{&w};
    AdamState st(AdamConfig{0.01}, ps);
    adam_step(st, ps, std::vector<Matrix>{Matrix::from_rows({{3.0, -0.2, 1e-3}})});
    CHECK(w(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(w(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(w(0, 2) == doctest::Approx(-0.01).epsilon(1e-4));
  }
  SUBCASE("converges on a quadratic") {
    Matrix w(1, 1);
    std::vector<Matrix*> ps{&w};
    AdamState st(AdamConfig{0.1}, ps);
    for (int i = 0; i < 200; ++i)
      adam_step(st, ps, std::vector<Matrix>{Matrix(1, 1, 2.0 * (w(0, 0) - 3.0))});
    CHECK(std::abs(w(0, 0) - 3.0) < 0.1);
  }
  SUBCASE("packing order does not matter") {
    RngStream rng(7);
    Matrix a = sample_gaussian(rng, 2, 3, 0.0, 1.0), b = sample_gaussian(rng, 4, 1, 0.0, 1.0);
    Matrix flat(1, 10);
    std::copy(a.values().begin(), a.values().end(), flat.values().begin());
    std::copy(b.values().begin(), b.values().end(), flat.values().begin() + 6);
    std::vector<Matrix*> ps{&a, &b}, pf{&flat};
    AdamState s1(AdamConfig{}, ps), s2(AdamConfig{}, pf);
    for (int i = 0; i < 10; ++i) {
      const Matrix ga = sample_gaussian(rng, 2, 3, 0.0, 1.0), gb = sample_gaussian(rng, 4, 1, 0.0, 1.0);
      Matrix gf(1, 10);
      std::copy(ga.values().begin(), ga.values().end(), gf.values().begin());
      std::copy(gb.values().begin(), gb.values().end(), gf.values().begin() + 6);
      adam_step(s1, ps, std::vector<Matrix>{ga, gb});
      adam_step(s2, pf, std::vector<Matrix>{gf});
    }
    for (std::size_t k = 0; k < 6; ++k) CHECK(flat.values()[k] == a.values()[k]);
    for (std::size_t k = 0; k < 4; ++k) CHECK(flat.values()[6 + k] == b.values()[k]);
  }
}

TEST_CASE("plateau scheduler") {
  SUBCASE("improving metric keeps lr") {
    PlateauScheduler s;
    double lr = 1e-3;
    for (int i = 0; i < 30; ++i) lr = plateau_update(s, 0.01 * i, lr);
    CHECK(lr == 1e-3);
  }
  SUBCASE("constant metric decays exactly once after patience + 1 windows") {
    PlateauScheduler s;
    double lr = 1e-3;
    for (std::size_t i = 0; i < s.patience + 1; ++i) lr = plateau_update(s, -5.0, lr);
    CHECK(lr == 0.5e-3);
  }
  SUBCASE("improvement every other window keeps lr") {
    PlateauScheduler s;
    double lr = 1e-3;
    for (int i = 0; i < 40; ++i) lr = plateau_update(s, i % 2 == 0 ? 0.1 * i : -100.0, lr);
    CHECK(lr == 1e-3);
  }
  SUBCASE("non-finite metric") {
    PlateauScheduler s;
    CHECK_THROWS_AS(plateau_update(s, std::nan(""), 1.0), InvalidArgument);
  }
  PlateauScheduler bad;
  bad.decay_factor = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("mlp save and load round trip") {
  RngStream rng(8);
  const MlpSpec spec = make_spec({3, 5, 2}, 0.1);
  const auto p = init_xavier_uniform(spec, rng);
  const auto dir = std::filesystem::temp_directory_path() / "latentid_mlp_roundtrip";
  std::filesystem::remove_all(dir);
  save_mlp(dir, spec, p);
  const auto [spec2, p2] = load_mlp(dir);
  CHECK(spec2 == spec);
  REQUIRE(p2.layers.size() == p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    CHECK(p2.layers[l].weight == p.layers[l].weight);
    CHECK(p2.layers[l].bias == p.layers[l].bias);
  }
  std::filesystem::remove_all(dir);
}
