#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "artic/num/checkpoint.hpp"
#include "artic/num/grad_check.hpp"
#include "artic/num/layers.hpp"
#include "artic/num/recurrent.hpp"
#include "artic/num/rng.hpp"
#include "artic/num/tape.hpp"

using namespace artic;
using namespace artic::num;

namespace {

MatX random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  MatX m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------------- affine

TEST_CASE("affine: identity weights and zero bias pass input through") {
  MatX w = MatX::Identity(2, 2);
  VecX x(2), b = VecX::Zero(2);
  x << 1, 2;
  VecX y = affine(w, x, b);
  CHECK(y(0) == doctest::Approx(1.0));
  CHECK(y(1) == doctest::Approx(2.0));
}

TEST_CASE("affine: zero weights return the bias for any input") {
  MatX w = MatX::Zero(1, 3);
  VecX b(1);
  b << 3;
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(trial);
    VecX x = random_mat(rng, 3, 1, 10.0);
    CHECK(affine(w, x, b)(0) == doctest::Approx(3.0));
  }
}

TEST_CASE("affine: random 3x2 case matches explicit dot products") {
  Rng rng(7);
  MatX w = random_mat(rng, 3, 2);
  VecX x = random_mat(rng, 2, 1);
  VecX b = random_mat(rng, 3, 1);
  VecX y = affine(w, x, b);
  for (int o = 0; o < 3; ++o) {
    double expect = b(o);
    for (int i = 0; i < 2; ++i) expect += w(o, i) * x(i);
    CHECK(y(o) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("affine: shape mismatch raises a dimension error") {
  CHECK_THROWS_AS(affine(MatX::Zero(2, 3), VecX::Zero(2), VecX::Zero(2)), DimensionError);
}

// --------------------------------------------------------------------- softmax

TEST_CASE("softmax: symmetric inputs give the uniform distribution") {
  VecX x = VecX::Zero(3);
  VecX y = softmax(x);
  for (int i = 0; i < 3; ++i) CHECK(y(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  VecX two(2);
  two << 41.5, 41.5;
  VecX y2 = softmax(two);
  CHECK(y2(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(y2(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax: [1,2,3] matches the exp-normalize closed form") {
  VecX x(3);
  x << 1, 2, 3;
  VecX y = softmax(x);
  CHECK(y(0) == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(0.24472847105479764).epsilon(1e-12));
  CHECK(y(2) == doctest::Approx(0.66524095577482190).epsilon(1e-12));
}

TEST_CASE("softmax: outputs sum to one, shift-invariant, permutation-equivariant") {
  for (int seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    int n = 1 + static_cast<int>(rng.uniform_int(8));
    VecX x = random_mat(rng, n, 1, 5.0);
    VecX y = softmax(x);
    CHECK(std::abs(y.sum() - 1.0) < 1e-9);
    CHECK(y.minCoeff() > 0.0);

    VecX shifted = softmax(VecX(x.array() + rng.uniform(-20.0, 20.0)));
    CHECK((shifted - y).lpNorm<Eigen::Infinity>() < 1e-9);

    if (n >= 2) {
      VecX xp = x;
      std::swap(xp(0), xp(n - 1));
      VecX yp = softmax(xp);
      CHECK(yp(0) == doctest::Approx(y(n - 1)).epsilon(1e-12));
      CHECK(yp(n - 1) == doctest::Approx(y(0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("softmax: empty input raises a dimension error") {
  CHECK_THROWS_AS(softmax(VecX()), DimensionError);
}

// ------------------------------------------------------------------- lstm cell

TEST_CASE("lstm_cell_step: zero parameters and state give zero hidden") {
  LstmCellParams p{MatX::Zero(4, 1), MatX::Zero(4, 1), VecX::Zero(4)};
  LstmCellState s{VecX::Zero(1), VecX::Zero(1)};
  VecX x = VecX::Zero(1);
  auto out = lstm_cell_step(x, s, p);
  CHECK(out.hidden(0) == doctest::Approx(0.0));
  CHECK(out.cell(0) == doctest::Approx(0.0));
}

TEST_CASE("lstm_cell_step: hidden stays strictly inside (-1, 1)") {
  for (int trial = 0; trial < 1000; ++trial) {
    Rng rng(trial);
    int H = 1 + static_cast<int>(rng.uniform_int(4));
    int I = 1 + static_cast<int>(rng.uniform_int(4));
    LstmCellParams p{random_mat(rng, 4 * H, I, 3.0), random_mat(rng, 4 * H, H, 3.0),
                     random_mat(rng, 4 * H, 1, 3.0)};
    LstmCellState s{random_mat(rng, H, 1, 2.0), random_mat(rng, H, 1, 2.0)};
    VecX x = random_mat(rng, I, 1, 3.0);
    auto out = lstm_cell_step(x, s, p);
    CHECK(out.hidden.lpNorm<Eigen::Infinity>() < 1.0);
  }
}

TEST_CASE("lstm_cell_step: single unit matches hand-computed gate arithmetic") {
  LstmCellParams p;
  p.w_ih = MatX(4, 1);
  p.w_ih << 0.1, 0.2, 0.3, 0.4;
  p.w_hh = MatX(4, 1);
  p.w_hh << -0.5, 0.6, -0.7, 0.8;
  p.bias = VecX(4);
  p.bias << 0.01, 0.02, 0.03, 0.04;
  const double x = 0.5, h0 = 0.3, c0 = -0.2;

  const double gi = sigma(0.1 * x - 0.5 * h0 + 0.01);
  const double gf = sigma(0.2 * x + 0.6 * h0 + 0.02);
  const double gg = std::tanh(0.3 * x - 0.7 * h0 + 0.03);
  const double go = sigma(0.4 * x + 0.8 * h0 + 0.04);
  const double c1 = gf * c0 + gi * gg;
  const double h1 = go * std::tanh(c1);

  VecX xv(1), hv(1), cv(1);
  xv << x;
  hv << h0;
  cv << c0;
  auto out = lstm_cell_step(xv, {hv, cv}, p);
  CHECK(out.cell(0) == doctest::Approx(c1).epsilon(1e-14));
  CHECK(out.hidden(0) == doctest::Approx(h1).epsilon(1e-14));
}

TEST_CASE("lstm_cell_step: dimension mismatch raises") {
  LstmCellParams p{MatX::Zero(4, 2), MatX::Zero(4, 1), VecX::Zero(4)};
  LstmCellState s{VecX::Zero(1), VecX::Zero(1)};
  CHECK_THROWS_AS(lstm_cell_step(VecX::Zero(3), s, p), DimensionError);
}

// ----------------------------------------------------------------------- blstm

namespace {

// Reference BLSTM assembled from single cell steps.
MatX blstm_reference(const MatX& xs, const BlstmParams& p) {
  const Eigen::Index T = xs.cols(), H = p.fw.w_hh.cols();
  MatX out(2 * H, T);
  LstmCellState s{VecX::Zero(H), VecX::Zero(H)};
  for (Eigen::Index t = 0; t < T; ++t) {
    s = lstm_cell_step(xs.col(t), s, p.fw);
    out.col(t).head(H) = s.hidden;
  }
  s = {VecX::Zero(H), VecX::Zero(H)};
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    s = lstm_cell_step(xs.col(t), s, p.bw);
    out.col(t).tail(H) = s.hidden;
  }
  return out;
}

BlstmParams random_blstm(Rng& rng, int I, int H, bool tied) {
  BlstmParams p;
  p.fw = {random_mat(rng, 4 * H, I), random_mat(rng, 4 * H, H), random_mat(rng, 4 * H, 1)};
  p.bw = tied ? p.fw
              : LstmCellParams{random_mat(rng, 4 * H, I), random_mat(rng, 4 * H, H),
                               random_mat(rng, 4 * H, 1)};
  return p;
}

}  // namespace

TEST_CASE("blstm_layer: length-1 input gives one output of width 2H") {
  Rng rng(3);
  auto p = random_blstm(rng, 2, 3, false);
  MatX xs = random_mat(rng, 2, 1);
  MatX out = blstm_layer(xs, p);
  CHECK(out.rows() == 6);
  CHECK(out.cols() == 1);
}

TEST_CASE("blstm_layer: matches the per-step composition and preserves length") {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    int I = 1 + static_cast<int>(rng.uniform_int(3));
    int H = 1 + static_cast<int>(rng.uniform_int(3));
    int T = 1 + static_cast<int>(rng.uniform_int(6));
    auto p = random_blstm(rng, I, H, false);
    MatX xs = random_mat(rng, I, T);
    MatX out = blstm_layer(xs, p);
    CHECK(out.cols() == T);
    CHECK(out.rows() == 2 * H);
    MatX ref = blstm_reference(xs, p);
    CHECK((out - ref).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("blstm_layer: palindromic input with tied parameters is reversal-half-swap symmetric") {
  Rng rng(11);
  const int I = 2, H = 2;
  auto p = random_blstm(rng, I, H, true);
  MatX xs(I, 3);
  xs.col(0) = random_mat(rng, I, 1);
  xs.col(1) = random_mat(rng, I, 1);
  xs.col(2) = xs.col(0);
  MatX out = blstm_layer(xs, p);
  for (int t = 0; t < 3; ++t) {
    VecX swapped(2 * H);
    swapped.head(H) = out.col(2 - t).tail(H);
    swapped.tail(H) = out.col(2 - t).head(H);
    CHECK((out.col(t) - swapped).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("blstm_layer: reversing the input reverses the output with halves swapped") {
  Rng rng(12);
  const int I = 3, H = 2, T = 5;
  auto p = random_blstm(rng, I, H, true);
  MatX xs = random_mat(rng, I, T);
  MatX rev = xs.rowwise().reverse();
  MatX a = blstm_layer(xs, p);
  MatX b = blstm_layer(rev, p);
  for (int t = 0; t < T; ++t) {
    VecX swapped(2 * H);
    swapped.head(H) = a.col(T - 1 - t).tail(H);
    swapped.tail(H) = a.col(T - 1 - t).head(H);
    CHECK((b.col(t) - swapped).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("blstm_layer: empty sequence raises") {
  Rng rng(1);
  auto p = random_blstm(rng, 2, 2, false);
  CHECK_THROWS_AS(blstm_layer(MatX(2, 0), p), DimensionError);
}

// ---------------------------------------------------------------------- conv1d

TEST_CASE("conv1d: width-1 identity kernel passes input through") {
  Rng rng(5);
  MatX xs = random_mat(rng, 6, 3);
  TensorD kernel({1, 3, 3});
  kernel.view2d(2) = MatX::Identity(3, 3);
  MatX y = conv1d(xs, kernel);
  CHECK((y - xs).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("conv1d: width-3 averaging kernel on constant input") {
  MatX xs = MatX::Constant(5, 1, 3.0);
  TensorD kernel({3, 1, 1});
  kernel.data().setConstant(1.0 / 3.0);
  MatX y = conv1d(xs, kernel);
  // interior frames: full window average; edges see one zero-padded slot
  for (int t = 1; t < 4; ++t) CHECK(y(t, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(y(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(y(4, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("conv1d: agrees exactly with the naive triple-loop reference") {
  for (int seed = 0; seed < 30; ++seed) {
    Rng rng(400 + seed);
    const int T = 1 + static_cast<int>(rng.uniform_int(16));
    const int C = 1 + static_cast<int>(rng.uniform_int(4));
    const int Co = 1 + static_cast<int>(rng.uniform_int(4));
    const int K = 1 + 2 * static_cast<int>(rng.uniform_int(3));  // 1, 3, 5
    MatX xs = random_mat(rng, T, C);
    TensorD kernel({static_cast<std::size_t>(K), static_cast<std::size_t>(C),
                    static_cast<std::size_t>(Co)});
    for (Eigen::Index i = 0; i < kernel.data().size(); ++i)
      kernel.data()(i) = rng.uniform(-1.0, 1.0);

    MatX y = conv1d(xs, kernel);
    CHECK(y.rows() == T);
    CHECK(y.cols() == Co);

    const int off = (K - 1) / 2;
    auto kval = [&](int k, int ci, int co) {
      return kernel.data()(k + K * (ci + C * co));
    };
    for (int t = 0; t < T; ++t)
      for (int co = 0; co < Co; ++co) {
        double acc = 0.0;
        for (int k = 0; k < K; ++k)
          for (int ci = 0; ci < C; ++ci) {
            int src = t + k - off;
            if (src < 0 || src >= T) continue;
            acc += kval(k, ci, co) * xs(src, ci);
          }
        CHECK(std::abs(y(t, co) - acc) < 1e-12);
      }
  }
}

TEST_CASE("conv1d: even kernel width is a configuration error") {
  TensorD kernel({2, 1, 1});
  CHECK_THROWS_AS(conv1d(MatX::Zero(4, 1), kernel), ConfigError);
}

// ------------------------------------------------------------------- batchnorm

TEST_CASE("batchnorm1d: standardized input with unit gamma passes through") {
  Rng rng(21);
  MatX xs = random_mat(rng, 50, 3);
  // standardize per channel first
  for (int c = 0; c < 3; ++c) {
    double mu = xs.col(c).mean();
    double sd = std::sqrt((xs.col(c).array() - mu).square().mean());
    xs.col(c) = (xs.col(c).array() - mu) / sd;
  }
  MatX y = batchnorm1d(xs, VecX::Ones(3), VecX::Zero(3), BatchNormMode::kTrain);
  CHECK((y - xs).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("batchnorm1d: constant channel collapses to beta") {
  MatX xs = MatX::Constant(4, 2, 7.5);
  VecX beta(2);
  beta << -1.0, 2.0;
  MatX y = batchnorm1d(xs, VecX::Ones(2), beta, BatchNormMode::kTrain);
  for (int t = 0; t < 4; ++t) {
    CHECK(y(t, 0) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(y(t, 1) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("batchnorm1d: two-frame case matches hand computation") {
  MatX xs(2, 1);
  xs << 1.0, 3.0;
  VecX gamma(1), beta(1);
  gamma << 2.0;
  beta << 0.5;
  // mean 2, population var 1 -> xhat = [-1, 1]
  MatX y = batchnorm1d(xs, gamma, beta, BatchNormMode::kTrain);
  CHECK(y(0, 0) == doctest::Approx(0.5 - 2.0).epsilon(1e-12));
  CHECK(y(1, 0) == doctest::Approx(0.5 + 2.0).epsilon(1e-12));
}

TEST_CASE("batchnorm1d: single frame in training mode raises") {
  CHECK_THROWS_AS(batchnorm1d(MatX::Zero(1, 2), VecX::Ones(2), VecX::Zero(2),
                              BatchNormMode::kTrain),
                  DimensionError);
}

TEST_CASE("batchnorm1d: inference mode uses running statistics") {
  RunningStats<double> stats;
  stats.init(1);
  Rng rng(31);
  for (int pass = 0; pass < 40; ++pass) {
    MatX xs = MatX::NullaryExpr(64, 1, [&](Eigen::Index, Eigen::Index) {
      return 4.0 + 2.0 * rng.normal();
    });
    batchnorm1d(xs, VecX::Ones(1), VecX::Zero(1), BatchNormMode::kTrain, &stats);
  }
  CHECK(stats.mean(0) == doctest::Approx(4.0).epsilon(0.15));
  CHECK(stats.var(0) == doctest::Approx(4.0).epsilon(0.25));
  MatX probe = MatX::Constant(3, 1, 4.0);
  MatX y = batchnorm1d(probe, VecX::Ones(1), VecX::Zero(1), BatchNormMode::kInfer, &stats);
  CHECK(std::abs(y(0, 0)) < 0.2);
}

// ------------------------------------------------------------------ grad check

namespace {

// Loss: sum(P .* f(params)) with a fixed random projection P so every output
// entry gets a gradient.
template <typename BuildFn>
double projected_loss(ParameterStoreD& ps, BuildFn&& build, bool with_grad, const MatX& proj) {
  Tape<double> tape;
  Var<double> out = build(tape, ps);
  auto loss = sum_all(cmul(out, tape.constant(proj)));
  if (with_grad) {
    tape.backward(loss);
    tape.accumulate_param_grads();
  }
  return loss.scalar();
}

}  // namespace

TEST_CASE("grad_check: quadratic loss on an affine layer is tight") {
  Rng rng(55);
  ParameterStoreD ps;
  ps.create_uniform("w", {3, 4}, rng, 0.7);
  ps.create_uniform("b", {3}, rng, 0.7);
  MatX x = random_mat(rng, 4, 2);
  MatX target = random_mat(rng, 3, 2);

  auto loss_fn = [&](bool with_grad) {
    Tape<double> tape;
    auto w = tape.param(ps, "w");
    auto b = tape.param(ps, "b");
    auto pred = affine(w, tape.constant(x), b);
    auto diff = pred - tape.constant(target);
    auto loss = sum_all(cmul(diff, diff));
    if (with_grad) {
      tape.backward(loss);
      tape.accumulate_param_grads();
    }
    return loss.scalar();
  };
  auto report = grad_check(loss_fn, ps, 1e-5);
  CHECK(report.max_rel_error < 1e-7);
}

TEST_CASE("grad_check: corrupted gradient is detected") {
  Rng rng(56);
  ParameterStoreD ps;
  ps.create_uniform("w", {2, 2}, rng, 0.7);
  MatX x = random_mat(rng, 2, 1);
  auto loss_fn = [&](bool with_grad) {
    Tape<double> tape;
    auto w = tape.param(ps, "w");
    auto pred = w * tape.constant(x);
    auto loss = sum_all(cmul(pred, pred));
    if (with_grad) {
      tape.backward(loss);
      tape.accumulate_param_grads();
      ps.grad("w").data()(0) += 1.0;  // fault injection
    }
    return loss.scalar();
  };
  auto report = grad_check(loss_fn, ps, 1e-5);
  CHECK(report.max_rel_error > 1e-2);
}

TEST_CASE("grad_check: non-deterministic loss raises") {
  ParameterStoreD ps;
  Rng rng(57);
  ps.create_uniform("w", {1, 1}, rng, 0.5);
  int calls = 0;
  auto loss_fn = [&](bool) { return static_cast<double>(calls++); };
  CHECK_THROWS_AS(grad_check(loss_fn, ps, 1e-5), NumericError);
}

TEST_CASE("grad_check: every layer primitive passes at tiny dims over 20 seeds") {
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(900 + seed);
    const int I = 2 + static_cast<int>(rng.uniform_int(3));
    const int H = 2 + static_cast<int>(rng.uniform_int(3));
    const int T = 2 + static_cast<int>(rng.uniform_int(5));
    MatX x = random_mat(rng, I, T);

    struct Case {
      const char* name;
      std::function<Var<double>(Tape<double>&, ParameterStoreD&)> build;
    };
    ParameterStoreD ps;
    ps.create_uniform("w", {static_cast<std::size_t>(H), static_cast<std::size_t>(I)}, rng, 0.8);
    ps.create_uniform("b", {static_cast<std::size_t>(H)}, rng, 0.8);
    ps.create_uniform("w_ih", {static_cast<std::size_t>(4 * H), static_cast<std::size_t>(I)},
                      rng, 0.8);
    ps.create_uniform("w_hh", {static_cast<std::size_t>(4 * H), static_cast<std::size_t>(H)},
                      rng, 0.8);
    ps.create_uniform("b4", {static_cast<std::size_t>(4 * H)}, rng, 0.8);
    ps.create_uniform("kernel", {3, static_cast<std::size_t>(I), static_cast<std::size_t>(H)},
                      rng, 0.8);
    ps.create_uniform("gamma", {static_cast<std::size_t>(I)}, rng, 0.8);
    ps.create_uniform("beta", {static_cast<std::size_t>(I)}, rng, 0.8);

    std::vector<Case> cases = {
        {"affine+tanh", [&](Tape<double>& t, ParameterStoreD& s) {
           return tanh_of(affine(t.param(s, "w"), t.constant(x), t.param(s, "b")));
         }},
        {"sigmoid+relu", [&](Tape<double>& t, ParameterStoreD& s) {
           auto wx = t.param(s, "w") * t.constant(x);
           return relu(sigmoid(wx) - t.constant(MatX::Constant(H, T, 0.4)));
         }},
        {"softmax", [&](Tape<double>& t, ParameterStoreD& s) {
           auto v = affine(t.param(s, "w"), t.constant(x.col(0)), t.param(s, "b"));
           return softmax_vec(v);
         }},
        {"lstm_seq fwd", [&](Tape<double>& t, ParameterStoreD& s) {
           return lstm_seq(t.param(s, "w_ih"), t.param(s, "w_hh"), t.param(s, "b4"),
                           t.constant(x), false);
         }},
        {"lstm_seq rev", [&](Tape<double>& t, ParameterStoreD& s) {
           return lstm_seq(t.param(s, "w_ih"), t.param(s, "w_hh"), t.param(s, "b4"),
                           t.constant(x), true);
         }},
        {"lstm_step", [&](Tape<double>& t, ParameterStoreD& s) {
           auto h = t.constant(MatX::Zero(H, 1));
           auto c = t.constant(MatX::Zero(H, 1));
           auto hc = lstm_step(t.param(s, "w_ih"), t.param(s, "w_hh"), t.param(s, "b4"),
                               t.constant(x.col(0)), h, c);
           auto hc2 = lstm_step(t.param(s, "w_ih"), t.param(s, "w_hh"), t.param(s, "b4"),
                                t.constant(x.col(1)), slice_rows(hc, 0, H),
                                slice_rows(hc, H, H));
           return hc2;
         }},
        {"conv1d", [&](Tape<double>& t, ParameterStoreD& s) {
           return conv1d_seq(t.constant(x), t.param_kernel(s, "kernel"), 3, t.param(s, "b"));
         }},
        {"batchnorm train", [&](Tape<double>& t, ParameterStoreD& s) {
           return batchnorm_train(t.constant(x), t.param(s, "gamma"), t.param(s, "beta"),
                                  1e-5);
         }},
        {"concat+slice", [&](Tape<double>& t, ParameterStoreD& s) {
           auto a = t.param(s, "w") * t.constant(x);
           auto b = concat_rows(a, a);
           return slice_rows(b, 1, H);
         }},
    };

    for (auto& c : cases) {
      MatX proj;
      {
        Tape<double> probe;
        auto out = c.build(probe, ps);
        proj = random_mat(rng, out.rows(), out.cols());
      }
      auto loss_fn = [&](bool with_grad) {
        return projected_loss(ps, c.build, with_grad, proj);
      };
      auto rep = grad_check(loss_fn, ps, 1e-5);
      INFO(c.name << " seed " << seed << " worst param " << rep.worst_param);
      CHECK(rep.max_rel_error < 1e-4);
      worst = std::max(worst, rep.max_rel_error);
    }
  }
  MESSAGE("layer grad-check worst relative error: " << worst);
}

// ---------------------------------------------------------------------- tensor

TEST_CASE("Tensor: shape/data length invariant is enforced") {
  CHECK_THROWS_AS(TensorD({2, 3}, VecX::Zero(5)), DimensionError);
  TensorD t({2, 3});
  CHECK(t.size() == 6);
  t.data()(5) = std::numeric_limits<double>::quiet_NaN();
  CHECK(!t.all_finite());
  CHECK_THROWS_AS(t.check_finite("probe"), NumericError);
}

TEST_CASE("ParameterStore: duplicate paths are rejected, shapes tracked") {
  ParameterStoreD ps;
  ps.create("a.w", {2, 2});
  CHECK_THROWS_AS(ps.create("a.w", {2, 2}), DimensionError);
  CHECK(ps.at("a.w").grad.shape() == ps.at("a.w").value.shape());
  CHECK(ps.scalar_count() == 4);
}

// ------------------------------------------------------------------ checkpoint

TEST_CASE("checkpoint container: round trip is exact and versioned") {
  Rng rng(77);
  ParameterStoreD ps;
  ps.create_uniform("enc.w", {3, 5}, rng, 1.0);
  ps.create_uniform("dec.b", {7}, rng, 1.0);
  ps.create("bn.running", {4}, false);
  ps.value("bn.running").data() << 0.25, -1.5, 3.75, 0.0;

  Container c;
  c.meta["epoch"] = 12;
  c.meta["valid_rmse"] = 0.12345;
  store_to_container(ps, c);

  const std::string path = (std::filesystem::temp_directory_path() / "artic_ckpt_test.bin").string();
  save_container(path, c);
  Container back = load_container(path);

  CHECK(back.meta["epoch"] == 12);
  CHECK(back.meta["valid_rmse"].get<double>() == 0.12345);
  CHECK(back.tensors.size() == 3);
  CHECK(back.tensors.at("bn.running").trainable == false);
  for (const auto& [name, item] : back.tensors) {
    const auto& orig = ps.at(name).value;
    CHECK(item.tensor.shape() == orig.shape());
    CHECK((item.tensor.data() - orig.data()).lpNorm<Eigen::Infinity>() == 0.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint container: bad magic is a data error") {
  const std::string path = (std::filesystem::temp_directory_path() / "artic_bad.bin").string();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  std::fputs("this is not a container", f);
  std::fclose(f);
  CHECK_THROWS_AS(load_container(path), DataError);
  std::filesystem::remove(path);
}
