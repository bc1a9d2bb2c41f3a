#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "rollforge/checkpoint.hpp"
#include "rollforge/nn.hpp"

using namespace rollforge;
using namespace rollforge::nn;

namespace {

// Tiny stack: embedding-free regression trunk used for substrate checks.
template <class S>
struct TinyModel {
  ParamStore<S> ps;
  Linear<S> in;
  TransformerBlock<S> block1, block2;
  LayerNorm<S> ln_f;
  Linear<S> out;

  TinyModel(int d_in, int dim, int d_out, uint64_t seed) {
    Rng rng(seed);
    in.setup("in", d_in, dim, ps, rng);
    block1.setup("b1", dim, 2, dim * 4, ps, rng);
    block2.setup("b2", dim, 2, dim * 4, ps, rng);
    ln_f.setup("lnf", dim, ps);
    out.setup("out", dim, d_out, ps, rng);
  }

  Mat<S> forward(const Mat<S>& x) {
    return out.forward(ln_f.forward(block2.forward(block1.forward(in.forward(x)))));
  }

  Mat<S> backward(const Mat<S>& dy) {
    return in.backward(block1.backward(block2.backward(ln_f.backward(out.backward(dy)))));
  }
};

template <class S>
Mat<S> random_mat(int r, int c, Rng& rng, double scale = 1.0) {
  Mat<S> m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = static_cast<S>(rng.normal(0, scale));
  return m;
}

}  // namespace

TEST_CASE("dense layer with zero weights broadcasts the bias") {
  ParamStore<float> ps;
  Rng rng(1);
  Linear<float> lin;
  lin.setup("lin", 4, 3, ps, rng);
  lin.weight().w.setZero();
  lin.bias().w.col(0) << 1.0f, -2.0f, 0.5f;
  const Mat<float> x = random_mat<float>(5, 4, rng);
  const Mat<float> y = lin.apply(x);
  for (int r = 0; r < 5; ++r) {
    CHECK(y(r, 0) == doctest::Approx(1.0));
    CHECK(y(r, 1) == doctest::Approx(-2.0));
    CHECK(y(r, 2) == doctest::Approx(0.5));
  }
}

TEST_CASE("linear backward maps dy through the transposed weight") {
  ParamStore<double> ps;
  Rng rng(2);
  Linear<double> lin;
  lin.setup("lin", 3, 2, ps, rng, 0.5);
  const Mat<double> x = random_mat<double>(4, 3, rng);
  lin.forward(x);
  const Mat<double> dy = random_mat<double>(4, 2, rng);
  const Mat<double> dx = lin.backward(dy);
  const Mat<double> expect = dy * lin.weight().w;
  CHECK((dx - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero output grad yields zero parameter grads") {
  ParamStore<double> ps;
  Rng rng(3);
  Linear<double> lin;
  lin.setup("lin", 3, 2, ps, rng, 0.5);
  lin.forward(random_mat<double>(4, 3, rng));
  Mat<double> dy;
  dy.setZero(4, 2);
  lin.backward(dy);
  CHECK(lin.weight().g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward without a fresh cache is rejected") {
  ParamStore<double> ps;
  Rng rng(4);
  Linear<double> lin;
  lin.setup("lin", 3, 2, ps, rng);
  Mat<double> dy = random_mat<double>(4, 2, rng);
  CHECK_THROWS_AS(lin.backward(dy), std::logic_error);
  lin.forward(random_mat<double>(4, 3, rng));
  lin.backward(dy);
  CHECK_THROWS_AS(lin.backward(dy), std::logic_error);
}

TEST_CASE("shape mismatch names the offending layer") {
  ParamStore<double> ps;
  Rng rng(4);
  Linear<double> lin;
  lin.setup("trunk.fc1", 3, 2, ps, rng);
  try {
    lin.apply(random_mat<double>(2, 5, rng));
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("trunk.fc1") != std::string::npos);
  }
}

TEST_CASE("layer norm output has zero mean and unit variance per position") {
  ParamStore<float> ps;
  LayerNorm<float> ln;
  ln.setup("ln", 16, ps);
  Rng rng(5);
  const Mat<float> x = random_mat<float>(6, 16, rng, 3.0);
  const Mat<float> y = ln.apply(x);
  for (int r = 0; r < 6; ++r) {
    CHECK(std::abs(y.row(r).mean()) < 1e-6);
    const float var = (y.row(r).array() - y.row(r).mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("causal attention output ignores future positions") {
  ParamStore<float> ps;
  Rng rng(6);
  CausalSelfAttention<float> attn;
  attn.setup("attn", 16, 4, ps, rng);
  Mat<float> x = random_mat<float>(8, 16, rng);
  const Mat<float> y1 = attn.forward(x);
  // modify tokens after position 3; outputs at <= 3 must be unchanged
  for (int r = 4; r < 8; ++r) x.row(r).setConstant(9.0f);
  const Mat<float> y2 = attn.forward(x);
  for (int r = 0; r <= 3; ++r)
    CHECK((y1.row(r) - y2.row(r)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((y1.row(7) - y2.row(7)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("causal mask blocks gradient flow from past outputs to future inputs") {
  ParamStore<double> ps;
  Rng rng(7);
  CausalSelfAttention<double> attn;
  attn.setup("attn", 8, 2, ps, rng);
  const Mat<double> x = random_mat<double>(5, 8, rng);
  attn.forward(x);
  Mat<double> dy;
  dy.setZero(5, 8);
  dy.row(2).setOnes();  // loss depends only on output position 2
  const Mat<double> dx = attn.backward(dy);
  for (int r = 3; r < 5; ++r) CHECK(dx.row(r).cwiseAbs().maxCoeff() == 0.0);
  CHECK(dx.row(0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("softmax rows sum to one and losses are non-negative") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Vec<double> logits(7);
    for (int i = 0; i < 7; ++i) logits(i) = rng.normal(0, 5);
    const Vec<double> p = softmax(logits);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.minCoeff() >= 0.0);
    const double ce = softmax_cross_entropy<double>(logits, 3, nullptr);
    CHECK(ce >= 0.0);
    double dl = 0;
    const double bce = binary_cross_entropy_with_logit(rng.normal(), 1.0, &dl);
    CHECK(bce >= 0.0);
  }
}

TEST_CASE("full stack analytic gradients match central finite differences") {
  TinyModel<double> model(6, 16, 4, 99);
  Rng rng(10);
  const Mat<double> x = random_mat<double>(7, 6, rng);
  Mat<double> target = random_mat<double>(7, 4, rng);

  auto loss_fn = [&]() {
    const Mat<double> y = model.forward(x);
    return 0.5 * (y - target).squaredNorm();
  };
  auto grad_fn = [&]() {
    model.ps.zero_grads();
    const Mat<double> y = model.forward(x);
    model.backward(y - target);
  };
  const auto report = grad_check(model.ps, loss_fn, grad_fn, 4, 1e-5, 1e-3, 7777);
  INFO("worst block: ", report.worst_block, " rel ", report.worst_rel_error);
  CHECK(report.ok);
  CHECK(report.worst_rel_error < 1e-3);
}

TEST_CASE("grad_check flags a corrupted backward and names the block") {
  TinyModel<double> model(4, 8, 2, 123);
  Rng rng(11);
  const Mat<double> x = random_mat<double>(3, 4, rng);
  const Mat<double> target = random_mat<double>(3, 2, rng);
  auto loss_fn = [&]() {
    const Mat<double> y = model.forward(x);
    return 0.5 * (y - target).squaredNorm();
  };
  auto grad_fn = [&]() {
    model.ps.zero_grads();
    const Mat<double> y = model.forward(x);
    model.backward(y - target);
    model.ps.find("b1.attn.q.w")->g *= 2.0;  // deliberate corruption
  };
  const auto report = grad_check(model.ps, loss_fn, grad_fn, 6, 1e-5, 1e-3, 42);
  CHECK_FALSE(report.ok);
  bool named = false;
  for (const auto& b : report.blocks)
    if (b.name == "b1.attn.q.w" && b.max_rel_error > 1e-3) named = true;
  CHECK(named);

  // infinite tolerance always passes
  const auto loose =
      grad_check(model.ps, loss_fn, grad_fn, 2, 1e-5,
                 std::numeric_limits<double>::infinity(), 42);
  CHECK(loose.ok);
}

TEST_CASE("optimizer leaves parameters unchanged on zero grads") {
  ParamStore<float> ps;
  Rng rng(12);
  Linear<float> lin;
  lin.setup("lin", 3, 3, ps, rng, 0.1);
  const Mat<float> before = lin.weight().w;
  Adam<float> opt;
  ps.zero_grads();
  opt.step(ps);
  CHECK((lin.weight().w - before).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("constant gradients drive bias-corrected steps of size lr") {
  // closed form: with g constant, m_hat = g and v_hat = g^2, so each update
  // moves by lr * g / (|g| + eps) ~= lr * sign(g)
  ParamStore<double> ps;
  Param<double> p;
  p.setup("p", 1, 1);
  ps.add(&p);
  AdamConfig cfg;
  cfg.lr = 0.01;
  Adam<double> opt(cfg);
  const double g = 0.37;
  double prev = p.w(0, 0);
  for (int t = 1; t <= 25; ++t) {
    p.g(0, 0) = g;
    opt.step(ps);
    const double delta = prev - p.w(0, 0);
    const double expect = cfg.lr * g / (std::abs(g) + cfg.eps);
    CHECK(delta == doctest::Approx(expect).epsilon(1e-9));
    prev = p.w(0, 0);
  }
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  auto run = [](uint64_t seed) {
    TinyModel<float> model(4, 8, 2, seed);
    Rng rng(seed + 1);
    const Mat<float> x = random_mat<float>(6, 4, rng);
    const Mat<float> t = random_mat<float>(6, 2, rng);
    Adam<float> opt;
    for (int step = 0; step < 50; ++step) {
      model.ps.zero_grads();
      const Mat<float> y = model.forward(x);
      model.backward(y - t);
      opt.step(model.ps);
    }
    std::vector<float> flat;
    for (const auto* p : model.ps.blocks())
      flat.insert(flat.end(), p->w.data(), p->w.data() + p->count());
    return flat;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("two-layer model memorizes 32 samples within 2000 steps") {
  TinyModel<float> model(8, 32, 4, 2024);
  Rng rng(33);
  const Mat<float> x = random_mat<float>(32, 8, rng);
  const Mat<float> t = random_mat<float>(32, 4, rng, 0.5);
  AdamConfig cfg;
  cfg.lr = 3e-3;
  Adam<float> opt(cfg);
  float loss = 1e9;
  for (int step = 0; step < 2000; ++step) {
    model.ps.zero_grads();
    const Mat<float> y = model.forward(x);
    const Mat<float> diff = y - t;
    loss = 0.5f * diff.squaredNorm() / 32.0f;
    if (loss < 1e-2f) break;
    model.backward(diff / 32.0f);
    opt.step(model.ps);
  }
  CHECK(loss < 1e-2f);
}

TEST_CASE("incremental attention matches the full forward pass") {
  ParamStore<float> ps;
  Rng rng(14);
  TransformerBlock<float> block;
  block.setup("b", 16, 4, 64, ps, rng);
  const Mat<float> x = random_mat<float>(9, 16, rng);
  const Mat<float> full = block.forward(x);
  KvCache<float> cache;
  for (int r = 0; r < 9; ++r) {
    const Vec<float> row = block.apply_one(x.row(r).transpose(), cache);
    CHECK((row.transpose() - full.row(r)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  TinyModel<float> a(4, 8, 2, 77);
  TinyModel<float> b(4, 8, 2, 78);
  const auto path =
      (std::filesystem::temp_directory_path() / "rollforge_ckpt_test.bin").string();
  save_checkpoint(a.ps, path);
  load_checkpoint(b.ps, path);
  for (size_t i = 0; i < a.ps.blocks().size(); ++i) {
    const auto* pa = a.ps.blocks()[i];
    const auto* pb = b.ps.blocks()[i];
    CHECK(pa->w == pb->w);
  }
  // reject mismatched layouts
  TinyModel<float> c(4, 8, 3, 79);
  CHECK_THROWS_AS(load_checkpoint(c.ps, path), std::invalid_argument);
  std::filesystem::remove(path);
}
