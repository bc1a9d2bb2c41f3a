#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "rollforge/common.hpp"

namespace rollforge::nn {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// --- Parameters ---

template <class S>
struct Param {
  std::string name;
  Mat<S> w, g, m, v;

  void setup(std::string n, int rows, int cols) {
    name = std::move(n);
    w.setZero(rows, cols);
    g.setZero(rows, cols);
    m.setZero(rows, cols);
    v.setZero(rows, cols);
  }

  void init_normal(Rng& rng, double stddev) {
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = static_cast<S>(rng.normal(0.0, stddev));
  }

  long count() const { return w.rows() * w.cols(); }
};

template <class S>
class ParamStore {
 public:
  void add(Param<S>* p) {
    for (const auto* q : blocks_)
      if (q->name == p->name)
        throw std::invalid_argument("duplicate parameter block: " + p->name);
    blocks_.push_back(p);
  }

  const std::vector<Param<S>*>& blocks() const { return blocks_; }

  Param<S>* find(const std::string& name) const {
    for (auto* p : blocks_)
      if (p->name == name) return p;
    return nullptr;
  }

  void zero_grads() {
    for (auto* p : blocks_) p->g.setZero();
  }

  long param_count() const {
    long n = 0;
    for (auto* p : blocks_) n += p->count();
    return n;
  }

  void copy_values_from(const ParamStore<S>& other) {
    if (other.blocks_.size() != blocks_.size())
      throw std::invalid_argument("param store layout mismatch");
    for (size_t i = 0; i < blocks_.size(); ++i) {
      if (blocks_[i]->name != other.blocks_[i]->name ||
          blocks_[i]->w.rows() != other.blocks_[i]->w.rows() ||
          blocks_[i]->w.cols() != other.blocks_[i]->w.cols())
        throw std::invalid_argument("param block mismatch: " + blocks_[i]->name);
      blocks_[i]->w = other.blocks_[i]->w;
    }
  }

  // Polyak averaging toward `online`: w = (1 - rate) * w + rate * w_online.
  void polyak_from(const ParamStore<S>& online, double rate) {
    for (size_t i = 0; i < blocks_.size(); ++i) {
      blocks_[i]->w = (S(1) - S(rate)) * blocks_[i]->w + S(rate) * online.blocks_[i]->w;
    }
  }

 private:
  std::vector<Param<S>*> blocks_;
};

// --- Optimizer (adaptive moments with bias correction) ---

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void set_lr(double lr) { cfg_.lr = lr; }
  long steps() const { return t_; }

  // Applies the update and clears gradients.
  void step(ParamStore<S>& ps) {
    ++t_;
    const S b1 = static_cast<S>(cfg_.beta1);
    const S b2 = static_cast<S>(cfg_.beta2);
    const S c1 = static_cast<S>(1.0 / (1.0 - std::pow(cfg_.beta1, t_)));
    const S c2 = static_cast<S>(1.0 / (1.0 - std::pow(cfg_.beta2, t_)));
    const S lr = static_cast<S>(cfg_.lr);
    const S eps = static_cast<S>(cfg_.eps);
    for (auto* p : ps.blocks()) {
      p->m = b1 * p->m + (S(1) - b1) * p->g;
      p->v = b2 * p->v + (S(1) - b2) * p->g.cwiseProduct(p->g);
      p->w.array() -=
          lr * (c1 * p->m.array()) / ((c2 * p->v.array()).sqrt() + eps);
      p->g.setZero();
    }
  }

 private:
  AdamConfig cfg_;
  long t_ = 0;
};

// --- Layers ---
// Each layer owns its parameters, registers them in a ParamStore, caches the
// forward pass for one exact backward, and offers const `apply` paths for
// inference.

template <class S>
class Linear {
 public:
  Linear() = default;

  void setup(const std::string& name, int in, int out, ParamStore<S>& ps, Rng& rng,
             double init_std = 0.02) {
    in_ = in;
    out_ = out;
    weight_.setup(name + ".w", out, in);
    bias_.setup(name + ".b", out, 1);
    weight_.init_normal(rng, init_std);
    ps.add(&weight_);
    ps.add(&bias_);
    name_ = name;
  }

  Mat<S> forward(const Mat<S>& x) {
    check_width(x);
    x_ = x;
    fresh_ = true;
    return apply(x);
  }

  Mat<S> backward(const Mat<S>& dy) {
    if (!fresh_) throw std::logic_error(name_ + ": backward without fresh forward cache");
    fresh_ = false;
    weight_.g.noalias() += dy.transpose() * x_;
    bias_.g.noalias() += dy.colwise().sum().transpose();
    return dy * weight_.w;
  }

  Mat<S> apply(const Mat<S>& x) const {
    check_width(x);
    Mat<S> y = x * weight_.w.transpose();
    y.rowwise() += bias_.w.col(0).transpose();
    return y;
  }

  Vec<S> apply_one(const Vec<S>& x) const {
    return weight_.w * x + bias_.w.col(0);
  }

  const Param<S>& weight() const { return weight_; }
  Param<S>& weight() { return weight_; }
  Param<S>& bias() { return bias_; }
  int out_dim() const { return out_; }

 private:
  void check_width(const Mat<S>& x) const {
    if (x.cols() != in_)
      throw std::invalid_argument(name_ + ": input width " + std::to_string(x.cols()) +
                                  " != " + std::to_string(in_));
  }

  std::string name_;
  int in_ = 0, out_ = 0;
  Param<S> weight_, bias_;
  Mat<S> x_;
  bool fresh_ = false;
};

// Two-layer perceptron with ReLU. Layers default to fan-in-scaled init: a
// blanket small constant squares through the stack and buries the signal.
template <class S>
class Mlp {
 public:
  void setup(const std::string& name, int in, int hidden, int out, ParamStore<S>& ps,
             Rng& rng, double init_std = -1.0) {
    l1_.setup(name + ".fc1", in, hidden, ps, rng,
              init_std > 0 ? init_std : std::sqrt(1.0 / in));
    l2_.setup(name + ".fc2", hidden, out, ps, rng,
              init_std > 0 ? init_std : std::sqrt(1.0 / hidden));
  }

  Mat<S> forward(const Mat<S>& x) {
    h_ = l1_.forward(x);
    act_ = h_.cwiseMax(S(0));
    return l2_.forward(act_);
  }

  Mat<S> backward(const Mat<S>& dy) {
    Mat<S> dh = l2_.backward(dy);
    dh = dh.cwiseProduct((h_.array() > S(0)).template cast<S>().matrix());
    return l1_.backward(dh);
  }

  Mat<S> apply(const Mat<S>& x) const { return l2_.apply(l1_.apply(x).cwiseMax(S(0))); }
  Vec<S> apply_one(const Vec<S>& x) const {
    return l2_.apply_one(l1_.apply_one(x).cwiseMax(S(0)));
  }

 private:
  Linear<S> l1_, l2_;
  Mat<S> h_, act_;
};

template <class S>
class LayerNorm {
 public:
  void setup(const std::string& name, int dim, ParamStore<S>& ps) {
    name_ = name;
    dim_ = dim;
    gamma_.setup(name + ".gamma", dim, 1);
    beta_.setup(name + ".beta", dim, 1);
    gamma_.w.setOnes();
    ps.add(&gamma_);
    ps.add(&beta_);
  }

  Mat<S> forward(const Mat<S>& x) {
    xhat_.resize(x.rows(), x.cols());
    inv_std_.resize(x.rows());
    Mat<S> y(x.rows(), x.cols());
    for (int r = 0; r < x.rows(); ++r) {
      const S mu = x.row(r).mean();
      const S var = (x.row(r).array() - mu).square().mean();
      const S inv = S(1) / std::sqrt(var + S(kEps));
      inv_std_(r) = inv;
      xhat_.row(r) = (x.row(r).array() - mu) * inv;
      y.row(r) = xhat_.row(r).cwiseProduct(gamma_.w.col(0).transpose()) +
                 beta_.w.col(0).transpose();
    }
    fresh_ = true;
    return y;
  }

  Mat<S> backward(const Mat<S>& dy) {
    if (!fresh_) throw std::logic_error(name_ + ": backward without fresh forward cache");
    fresh_ = false;
    Mat<S> dx(dy.rows(), dy.cols());
    for (int r = 0; r < dy.rows(); ++r) {
      gamma_.g.col(0) += dy.row(r).cwiseProduct(xhat_.row(r)).transpose();
      beta_.g.col(0) += dy.row(r).transpose();
      const Eigen::Matrix<S, 1, Eigen::Dynamic> dxhat =
          dy.row(r).cwiseProduct(gamma_.w.col(0).transpose());
      const S mean_dxhat = dxhat.mean();
      const S mean_dxx = dxhat.cwiseProduct(xhat_.row(r)).mean();
      dx.row(r) = inv_std_(r) *
                  (dxhat.array() - mean_dxhat - xhat_.row(r).array() * mean_dxx).matrix();
    }
    return dx;
  }

  Mat<S> apply(const Mat<S>& x) const {
    Mat<S> y(x.rows(), x.cols());
    for (int r = 0; r < x.rows(); ++r) {
      const S mu = x.row(r).mean();
      const S var = (x.row(r).array() - mu).square().mean();
      const S inv = S(1) / std::sqrt(var + S(kEps));
      y.row(r) = ((x.row(r).array() - mu) * inv).matrix()
                     .cwiseProduct(gamma_.w.col(0).transpose()) +
                 beta_.w.col(0).transpose();
    }
    return y;
  }

  Vec<S> apply_one(const Vec<S>& x) const {
    const S mu = x.mean();
    const S var = (x.array() - mu).square().mean();
    const S inv = S(1) / std::sqrt(var + S(kEps));
    return ((x.array() - mu) * inv).matrix().cwiseProduct(gamma_.w.col(0)) + beta_.w.col(0);
  }

 private:
  static constexpr double kEps = 1e-5;
  std::string name_;
  int dim_ = 0;
  Param<S> gamma_, beta_;
  Mat<S> xhat_;
  Vec<S> inv_std_;
  bool fresh_ = false;
};

// Incremental key/value cache for schedule-driven decoding.
template <class S>
struct KvCache {
  Mat<S> k, v;  // grown row by row
  int len = 0;
};

template <class S>
class CausalSelfAttention {
 public:
  void setup(const std::string& name, int dim, int heads, ParamStore<S>& ps, Rng& rng) {
    if (dim % heads != 0) throw std::invalid_argument(name + ": dim must divide heads");
    name_ = name;
    dim_ = dim;
    heads_ = heads;
    dh_ = dim / heads;
    wq_.setup(name + ".q", dim, dim, ps, rng);
    wk_.setup(name + ".k", dim, dim, ps, rng);
    wv_.setup(name + ".v", dim, dim, ps, rng);
    wo_.setup(name + ".o", dim, dim, ps, rng);
  }

  Mat<S> forward(const Mat<S>& x) {
    const int t = static_cast<int>(x.rows());
    q_ = wq_.forward(x);
    k_ = wk_.forward(x);
    v_ = wv_.forward(x);
    attn_.assign(heads_, Mat<S>());
    concat_.resize(t, dim_);
    const S scale = S(1) / std::sqrt(S(dh_));
    for (int h = 0; h < heads_; ++h) {
      const auto qh = q_.middleCols(h * dh_, dh_);
      const auto kh = k_.middleCols(h * dh_, dh_);
      const auto vh = v_.middleCols(h * dh_, dh_);
      Mat<S> scores = qh * kh.transpose() * scale;
      Mat<S>& probs = attn_[h];
      probs.setZero(t, t);
      for (int r = 0; r < t; ++r) {
        // causal: only keys <= r participate
        const auto row = scores.row(r).head(r + 1);
        const S mx = row.maxCoeff();
        Eigen::Array<S, 1, Eigen::Dynamic> e = (row.array() - mx).exp();
        probs.row(r).head(r + 1) = (e / e.sum()).matrix();
      }
      concat_.middleCols(h * dh_, dh_).noalias() = probs * vh;
    }
    fresh_ = true;
    return wo_.forward(concat_);
  }

  Mat<S> backward(const Mat<S>& dy) {
    if (!fresh_) throw std::logic_error(name_ + ": backward without fresh forward cache");
    fresh_ = false;
    const int t = static_cast<int>(dy.rows());
    Mat<S> dconcat = wo_.backward(dy);
    Mat<S> dq(t, dim_), dk(t, dim_), dv(t, dim_);
    const S scale = S(1) / std::sqrt(S(dh_));
    for (int h = 0; h < heads_; ++h) {
      const auto kh = k_.middleCols(h * dh_, dh_);
      const auto vh = v_.middleCols(h * dh_, dh_);
      const auto qh = q_.middleCols(h * dh_, dh_);
      const auto dout = dconcat.middleCols(h * dh_, dh_);
      const Mat<S>& probs = attn_[h];
      Mat<S> dprobs = dout * vh.transpose();
      dv.middleCols(h * dh_, dh_).noalias() = probs.transpose() * dout;
      // softmax backward per causal row
      Mat<S> dscores;
      dscores.setZero(t, t);
      for (int r = 0; r < t; ++r) {
        const auto p = probs.row(r).head(r + 1).array();
        const auto dp = dprobs.row(r).head(r + 1).array();
        const S dot = (p * dp).sum();
        dscores.row(r).head(r + 1) = (p * (dp - dot)).matrix() * scale;
      }
      dq.middleCols(h * dh_, dh_).noalias() = dscores * kh;
      dk.middleCols(h * dh_, dh_).noalias() = dscores.transpose() * qh;
    }
    Mat<S> dx = wq_.backward(dq);
    dx += wk_.backward(dk);
    dx += wv_.backward(dv);
    return dx;
  }

  // Incremental step: appends the new position's key/value to the cache and
  // returns the attention output for that position only.
  Vec<S> apply_one(const Vec<S>& x, KvCache<S>& cache) const {
    const Vec<S> q = wq_.apply_one(x);
    const Vec<S> k = wk_.apply_one(x);
    const Vec<S> v = wv_.apply_one(x);
    if (cache.k.rows() <= cache.len) {
      const int grow = std::max(16, cache.len * 2);
      Mat<S> nk(grow, dim_), nv(grow, dim_);
      if (cache.len > 0) {
        nk.topRows(cache.len) = cache.k.topRows(cache.len);
        nv.topRows(cache.len) = cache.v.topRows(cache.len);
      }
      cache.k.swap(nk);
      cache.v.swap(nv);
    }
    cache.k.row(cache.len) = k.transpose();
    cache.v.row(cache.len) = v.transpose();
    ++cache.len;

    const S scale = S(1) / std::sqrt(S(dh_));
    Vec<S> concat(dim_);
    for (int h = 0; h < heads_; ++h) {
      const auto kh = cache.k.topRows(cache.len).middleCols(h * dh_, dh_);
      const auto vh = cache.v.topRows(cache.len).middleCols(h * dh_, dh_);
      const auto qh = q.segment(h * dh_, dh_);
      Vec<S> scores = kh * qh * scale;
      const S mx = scores.maxCoeff();
      Eigen::Array<S, Eigen::Dynamic, 1> e = (scores.array() - mx).exp();
      e /= e.sum();
      concat.segment(h * dh_, dh_) = vh.transpose() * e.matrix();
    }
    return wo_.apply_one(concat);
  }

 private:
  std::string name_;
  int dim_ = 0, heads_ = 0, dh_ = 0;
  Linear<S> wq_, wk_, wv_, wo_;
  Mat<S> q_, k_, v_, concat_;
  std::vector<Mat<S>> attn_;
  bool fresh_ = false;
};

// Pre-norm residual block: x + attn(ln1(x)), then + ffn(ln2(.)).
template <class S>
class TransformerBlock {
 public:
  void setup(const std::string& name, int dim, int heads, int ffn_dim, ParamStore<S>& ps,
             Rng& rng) {
    ln1_.setup(name + ".ln1", dim, ps);
    attn_.setup(name + ".attn", dim, heads, ps, rng);
    ln2_.setup(name + ".ln2", dim, ps);
    ffn_.setup(name + ".ffn", dim, ffn_dim, dim, ps, rng, 0.02);  // near-identity residual start
  }

  Mat<S> forward(const Mat<S>& x) {
    Mat<S> a = x + attn_.forward(ln1_.forward(x));
    Mat<S> y = a + ffn_.forward(ln2_.forward(a));
    return y;
  }

  Mat<S> backward(const Mat<S>& dy) {
    Mat<S> da = dy + ln2_.backward(ffn_.backward(dy));
    Mat<S> dx = da + ln1_.backward(attn_.backward(da));
    return dx;
  }

  Vec<S> apply_one(const Vec<S>& x, KvCache<S>& cache) const {
    Vec<S> a = x + attn_.apply_one(ln1_.apply_one(x), cache);
    return a + ffn_.apply_one(ln2_.apply_one(a));
  }

 private:
  LayerNorm<S> ln1_, ln2_;
  CausalSelfAttention<S> attn_;
  Mlp<S> ffn_;
};

// --- Losses ---

template <class S>
Vec<S> softmax(const Vec<S>& logits) {
  const S mx = logits.maxCoeff();
  Vec<S> e = (logits.array() - mx).exp();
  return e / e.sum();
}

// Returns the loss; fills dlogits (softmax - onehot) when non-null.
template <class S>
S softmax_cross_entropy(const Vec<S>& logits, int target, Vec<S>* dlogits) {
  if (target < 0 || target >= logits.size())
    throw std::invalid_argument("cross entropy target out of range");
  const S mx = logits.maxCoeff();
  const S lse = std::log((logits.array() - mx).exp().sum()) + mx;
  if (dlogits) {
    *dlogits = ((logits.array() - lse).exp()).matrix();
    (*dlogits)(target) -= S(1);
  }
  return lse - logits(target);
}

template <class S>
S binary_cross_entropy_with_logit(S logit, S target, S* dlogit) {
  // log(1 + exp(-|x|)) formulation for stability
  const S z = logit >= S(0) ? logit : -logit;
  const S loss = std::log1p(std::exp(-z)) + (logit >= S(0) ? logit * (S(1) - target)
                                                           : -logit * target);
  if (dlogit) {
    const S sig = S(1) / (S(1) + std::exp(-logit));
    *dlogit = sig - target;
  }
  return loss;
}

// --- Finite-difference gradient verification ---

struct GradCheckBlock {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  bool ok = true;
  double worst_rel_error = 0.0;
  std::string worst_block;
  std::vector<GradCheckBlock> blocks;
};

// loss_fn: () -> double, pure forward pass on fixed data.
// grad_fn: () -> void, zeroes grads then backprops the same loss once.
// Differences below `atol` count as matching: central differences bottom out
// at eps * |loss| / (2h), which swamps the relative error of near-zero
// gradient entries.
template <class S, class LossFn, class GradFn>
GradCheckReport grad_check(ParamStore<S>& ps, LossFn&& loss_fn, GradFn&& grad_fn,
                           int probes_per_block, double h, double tol, uint64_t seed,
                           double atol = 1e-7) {
  grad_fn();
  GradCheckReport report;
  Rng rng(seed);
  for (auto* block : ps.blocks()) {
    GradCheckBlock row;
    row.name = block->name;
    const long n = block->count();
    const int probes = static_cast<int>(std::min<long>(probes_per_block, n));
    for (int p = 0; p < probes; ++p) {
      const long idx = p == 0 ? 0 : static_cast<long>(rng.next_u64() % n);
      S* entry = block->w.data() + idx;
      const S saved = *entry;
      *entry = saved + static_cast<S>(h);
      const double up = loss_fn();
      *entry = saved - static_cast<S>(h);
      const double down = loss_fn();
      *entry = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = static_cast<double>(block->g.data()[idx]);
      if (std::abs(numeric - analytic) < atol) continue;
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      const double rel = std::abs(numeric - analytic) / denom;
      row.max_rel_error = std::max(row.max_rel_error, rel);
    }
    if (row.max_rel_error > report.worst_rel_error) {
      report.worst_rel_error = row.max_rel_error;
      report.worst_block = row.name;
    }
    if (row.max_rel_error > tol) report.ok = false;
    report.blocks.push_back(std::move(row));
  }
  return report;
}

}  // namespace rollforge::nn
