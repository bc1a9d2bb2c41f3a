#pragma once

#include "rollforge/env.hpp"
#include "rollforge/nn.hpp"

namespace rollforge::rl {

struct PolicyConfig {
  int vocab_size = 0;
  int goal_dim = 64;  // goal feature width
  enum class Encoder { Bag, Transformer } encoder = Encoder::Transformer;
  int enc_layers = 2;
  int enc_heads = 2;
  int enc_ffn = 128;
  int max_goal_tokens = 48;
  int trunk_hidden = 256;  // extractor [state + goal, 256, 256], ReLU
  uint64_t seed = 1;

  void validate() const {
    if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
    if (goal_dim <= 0 || trunk_hidden <= 0 || max_goal_tokens <= 0)
      throw ConfigError("policy dimensions must be positive");
    if (encoder == Encoder::Transformer && goal_dim % enc_heads != 0)
      throw ConfigError("goal_dim must divide enc_heads");
  }
};

// Goal-conditioned network: a trainable text encoder with mean pooling feeds
// a [state ⊕ goal] trunk with a 40-way policy head and twin Q heads.
template <class S>
class PolicyNet {
 public:
  explicit PolicyNet(const PolicyConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    tok_emb_.setup("goal.token", cfg_.vocab_size, cfg_.goal_dim);
    tok_emb_.init_normal(rng, 0.02);
    ps_.add(&tok_emb_);
    if (cfg_.encoder == PolicyConfig::Encoder::Transformer) {
      pos_emb_.setup("goal.pos", cfg_.max_goal_tokens, cfg_.goal_dim);
      pos_emb_.init_normal(rng, 0.02);
      ps_.add(&pos_emb_);
      enc_blocks_.resize(cfg_.enc_layers);
      for (int l = 0; l < cfg_.enc_layers; ++l)
        enc_blocks_[l].setup("goal.block" + std::to_string(l), cfg_.goal_dim, cfg_.enc_heads,
                             cfg_.enc_ffn, ps_, rng);
    } else {
      bag_mlp_.setup("goal.mlp", cfg_.goal_dim, cfg_.goal_dim, cfg_.goal_dim, ps_, rng);
    }
    trunk1_.setup("trunk.fc1", env::kStateDim + cfg_.goal_dim, cfg_.trunk_hidden, ps_, rng);
    trunk2_.setup("trunk.fc2", cfg_.trunk_hidden, cfg_.trunk_hidden, ps_, rng);
    policy_head_.setup("head.policy", cfg_.trunk_hidden, env::kNumActions, ps_, rng);
    q1_head_.setup("head.q1", cfg_.trunk_hidden, env::kNumActions, ps_, rng);
    q2_head_.setup("head.q2", cfg_.trunk_hidden, env::kNumActions, ps_, rng);
  }

  PolicyNet(const PolicyNet&) = delete;
  PolicyNet& operator=(const PolicyNet&) = delete;

  const PolicyConfig& config() const { return cfg_; }
  nn::ParamStore<S>& params() { return ps_; }
  const nn::ParamStore<S>& params() const { return ps_; }

  // --- training path (one sample at a time; backward right after forward) ---

  nn::Vec<S> trunk_features(const env::EnvState& s, const std::vector<int>& goal_tokens) {
    goal_len_ = truncate_len(goal_tokens);
    if (goal_len_ == 0) throw std::invalid_argument("empty goal token sequence");
    nn::Mat<S> emb(goal_len_, cfg_.goal_dim);
    for (int i = 0; i < goal_len_; ++i) emb.row(i) = tok_emb_.w.row(goal_tokens[i]);
    goal_tokens_ = goal_tokens;
    nn::Vec<S> feature(cfg_.goal_dim);
    if (cfg_.encoder == PolicyConfig::Encoder::Transformer) {
      for (int i = 0; i < goal_len_; ++i) emb.row(i) += pos_emb_.w.row(i);
      nn::Mat<S> hcur = emb;
      for (auto& b : enc_blocks_) hcur = b.forward(hcur);
      feature = hcur.colwise().mean().transpose();
    } else {
      const nn::Vec<S> pooled = emb.colwise().mean().transpose();
      bag_in_ = pooled;
      feature = bag_mlp_.forward(pooled.transpose()).row(0).transpose();
    }
    nn::Mat<S> trunk_in(1, env::kStateDim + cfg_.goal_dim);
    for (int d = 0; d < env::kStateDim; ++d) trunk_in(0, d) = static_cast<S>(s.p[d]);
    trunk_in.row(0).tail(cfg_.goal_dim) = feature.transpose();
    h1_ = trunk1_.forward(trunk_in);
    a1_ = h1_.cwiseMax(S(0));
    h2_ = trunk2_.forward(a1_);
    a2_ = h2_.cwiseMax(S(0));
    return a2_.row(0).transpose();
  }

  // Backward from trunk-feature grad through the encoder and embeddings.
  void trunk_backward(const nn::Vec<S>& dfeat) {
    nn::Mat<S> d2 = dfeat.transpose();
    d2 = d2.cwiseProduct((h2_.array() > S(0)).template cast<S>().matrix());
    nn::Mat<S> d1 = trunk2_.backward(d2);
    d1 = d1.cwiseProduct((h1_.array() > S(0)).template cast<S>().matrix());
    const nn::Mat<S> din = trunk1_.backward(d1);
    const nn::Vec<S> dgoal = din.row(0).tail(cfg_.goal_dim).transpose();
    if (cfg_.encoder == PolicyConfig::Encoder::Transformer) {
      nn::Mat<S> dh(goal_len_, cfg_.goal_dim);
      for (int i = 0; i < goal_len_; ++i) dh.row(i) = dgoal.transpose() / S(goal_len_);
      for (auto it = enc_blocks_.rbegin(); it != enc_blocks_.rend(); ++it)
        dh = it->backward(dh);
      for (int i = 0; i < goal_len_; ++i) {
        tok_emb_.g.row(goal_tokens_[i]) += dh.row(i);
        pos_emb_.g.row(i) += dh.row(i);
      }
    } else {
      const nn::Mat<S> dpooled = bag_mlp_.backward(dgoal.transpose());
      for (int i = 0; i < goal_len_; ++i)
        tok_emb_.g.row(goal_tokens_[i]) += dpooled.row(0) / S(goal_len_);
    }
  }

  nn::Vec<S> policy_logits_cached(const nn::Vec<S>& feat) {
    return policy_head_.forward(feat.transpose()).row(0).transpose();
  }
  nn::Vec<S> policy_backward(const nn::Vec<S>& dlogits) {
    return policy_head_.backward(dlogits.transpose()).row(0).transpose();
  }
  nn::Vec<S> q1_cached(const nn::Vec<S>& feat) {
    return q1_head_.forward(feat.transpose()).row(0).transpose();
  }
  nn::Vec<S> q2_cached(const nn::Vec<S>& feat) {
    return q2_head_.forward(feat.transpose()).row(0).transpose();
  }
  nn::Vec<S> q_backward(const nn::Vec<S>& dq1, const nn::Vec<S>& dq2) {
    nn::Vec<S> d = q1_head_.backward(dq1.transpose()).row(0).transpose();
    d += q2_head_.backward(dq2.transpose()).row(0).transpose();
    return d;
  }

  // --- inference path (const) ---

  nn::Vec<S> goal_feature(const std::vector<int>& goal_tokens) const {
    const int len = truncate_len(goal_tokens);
    if (len == 0) throw std::invalid_argument("empty goal token sequence");
    nn::Mat<S> emb(len, cfg_.goal_dim);
    for (int i = 0; i < len; ++i) emb.row(i) = tok_emb_.w.row(goal_tokens[i]);
    if (cfg_.encoder == PolicyConfig::Encoder::Transformer) {
      for (int i = 0; i < len; ++i) emb.row(i) += pos_emb_.w.row(i);
      // run the causal blocks position-by-position over a throwaway cache
      nn::Mat<S> h(len, cfg_.goal_dim);
      std::vector<nn::KvCache<S>> caches(enc_blocks_.size());
      for (int i = 0; i < len; ++i) {
        nn::Vec<S> x = emb.row(i).transpose();
        for (size_t l = 0; l < enc_blocks_.size(); ++l) x = enc_blocks_[l].apply_one(x, caches[l]);
        h.row(i) = x.transpose();
      }
      return h.colwise().mean().transpose();
    }
    const nn::Vec<S> pooled = emb.colwise().mean().transpose();
    return bag_mlp_.apply_one(pooled);
  }

  nn::Vec<S> trunk_apply(const env::EnvState& s, const nn::Vec<S>& goal_feat) const {
    nn::Vec<S> in(env::kStateDim + cfg_.goal_dim);
    for (int d = 0; d < env::kStateDim; ++d) in(d) = static_cast<S>(s.p[d]);
    in.tail(cfg_.goal_dim) = goal_feat;
    const nn::Vec<S> h1 = trunk1_.apply_one(in).cwiseMax(S(0));
    return trunk2_.apply_one(h1).cwiseMax(S(0));
  }

  nn::Vec<S> policy_logits(const env::EnvState& s, const nn::Vec<S>& goal_feat) const {
    return policy_head_.apply_one(trunk_apply(s, goal_feat));
  }
  std::pair<nn::Vec<S>, nn::Vec<S>> q_values(const env::EnvState& s,
                                             const nn::Vec<S>& goal_feat) const {
    const nn::Vec<S> f = trunk_apply(s, goal_feat);
    return {q1_head_.apply_one(f), q2_head_.apply_one(f)};
  }

 private:
  int truncate_len(const std::vector<int>& tokens) const {
    return static_cast<int>(std::min<size_t>(tokens.size(), cfg_.max_goal_tokens));
  }

  PolicyConfig cfg_;
  nn::ParamStore<S> ps_;
  nn::Param<S> tok_emb_, pos_emb_;
  std::vector<nn::TransformerBlock<S>> enc_blocks_;
  nn::Mlp<S> bag_mlp_;
  nn::Linear<S> trunk1_, trunk2_, policy_head_, q1_head_, q2_head_;

  // per-sample forward caches
  std::vector<int> goal_tokens_;
  int goal_len_ = 0;
  nn::Vec<S> bag_in_;
  nn::Mat<S> h1_, a1_, h2_, a2_;
};

}  // namespace rollforge::rl
