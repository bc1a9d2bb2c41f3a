#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "rollforge/modal.hpp"
#include "rollforge/nn.hpp"
#include "rollforge/tokenizer.hpp"

namespace rollforge::lm {

struct ModelConfig {
  int vocab_size = 0;
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 256;
  int max_seq = 160;
  int state_hidden = 64;
  int action_hidden = 64;
  uint64_t seed = 1;

  void validate() const {
    if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
    if (dim <= 0 || layers <= 0 || heads <= 0 || ffn_dim <= 0 || max_seq <= 0)
      throw ConfigError("model dimensions must be positive");
    if (dim % heads != 0) throw ConfigError("dim must be divisible by heads");
  }
};

struct LossWeights {
  double text = 1.0;
  double state = 1.0;
  double action = 1.0;
  double stop = 1.0;
};

struct LossBreakdown {
  // per-modality means over this sample's answer positions
  double text = 0.0, state = 0.0, action = 0.0, stop = 0.0;
  long n_text = 0, n_state = 0, n_action = 0, n_stop = 0;
  double total = 0.0;
};

// Causal sequence model over modal elements: per-modality input embeddings
// (token table, state MLP, action MLP) plus positional and modality-tag
// embeddings, a pre-norm transformer backbone, and per-modality output heads
// (token logits, state estimate, action logits, binary stop).
template <class S>
class GroundedModel {
 public:
  explicit GroundedModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    tok_emb_.setup("embed.token", cfg_.vocab_size, cfg_.dim);
    tok_emb_.init_normal(rng, 0.02);
    pos_emb_.setup("embed.pos", cfg_.max_seq, cfg_.dim);
    pos_emb_.init_normal(rng, 0.02);
    tag_emb_.setup("embed.tag", 3, cfg_.dim);
    tag_emb_.init_normal(rng, 0.02);
    ps_.add(&tok_emb_);
    ps_.add(&pos_emb_);
    ps_.add(&tag_emb_);
    state_embed_.setup("embed.state", env::kStateDim, cfg_.state_hidden, cfg_.dim, ps_, rng);
    action_embed_.setup("embed.action", env::kNumActions, cfg_.action_hidden, cfg_.dim, ps_,
                        rng);
    blocks_.resize(cfg_.layers);
    for (int l = 0; l < cfg_.layers; ++l)
      blocks_[l].setup("block" + std::to_string(l), cfg_.dim, cfg_.heads, cfg_.ffn_dim, ps_,
                       rng);
    ln_final_.setup("ln_final", cfg_.dim, ps_);
    token_head_.setup("head.token", cfg_.dim, cfg_.vocab_size, ps_, rng);
    state_head_.setup("head.state", cfg_.dim, cfg_.state_hidden, env::kStateDim, ps_, rng);
    action_head_.setup("head.action", cfg_.dim, cfg_.action_hidden, env::kNumActions, ps_,
                       rng);
    stop_head_.setup("head.stop", cfg_.dim, 1, ps_, rng);
  }

  GroundedModel(const GroundedModel&) = delete;
  GroundedModel& operator=(const GroundedModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore<S>& params() { return ps_; }
  const nn::ParamStore<S>& params() const { return ps_; }

  // --- training-path forward/backward over a whole sequence ---

  nn::Mat<S> forward(const std::vector<ModalElement>& seq) {
    const int t = static_cast<int>(seq.size());
    if (t == 0) throw std::invalid_argument("empty sequence");
    if (t > cfg_.max_seq)
      throw std::invalid_argument("sequence length " + std::to_string(t) +
                                  " exceeds max_seq " + std::to_string(cfg_.max_seq));
    // gather per-modality inputs
    text_pos_.clear();
    state_pos_.clear();
    action_pos_.clear();
    for (int p = 0; p < t; ++p) {
      switch (seq[p].tag) {
        case Modality::Text: text_pos_.push_back(p); break;
        case Modality::State: state_pos_.push_back(p); break;
        case Modality::Action: action_pos_.push_back(p); break;
      }
    }
    nn::Mat<S> x(t, cfg_.dim);
    for (int p = 0; p < t; ++p) {
      const auto& e = seq[p];
      if (e.tag == Modality::Text) {
        if (e.token < 0 || e.token >= cfg_.vocab_size)
          throw std::invalid_argument("token id out of range");
        x.row(p) = tok_emb_.w.row(e.token);
      }
    }
    if (!state_pos_.empty()) {
      nn::Mat<S> sin(static_cast<int>(state_pos_.size()), env::kStateDim);
      for (size_t i = 0; i < state_pos_.size(); ++i)
        for (int d = 0; d < env::kStateDim; ++d)
          sin(static_cast<int>(i), d) = static_cast<S>(seq[state_pos_[i]].state.p[d]);
      const nn::Mat<S> semb = state_embed_.forward(sin);
      for (size_t i = 0; i < state_pos_.size(); ++i)
        x.row(state_pos_[i]) = semb.row(static_cast<int>(i));
    }
    if (!action_pos_.empty()) {
      nn::Mat<S> ain;
      ain.setZero(static_cast<int>(action_pos_.size()), env::kNumActions);
      for (size_t i = 0; i < action_pos_.size(); ++i) {
        const int a = seq[action_pos_[i]].action;
        if (a < 0 || a >= env::kNumActions)
          throw std::invalid_argument("action index out of range");
        ain(static_cast<int>(i), a) = S(1);
      }
      const nn::Mat<S> aemb = action_embed_.forward(ain);
      for (size_t i = 0; i < action_pos_.size(); ++i)
        x.row(action_pos_[i]) = aemb.row(static_cast<int>(i));
    }
    for (int p = 0; p < t; ++p) {
      x.row(p) += pos_emb_.w.row(p);
      x.row(p) += tag_emb_.w.row(static_cast<int>(seq[p].tag));
    }
    last_tokens_.resize(t);
    for (int p = 0; p < t; ++p) last_tokens_[p] = seq[p].tag == Modality::Text ? seq[p].token : -1;
    nn::Mat<S> h = x;
    for (auto& b : blocks_) h = b.forward(h);
    return ln_final_.forward(h);
  }

  void backward(const nn::Mat<S>& dhidden) {
    nn::Mat<S> d = ln_final_.backward(dhidden);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) d = it->backward(d);
    // embedding backward: positional/tag tables, then per-modality scatter
    for (int p = 0; p < d.rows(); ++p) {
      pos_emb_.g.row(p) += d.row(p);
    }
    for (int p : text_pos_) {
      tag_emb_.g.row(0) += d.row(p);
      tok_emb_.g.row(last_tokens_[p]) += d.row(p);
    }
    if (!state_pos_.empty()) {
      nn::Mat<S> ds(static_cast<int>(state_pos_.size()), cfg_.dim);
      for (size_t i = 0; i < state_pos_.size(); ++i) {
        tag_emb_.g.row(1) += d.row(state_pos_[i]);
        ds.row(static_cast<int>(i)) = d.row(state_pos_[i]);
      }
      state_embed_.backward(ds);
    }
    if (!action_pos_.empty()) {
      nn::Mat<S> da(static_cast<int>(action_pos_.size()), cfg_.dim);
      for (size_t i = 0; i < action_pos_.size(); ++i) {
        tag_emb_.g.row(2) += d.row(action_pos_[i]);
        da.row(static_cast<int>(i)) = d.row(action_pos_[i]);
      }
      action_embed_.backward(da);
    }
  }

  // Teacher-forced loss over the answer suffix, averaged per modality; when
  // grad_scale > 0 also accumulates d(grad_scale * total)/dparams.
  LossBreakdown sample_loss(const InstructionSample& sample, const LossWeights& w,
                            double grad_scale) {
    const auto& seq = sample.elements;
    const size_t begin = sample.answer_begin();
    if (begin == seq.size()) throw std::invalid_argument("sample has no answer positions");
    const nn::Mat<S> h = forward(seq);

    // prediction rows: element at p is predicted from hidden p-1
    std::vector<int> text_rows, state_rows, action_rows, stop_rows;
    std::vector<int> text_targets, action_targets;
    std::vector<S> stop_targets;
    nn::Mat<S> state_targets;
    {
      std::vector<std::array<S, env::kStateDim>> st;
      for (size_t p = begin; p < seq.size(); ++p) {
        const auto& e = seq[p];
        switch (e.tag) {
          case Modality::Text:
            if (sample.task == Task::Generate && e.token == text::Vocabulary::kEndOfRollout)
              continue;  // termination is supervised by the stop head
            text_rows.push_back(static_cast<int>(p) - 1);
            text_targets.push_back(e.token);
            break;
          case Modality::State: {
            state_rows.push_back(static_cast<int>(p) - 1);
            std::array<S, env::kStateDim> row;
            for (int d = 0; d < env::kStateDim; ++d) row[d] = static_cast<S>(e.state.p[d]);
            st.push_back(row);
            if (sample.task == Task::Generate) {
              // stop decision sits on the state's own position
              stop_rows.push_back(static_cast<int>(p));
              const bool is_last_state =
                  p + 2 >= seq.size();  // followed only by the <eor> terminator
              stop_targets.push_back(is_last_state ? S(1) : S(0));
            }
            break;
          }
          case Modality::Action:
            action_rows.push_back(static_cast<int>(p) - 1);
            action_targets.push_back(e.action);
            break;
        }
      }
      state_targets.resize(static_cast<int>(st.size()), env::kStateDim);
      for (size_t i = 0; i < st.size(); ++i)
        for (int d = 0; d < env::kStateDim; ++d)
          state_targets(static_cast<int>(i), d) = st[i][d];
    }

    LossBreakdown out;
    nn::Mat<S> dh;
    dh.setZero(h.rows(), h.cols());
    auto gather = [&](const std::vector<int>& rows) {
      nn::Mat<S> g(static_cast<int>(rows.size()), cfg_.dim);
      for (size_t i = 0; i < rows.size(); ++i) g.row(static_cast<int>(i)) = h.row(rows[i]);
      return g;
    };

    if (!text_rows.empty()) {
      const nn::Mat<S> logits = token_head_.forward(gather(text_rows));
      nn::Mat<S> dlogits(logits.rows(), logits.cols());
      double loss = 0;
      for (int i = 0; i < logits.rows(); ++i) {
        nn::Vec<S> dl;
        nn::Vec<S> row = logits.row(i).transpose();
        loss += nn::softmax_cross_entropy(row, text_targets[i], &dl);
        dlogits.row(i) = dl.transpose();
      }
      out.n_text = logits.rows();
      out.text = loss / out.n_text;
      if (grad_scale > 0) {
        const S c = static_cast<S>(grad_scale * w.text / out.n_text);
        const nn::Mat<S> dg = token_head_.backward(dlogits * c);
        for (size_t i = 0; i < text_rows.size(); ++i)
          dh.row(text_rows[i]) += dg.row(static_cast<int>(i));
      }
    }
    if (!state_rows.empty()) {
      const nn::Mat<S> pred = state_head_.forward(gather(state_rows));
      const nn::Mat<S> diff = pred - state_targets;
      out.n_state = pred.rows();
      out.state = diff.array().square().mean();
      if (grad_scale > 0) {
        const S c = static_cast<S>(grad_scale * w.state * 2.0 /
                                   (double(pred.rows()) * env::kStateDim));
        const nn::Mat<S> dg = state_head_.backward(diff * c);
        for (size_t i = 0; i < state_rows.size(); ++i)
          dh.row(state_rows[i]) += dg.row(static_cast<int>(i));
      }
    }
    if (!action_rows.empty()) {
      const nn::Mat<S> logits = action_head_.forward(gather(action_rows));
      nn::Mat<S> dlogits(logits.rows(), logits.cols());
      double loss = 0;
      for (int i = 0; i < logits.rows(); ++i) {
        nn::Vec<S> dl;
        nn::Vec<S> row = logits.row(i).transpose();
        loss += nn::softmax_cross_entropy(row, action_targets[i], &dl);
        dlogits.row(i) = dl.transpose();
      }
      out.n_action = logits.rows();
      out.action = loss / out.n_action;
      if (grad_scale > 0) {
        const S c = static_cast<S>(grad_scale * w.action / out.n_action);
        const nn::Mat<S> dg = action_head_.backward(dlogits * c);
        for (size_t i = 0; i < action_rows.size(); ++i)
          dh.row(action_rows[i]) += dg.row(static_cast<int>(i));
      }
    }
    if (!stop_rows.empty()) {
      const nn::Mat<S> logits = stop_head_.forward(gather(stop_rows));
      nn::Mat<S> dlogits(logits.rows(), 1);
      double loss = 0;
      for (int i = 0; i < logits.rows(); ++i) {
        S dl = S(0);
        loss += nn::binary_cross_entropy_with_logit(logits(i, 0), stop_targets[i], &dl);
        dlogits(i, 0) = dl;
      }
      out.n_stop = logits.rows();
      out.stop = loss / out.n_stop;
      if (grad_scale > 0) {
        const S c = static_cast<S>(grad_scale * w.stop / out.n_stop);
        const nn::Mat<S> dg = stop_head_.backward(dlogits * c);
        for (size_t i = 0; i < stop_rows.size(); ++i)
          dh.row(stop_rows[i]) += dg.row(static_cast<int>(i));
      }
    }

    out.total = w.text * out.text + w.state * out.state + w.action * out.action +
                w.stop * out.stop;
    if (grad_scale > 0) backward(dh);
    return out;
  }

  // --- inference path ---

  // Incremental decoder state over a frozen model.
  class Session {
   public:
    explicit Session(const GroundedModel& m) : m_(m), caches_(m.cfg_.layers) {}

    int length() const { return pos_; }

    // Feeds one element and returns the hidden state at its position.
    nn::Vec<S> append(const ModalElement& e) {
      if (pos_ >= m_.cfg_.max_seq) throw std::invalid_argument("sequence exceeds max_seq");
      nn::Vec<S> x = m_.embed_one(e, pos_);
      for (int l = 0; l < m_.cfg_.layers; ++l) x = m_.blocks_[l].apply_one(x, caches_[l]);
      ++pos_;
      return m_.ln_final_.apply_one(x);
    }

    nn::Vec<S> append_all(const std::vector<ModalElement>& elems) {
      nn::Vec<S> h;
      for (const auto& e : elems) h = append(e);
      return h;
    }

   private:
    const GroundedModel& m_;
    std::vector<nn::KvCache<S>> caches_;
    int pos_ = 0;
  };

  // Raw input embeddings (token/state/action + positional + tag), before the
  // backbone; mostly a probing surface for tests.
  nn::Mat<S> embed_only(const std::vector<ModalElement>& seq) const {
    nn::Mat<S> x(static_cast<int>(seq.size()), cfg_.dim);
    for (size_t p = 0; p < seq.size(); ++p)
      x.row(static_cast<int>(p)) = embed_one(seq[p], static_cast<int>(p)).transpose();
    return x;
  }

  // head readouts on a hidden row
  nn::Vec<S> token_logits(const nn::Vec<S>& h) const { return token_head_.apply_one(h); }
  nn::Vec<S> state_estimate(const nn::Vec<S>& h) const { return state_head_.apply_one(h); }
  nn::Vec<S> action_logits(const nn::Vec<S>& h) const { return action_head_.apply_one(h); }
  S stop_logit(const nn::Vec<S>& h) const { return stop_head_.apply_one(h)(0); }

 private:
  nn::Vec<S> embed_one(const ModalElement& e, int pos) const {
    nn::Vec<S> x(cfg_.dim);
    switch (e.tag) {
      case Modality::Text:
        if (e.token < 0 || e.token >= cfg_.vocab_size)
          throw std::invalid_argument("token id out of range");
        x = tok_emb_.w.row(e.token).transpose();
        break;
      case Modality::State: {
        nn::Vec<S> s(env::kStateDim);
        for (int d = 0; d < env::kStateDim; ++d) s(d) = static_cast<S>(e.state.p[d]);
        x = state_embed_.apply_one(s);
        break;
      }
      case Modality::Action: {
        nn::Vec<S> a;
        a.setZero(env::kNumActions);
        if (e.action < 0 || e.action >= env::kNumActions)
          throw std::invalid_argument("action index out of range");
        a(e.action) = S(1);
        x = action_embed_.apply_one(a);
        break;
      }
    }
    x += pos_emb_.w.row(pos).transpose();
    x += tag_emb_.w.row(static_cast<int>(e.tag)).transpose();
    return x;
  }

  ModelConfig cfg_;
  nn::ParamStore<S> ps_;
  nn::Param<S> tok_emb_, pos_emb_, tag_emb_;
  nn::Mlp<S> state_embed_, action_embed_;
  std::vector<nn::TransformerBlock<S>> blocks_;
  nn::LayerNorm<S> ln_final_;
  nn::Linear<S> token_head_;
  nn::Mlp<S> state_head_, action_head_;
  nn::Linear<S> stop_head_;

  // forward scratch for the embedding backward
  std::vector<int> text_pos_, state_pos_, action_pos_;
  std::vector<int> last_tokens_;
};

// --- fine-tuning ---

struct FinetuneConfig {
  int epochs = 20;
  int batch_size = 32;
  double lr = 3e-4;
  LossWeights weights;
  uint64_t seed = 1;

  void validate() const {
    if (epochs < 0 || batch_size <= 0 || lr <= 0) throw ConfigError("bad finetune config");
  }
};

struct EpochMetrics {
  int epoch = 0;
  std::array<double, 4> task_loss{};  // indexed by Task
  std::array<long, 4> task_samples{};
  double mean_loss = 0.0;
};

using EpochHook = std::function<void(int epoch, GroundedModel<float>& model)>;

std::vector<EpochMetrics> finetune(GroundedModel<float>& model,
                                   const std::vector<InstructionSample>& data,
                                   const FinetuneConfig& cfg,
                                   const EpochHook& per_epoch = nullptr);

// Held-out mean squared error of one-transition dynamics prediction and the
// copy-current-state baseline on the same transitions.
struct DynamicsEval {
  double model_mse = 0.0;
  double copy_baseline_mse = 0.0;
};
DynamicsEval evaluate_dynamics_mse(const GroundedModel<float>& model,
                                   const std::vector<env::Episode>& episodes,
                                   const text::Vocabulary& vocab, const env::EnvConfig& env_cfg,
                                   uint64_t seed);

// Schedule-driven single-state predictions and greedy explanation decode.
env::EnvState predict_next_state(const GroundedModel<float>& model, const env::EnvState& s,
                                 int action, const text::Vocabulary& vocab,
                                 const env::EnvConfig& env_cfg);
env::EnvState predict_consequence(const GroundedModel<float>& model, const env::EnvState& s0,
                                  const std::string& goal_text, const text::Vocabulary& vocab,
                                  const env::EnvConfig& env_cfg);

struct ExplainResult {
  std::string text;
  bool truncated = false;
};
ExplainResult explain_rollout(const GroundedModel<float>& model, const env::Episode& rollout,
                              const text::Vocabulary& vocab, int token_cap = 32);

env::EnvState clamp_state(const nn::Vec<float>& raw, const env::EnvConfig& cfg);

}  // namespace rollforge::lm
