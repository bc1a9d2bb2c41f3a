#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rollforge/corpus.hpp"
#include "rollforge/episode_io.hpp"
#include "rollforge/evalkit.hpp"
#include "rollforge/grounded_model.hpp"
#include "rollforge/imagination.hpp"
#include "rollforge/instructions.hpp"
#include "rollforge/offlinerl.hpp"

namespace py = pybind11;
using namespace rollforge;

namespace {

// Owns the model together with the vocabulary and environment bounds it was
// built against, so python callers get whole operations, not plumbing.
struct Model {
  lm::ModelConfig cfg;
  text::Vocabulary vocab;
  env::EnvConfig env_cfg;
  std::unique_ptr<lm::GroundedModel<float>> net;

  Model(int dim, int layers, int heads, int ffn, uint64_t seed, const env::EnvConfig& ec)
      : vocab(text::build_vocabulary()), env_cfg(ec) {
    cfg.vocab_size = vocab.size();
    cfg.dim = dim;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.ffn_dim = ffn;
    cfg.state_hidden = dim;
    cfg.action_hidden = dim;
    cfg.seed = seed;
    net = std::make_unique<lm::GroundedModel<float>>(cfg);
  }

  std::vector<std::pair<std::string, double>> finetune_on(
      const std::vector<env::Episode>& episodes, int epochs, int batch, double lr,
      uint64_t seed) {
    const auto samples = lm::build_instruction_dataset(episodes, vocab, seed);
    lm::FinetuneConfig fc;
    fc.epochs = epochs;
    fc.batch_size = batch;
    fc.lr = lr;
    fc.seed = seed;
    std::vector<std::pair<std::string, double>> log;
    for (const auto& em : lm::finetune(*net, samples, fc))
      log.emplace_back("epoch " + std::to_string(em.epoch), em.mean_loss);
    return log;
  }

  env::Episode generate(const env::GoalSpec& goal, int max_steps, double temperature,
                        uint64_t seed) {
    imagine::GenerateConfig gen;
    gen.max_steps = max_steps;
    gen.temperature = temperature;
    return imagine::validate_and_relabel(
        imagine::generate_rollout(*net, goal, vocab, env_cfg, gen, seed), env_cfg);
  }

  env::EnvState next_state(const env::EnvState& s, int action) {
    return lm::predict_next_state(*net, s, action, vocab, env_cfg);
  }

  std::string explain(const env::Episode& ep) {
    return lm::explain_rollout(*net, ep, vocab).text;
  }

  std::pair<double, double> dynamics_mse(const std::vector<env::Episode>& episodes,
                                         uint64_t seed) {
    const auto r = lm::evaluate_dynamics_mse(*net, episodes, vocab, env_cfg, seed);
    return {r.model_mse, r.copy_baseline_mse};
  }
};

struct Policy {
  rl::PolicyConfig cfg;
  text::Vocabulary vocab;
  env::EnvConfig env_cfg;
  rl::PolicyAlgo algo = rl::PolicyAlgo::Bc;
  std::unique_ptr<rl::PolicyNet<float>> net;

  Policy(const std::string& algorithm, int goal_dim, uint64_t seed,
         const env::EnvConfig& ec)
      : vocab(text::build_vocabulary()), env_cfg(ec) {
    algo = rl::algo_from_name(algorithm);
    cfg.vocab_size = vocab.size();
    cfg.goal_dim = goal_dim;
    cfg.seed = seed;
    net = std::make_unique<rl::PolicyNet<float>>(cfg);
  }

  std::vector<double> train(const std::vector<env::Episode>& real,
                            const std::vector<env::Episode>& imaginary, int epochs,
                            int steps_per_epoch, int batch, double lr, double mix_ratio,
                            uint64_t seed) {
    const auto rp = rl::TransitionPool::from_episodes(real, vocab);
    const auto ip = rl::TransitionPool::from_episodes(imaginary, vocab);
    rl::RlTrainConfig rc;
    rc.epochs = epochs;
    rc.steps_per_epoch = steps_per_epoch;
    rc.batch_size = batch;
    rc.lr = lr;
    rc.mix_ratio = mix_ratio;
    rc.seed = seed;
    std::vector<double> losses;
    const auto log = algo == rl::PolicyAlgo::Bc ? rl::bc_train(*net, rp, ip, rc)
                                                : rl::cql_train(*net, rp, ip, rc);
    for (const auto& el : log) losses.push_back(el.loss);
    return losses;
  }

  int act_on(const env::EnvState& s, const std::string& goal_text) {
    return rl::act(*net, algo, s, text::tokenize(goal_text, vocab));
  }

  double evaluate(const std::string& level, int n_episodes, uint64_t seed) {
    std::vector<std::pair<std::string, env::GoalSpec>> goals;
    if (level == "offline") {
      for (size_t c = 0; c < 80; ++c)
        for (size_t p = 0; p < 18; ++p) {
          auto g = text::offline_goal(c, p);
          goals.emplace_back(g.text, std::move(g));
        }
    } else {
      text::NovelSetOptions opts;
      opts.max_compose2 = 200;
      opts.max_compose3 = 200;
      goals = text::novel_goal_set(env::level_from_name(level), opts);
    }
    eval::PolicyHandle handle{net.get(), algo};
    return eval::evaluate_success(handle, goals, vocab, env_cfg, n_episodes, seed);
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ball-arena environment, grounded sequence model and offline RL";

  py::register_exception<ConfigError>(m, "RollforgeConfigError");

  py::class_<env::EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("arena_min", &env::EnvConfig::arena_min)
      .def_readwrite("arena_max", &env::EnvConfig::arena_max)
      .def_readwrite("ball_radius", &env::EnvConfig::ball_radius)
      .def_readwrite("step_size", &env::EnvConfig::step_size)
      .def_readwrite("min_separation", &env::EnvConfig::min_separation)
      .def_readwrite("horizon", &env::EnvConfig::horizon)
      .def_readwrite("margin", &env::EnvConfig::margin)
      .def_readwrite("line_tolerance", &env::EnvConfig::line_tolerance)
      .def_readwrite("gather_radius", &env::EnvConfig::gather_radius)
      .def_readwrite("success_bonus", &env::EnvConfig::success_bonus);

  py::class_<env::EnvState>(m, "EnvState")
      .def(py::init<>())
      .def_property(
          "p", [](const env::EnvState& s) { return s.p; },
          [](env::EnvState& s, const std::array<float, env::kStateDim>& v) { s.p = v; })
      .def("__eq__", [](const env::EnvState& a, const env::EnvState& b) { return a == b; });

  py::class_<env::GoalSpec>(m, "GoalSpec")
      .def_property_readonly("kind",
                             [](const env::GoalSpec& g) { return env::kind_name(g.kind); })
      .def_property_readonly("level",
                             [](const env::GoalSpec& g) { return env::level_name(g.level); })
      .def_readonly("target", &env::GoalSpec::target)
      .def_readonly("reference", &env::GoalSpec::reference)
      .def_readonly("text", &env::GoalSpec::text)
      .def("__repr__", [](const env::GoalSpec& g) {
        return "<GoalSpec " + std::string(env::kind_name(g.kind)) + " '" + g.text + "'>";
      });

  py::class_<env::Episode>(m, "Episode")
      .def_readonly("goal", &env::Episode::goal)
      .def_property_readonly("states",
                             [](const env::Episode& ep) {
                               std::vector<std::array<float, env::kStateDim>> out;
                               for (const auto& s : ep.states) out.push_back(s.p);
                               return out;
                             })
      .def_readonly("actions", &env::Episode::actions)
      .def_readonly("rewards", &env::Episode::rewards)
      .def_readonly("success", &env::Episode::success)
      .def_property_readonly("imaginary",
                             [](const env::Episode& ep) {
                               return ep.provenance == env::Provenance::Imaginary;
                             })
      .def("__len__", [](const env::Episode& ep) { return ep.actions.size(); });

  m.def("reset", &env::reset, py::arg("seed"), py::arg("cfg") = env::EnvConfig());
  m.def(
      "step",
      [](const env::EnvState& s, int action, const env::EnvConfig& cfg) {
        return env::step_index(s, action, cfg);
      },
      py::arg("state"), py::arg("action"), py::arg("cfg") = env::EnvConfig());
  m.def("action_index", [](int ball, int direction) {
    return env::action_index(env::encode_action(ball, direction));
  });
  m.def("decode_action", [](int index) {
    const auto [ball, dir] = env::decode_action(env::action_from_index(index));
    return std::make_pair(ball, dir);
  });
  m.def("relative_goal", [](int target, int reference, const std::string& direction) {
    for (int d = 0; d < 4; ++d) {
      const auto dir = static_cast<env::GoalDirection>(d);
      if (direction == env::direction_word(dir)) {
        auto g = env::make_relative_goal(target, reference, dir);
        g.text = text::render_goal(g, text::train_patterns()[1]);
        return g;
      }
    }
    throw std::invalid_argument("unknown direction: " + direction);
  });
  m.def(
      "goal_satisfied",
      [](const env::EnvState& s, const env::GoalSpec& g, const env::EnvConfig& cfg) {
        return env::goal_satisfied(s, g, cfg);
      },
      py::arg("state"), py::arg("goal"), py::arg("cfg") = env::EnvConfig());
  m.def(
      "scripted_expert",
      [](const env::EnvState& s, const env::GoalSpec& g, const env::EnvConfig& cfg) {
        return env::scripted_expert_index(s, g, cfg);
      },
      py::arg("state"), py::arg("goal"), py::arg("cfg") = env::EnvConfig());
  m.def(
      "collect_dataset",
      [](int n, uint64_t seed, const env::EnvConfig& cfg) {
        return env::collect_dataset(n, cfg, seed, [](Rng& rng) {
          return text::sample_offline_goal(rng);
        });
      },
      py::arg("n_episodes"), py::arg("seed"), py::arg("cfg") = env::EnvConfig());
  m.def("instruction_sample_count", [](const std::vector<env::Episode>& eps, uint64_t seed) {
    const auto vocab = text::build_vocabulary();
    return lm::build_instruction_dataset(eps, vocab, seed).size();
  });

  m.def("configuration_count", [] { return text::enumerate_configurations().size(); });
  m.def("novel_goals", [](const std::string& level, size_t cap) {
    text::NovelSetOptions opts;
    opts.max_compose2 = cap;
    opts.max_compose3 = cap;
    const auto set = text::novel_goal_set(env::level_from_name(level), opts);
    std::vector<env::GoalSpec> out;
    for (const auto& [t, g] : set) out.push_back(g);
    return out;
  });
  m.def("tokenize", [](const std::string& s) {
    return text::tokenize(s, text::build_vocabulary());
  });
  m.def("detokenize", [](const std::vector<int>& ids) {
    return text::detokenize(ids, text::build_vocabulary());
  });
  m.def("vocab_size", [] { return text::build_vocabulary().size(); });

  py::class_<Model>(m, "Model")
      .def(py::init<int, int, int, int, uint64_t, const env::EnvConfig&>(), py::arg("dim") = 64,
           py::arg("layers") = 2, py::arg("heads") = 4, py::arg("ffn") = 256,
           py::arg("seed") = 1, py::arg("env") = env::EnvConfig())
      .def("finetune", &Model::finetune_on, py::arg("episodes"), py::arg("epochs") = 10,
           py::arg("batch") = 32, py::arg("lr") = 3e-4, py::arg("seed") = 1)
      .def("generate", &Model::generate, py::arg("goal"), py::arg("max_steps") = 20,
           py::arg("temperature") = 1.0, py::arg("seed") = 0)
      .def("predict_next_state", &Model::next_state)
      .def("explain", &Model::explain)
      .def("dynamics_mse", &Model::dynamics_mse, py::arg("episodes"), py::arg("seed") = 0);

  py::class_<Policy>(m, "Policy")
      .def(py::init<const std::string&, int, uint64_t, const env::EnvConfig&>(),
           py::arg("algorithm") = "bc", py::arg("goal_dim") = 64, py::arg("seed") = 1,
           py::arg("env") = env::EnvConfig())
      .def("train", &Policy::train, py::arg("real"),
           py::arg("imaginary") = std::vector<env::Episode>{}, py::arg("epochs") = 5,
           py::arg("steps_per_epoch") = 0, py::arg("batch") = 100, py::arg("lr") = 1e-3,
           py::arg("mix_ratio") = 0.5, py::arg("seed") = 1)
      .def("act", &Policy::act_on)
      .def("evaluate", &Policy::evaluate, py::arg("level"), py::arg("n_episodes") = 50,
           py::arg("seed") = 0);

  m.attr("__version__") = "0.1.0";
}
