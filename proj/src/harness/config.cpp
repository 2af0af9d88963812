#include <charconv>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>

#include "dmaze/formats.hpp"
#include "dmaze/harness.hpp"

namespace dmaze {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(std::string_view text) {
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
  return v;
}

float parse_float(std::string_view text) {
  float v = 0.0f;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

std::string format_float(float v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::optional<int> parse_optional_int(std::string_view text) {
  if (text == "none") return std::nullopt;
  return parse_integer<int>(text);
}

std::string format_optional(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_integer<int>(trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += format(items[i]);
  }
  return out;
}

std::string_view to_string(ExplorationKind k) {
  return k == ExplorationKind::Uniform ? "uniform" : "gaussian-logits";
}
ExplorationKind parse_exploration(std::string_view text) {
  if (text == "uniform") return ExplorationKind::Uniform;
  if (text == "gaussian-logits") return ExplorationKind::GaussianLogits;
  throw std::invalid_argument("unknown exploration '" + std::string(text) + "'");
}
std::string_view to_string(EpsMode m) { return m == EpsMode::Zero ? "zero" : "sample"; }
EpsMode parse_eps_mode(std::string_view text) {
  if (text == "zero") return EpsMode::Zero;
  if (text == "sample") return EpsMode::Sample;
  throw std::invalid_argument("unknown eps mode '" + std::string(text) + "'");
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define DMAZE_INT_FIELD(name, member)                                              \
  Field {                                                                          \
    name, [](const ExperimentConfig& c) { return std::to_string(c.member); },      \
        [](ExperimentConfig& c, std::string_view v) {                              \
          c.member = parse_integer<decltype(c.member)>(v);                         \
        }                                                                          \
  }
#define DMAZE_DOUBLE_FIELD(name, member)                                           \
  Field {                                                                          \
    name, [](const ExperimentConfig& c) { return format_number(c.member); },       \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_number(v); } \
  }
#define DMAZE_FLOAT_FIELD(name, member)                                            \
  Field {                                                                          \
    name, [](const ExperimentConfig& c) { return format_float(c.member); },        \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_float(v); }  \
  }
#define DMAZE_OPTIONAL_FIELD(name, member)                                         \
  Field {                                                                          \
    name, [](const ExperimentConfig& c) { return format_optional(c.member); },     \
        [](ExperimentConfig& c, std::string_view v) {                              \
          c.member = parse_optional_int(v);                                        \
        }                                                                          \
  }
#define DMAZE_ENUM_FIELD(name, member, parser)                                     \
  Field {                                                                          \
    name, [](const ExperimentConfig& c) { return std::string(to_string(c.member)); }, \
        [](ExperimentConfig& c, std::string_view v) { c.member = parser(v); }      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      DMAZE_INT_FIELD("experiment.master_seed", master_seed),

      DMAZE_INT_FIELD("maze.width", maze_width),
      DMAZE_INT_FIELD("maze.height", maze_height),
      Field{"maze.seed",
            [](const ExperimentConfig& c) {
              return c.maze_seed ? std::to_string(*c.maze_seed) : std::string("auto");
            },
            [](ExperimentConfig& c, std::string_view v) {
              if (v == "auto") {
                c.maze_seed.reset();
              } else {
                c.maze_seed = parse_integer<std::uint64_t>(v);
              }
            }},
      DMAZE_ENUM_FIELD("maze.style", maze_style, parse_maze_style),

      DMAZE_ENUM_FIELD("scenario.mode", scenario.mode, parse_scenario_mode),
      DMAZE_OPTIONAL_FIELD("scenario.vision_radius", scenario.vision_radius),
      DMAZE_ENUM_FIELD("scenario.vision_kind", scenario.vision_kind, parse_vision_kind),
      DMAZE_OPTIONAL_FIELD("scenario.time_limit", scenario.time_limit),
      DMAZE_OPTIONAL_FIELD("scenario.solution_fade_steps", scenario.solution_fade_steps),
      DMAZE_ENUM_FIELD("scenario.representation", scenario.representation,
                       parse_representation),
      DMAZE_ENUM_FIELD("scenario.goal_placement", scenario.goal_placement,
                       parse_goal_placement),
      DMAZE_DOUBLE_FIELD("scenario.goal_reward", scenario.reward.goal_reward),
      DMAZE_DOUBLE_FIELD("scenario.step_penalty", scenario.reward.step_penalty),
      DMAZE_DOUBLE_FIELD("scenario.wall_penalty", scenario.reward.wall_penalty),

      DMAZE_INT_FIELD("collect.episodes", collect_episodes),
      DMAZE_OPTIONAL_FIELD("collect.time_limit", collect_time_limit),
      DMAZE_ENUM_FIELD("collect.start_region", start_region, parse_start_region),
      DMAZE_ENUM_FIELD("collect.exploration", exploration, parse_exploration),
      DMAZE_INT_FIELD("collect.capacity", buffer_capacity),

      DMAZE_INT_FIELD("dvae.epochs", dvae.epochs),
      DMAZE_FLOAT_FIELD("dvae.lr", dvae.adam.lr),
      DMAZE_INT_FIELD("dvae.latent_dim", dvae.latent_dim),
      Field{"dvae.hidden",
            [](const ExperimentConfig& c) {
              return join(c.dvae.hidden, [](int h) { return std::to_string(h); });
            },
            [](ExperimentConfig& c, std::string_view v) { c.dvae.hidden = parse_int_list(v); }},
      DMAZE_INT_FIELD("dvae.batch_size", dvae.batch_size),
      DMAZE_INT_FIELD("dvae.kl_warmup_epochs", dvae.kl_warmup_epochs),
      DMAZE_FLOAT_FIELD("dvae.kl_weight", dvae.kl_weight),
      DMAZE_ENUM_FIELD("dvae.eps_mode", dream_eps, parse_eps_mode),

      DMAZE_DOUBLE_FIELD("agent.gamma", agent.gamma),
      DMAZE_FLOAT_FIELD("agent.lr", agent.lr),
      Field{"agent.hidden",
            [](const ExperimentConfig& c) {
              return join(c.agent.hidden, [](int h) { return std::to_string(h); });
            },
            [](ExperimentConfig& c, std::string_view v) { c.agent.hidden = parse_int_list(v); }},
      DMAZE_INT_FIELD("agent.batch_size", agent.batch_size),
      DMAZE_INT_FIELD("agent.updates_per_episode", agent.updates_per_episode),
      DMAZE_DOUBLE_FIELD("agent.epsilon_start", agent.epsilon_start),
      DMAZE_DOUBLE_FIELD("agent.epsilon_end", agent.epsilon_end),
      DMAZE_INT_FIELD("agent.epsilon_decay_steps", agent.epsilon_decay_steps),
      DMAZE_INT_FIELD("agent.target_sync", agent.target_sync),
      DMAZE_DOUBLE_FIELD("agent.clip", agent.clip),
      DMAZE_DOUBLE_FIELD("agent.gae_lambda", agent.gae_lambda),
      DMAZE_DOUBLE_FIELD("agent.entropy_coef", agent.entropy_coef),
      DMAZE_INT_FIELD("agent.ppo_epochs", agent.ppo_epochs),
      DMAZE_INT_FIELD("agent.episodes_per_update", agent.episodes_per_update),
      DMAZE_INT_FIELD("agent.old_policy_period", agent.old_policy_period),

      DMAZE_INT_FIELD("run.episodes", agent_episodes),
      DMAZE_INT_FIELD("run.seeds", agent_seeds),
      Field{"run.cells",
            [](const ExperimentConfig& c) {
              return join(c.cells, [](TableCell x) { return std::string(to_string(x)); });
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.cells.clear();
              while (true) {
                const auto comma = v.find(',');
                c.cells.push_back(parse_cell(trim(v.substr(0, comma))));
                if (comma == std::string_view::npos) break;
                v.remove_prefix(comma + 1);
              }
            }},
      DMAZE_INT_FIELD("run.horizon", horizon),
      DMAZE_INT_FIELD("run.horizon_trials", horizon_trials),
      DMAZE_INT_FIELD("run.frame_pairs", frame_pairs),
  };
  return table;
}

const Field& find_field(std::string_view key) {
  for (const Field& f : fields())
    if (key == f.key) return f;
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string_view to_string(TableCell cell) {
  switch (cell) {
    case TableCell::DqnD: return "dqn-d";
    case TableCell::DqnDhat: return "dqn-dhat";
    case TableCell::PpoD: return "ppo-d";
    case TableCell::PpoDhat: return "ppo-dhat";
  }
  return "unknown";
}

std::string_view cell_label(TableCell cell) {
  switch (cell) {
    case TableCell::DqnD: return "DQN-D";
    case TableCell::DqnDhat: return "DQN-D̂";
    case TableCell::PpoD: return "PPO-D";
    case TableCell::PpoDhat: return "PPO-D̂";
  }
  return "unknown";
}

TableCell parse_cell(std::string_view text) {
  for (TableCell c : {TableCell::DqnD, TableCell::DqnDhat, TableCell::PpoD, TableCell::PpoDhat})
    if (text == to_string(c)) return c;
  throw std::invalid_argument("unknown cell '" + std::string(text) + "'");
}

AgentKind cell_agent(TableCell cell) {
  return cell == TableCell::DqnD || cell == TableCell::DqnDhat ? AgentKind::Dqn : AgentKind::Ppo;
}

bool cell_uses_dream(TableCell cell) { return cell == TableCell::DqnDhat || cell == TableCell::PpoDhat; }

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw std::invalid_argument(key + ": " + what);
  };
  if (maze_width < kMinMazeSize || maze_width > kMaxMazeSize)
    fail("maze.width", "outside [2, 56]");
  if (maze_height < kMinMazeSize || maze_height > kMaxMazeSize)
    fail("maze.height", "outside [2, 56]");
  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    fail("scenario", e.what());
  }
  if (collect_episodes < 1) fail("collect.episodes", "must be >= 1");
  if (collect_time_limit && *collect_time_limit < 1) fail("collect.time_limit", "must be >= 1");
  if (buffer_capacity < 1) fail("collect.capacity", "must be >= 1");
  if (dvae.epochs < 0) fail("dvae.epochs", "must be >= 0");
  if (!(dvae.adam.lr > 0.0f)) fail("dvae.lr", "must be > 0");
  if (dvae.latent_dim < 1) fail("dvae.latent_dim", "must be >= 1");
  if (dvae.hidden.empty()) fail("dvae.hidden", "needs at least one width");
  for (int h : dvae.hidden)
    if (h < 1) fail("dvae.hidden", "widths must be positive");
  if (dvae.batch_size < 1) fail("dvae.batch_size", "must be >= 1");
  if (dvae.kl_warmup_epochs < 0) fail("dvae.kl_warmup_epochs", "must be >= 0");
  if (!(dvae.kl_weight > 0.0f)) fail("dvae.kl_weight", "must be > 0");
  try {
    agent.validate();
  } catch (const std::invalid_argument& e) {
    fail("agent", e.what());
  }
  if (agent_episodes < 0) fail("run.episodes", "must be >= 0");
  if (agent_seeds < 1) fail("run.seeds", "must be >= 1");
  if (horizon < 0) fail("run.horizon", "must be >= 0");
  if (horizon_trials < 1) fail("run.horizon_trials", "must be >= 1");
  if (frame_pairs < 0) fail("run.frame_pairs", "must be >= 0");
}

std::uint64_t ExperimentConfig::effective_maze_seed() const {
  return maze_seed ? *maze_seed : derive_seed(master_seed, "maze");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void set_config_value(ExperimentConfig& config, std::string_view key,
                      std::string_view value) {
  const Field& f = find_field(key);
  try {
    f.set(config, trim(value));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(key) + ": " + e.what());
  }
}

std::string get_config_value(const ExperimentConfig& config, std::string_view key) {
  return find_field(key).get(config);
}

std::string encode_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const std::string_view key(f.key);
    const auto dot = key.find('.');
    const std::string_view sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      section = std::string(sec);
      out += "[" + section + "]\n";
    }
    out += std::string(key.substr(dot + 1)) + " = " + f.get(config) + "\n";
  }
  return out;
}

ExperimentConfig decode_config(std::string_view text) {
  ExperimentConfig config;
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    // No value contains '#', so everything after one is a comment.
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + what);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    if (section.empty()) fail("key outside a section");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    try {
      set_config_value(config, key, trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return decode_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void apply_seed_override(ExperimentConfig& config) {
  if (const char* env = std::getenv("DREAMING_MAZE_SEED"); env && *env) {
    try {
      config.master_seed = parse_integer<std::uint64_t>(env);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("DREAMING_MAZE_SEED must be an unsigned integer");
    }
  }
}

}  // namespace dmaze
