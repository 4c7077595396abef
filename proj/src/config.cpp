#include "prefixgan/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace prefixgan {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("config field '" + key + "': expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("config field '" + key + "': expected number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config field '" + key + "': expected boolean, got '" + v + "'");
}

template <typename T, typename Conv>
std::vector<T> to_list(const std::string& key, const std::string& v, Conv conv) {
  std::vector<T> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(conv(key, item));
  }
  if (out.empty()) throw ConfigError("config field '" + key + "': empty list");
  return out;
}

}  // namespace

void apply_override(TrainConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "mode") c.mode = v;
  else if (key == "algorithm") c.algorithm = v;
  else if (key == "variant") c.variant = v;
  else if (key == "train_path") c.train_path = v;
  else if (key == "test_path") c.test_path = v;
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "seeds")
    c.seeds = to_list<std::uint64_t>(key, v, [](const std::string& k, const std::string& s) {
      return static_cast<std::uint64_t>(to_int(k, s));
    });
  else if (key == "T") c.t_max = static_cast<int>(to_int(key, v));
  else if (key == "vocab_cap") c.vocab_cap = static_cast<int>(to_int(key, v));
  else if (key == "oracle_seed") c.oracle_seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "oracle_hidden") c.oracle_hidden = static_cast<int>(to_int(key, v));
  else if (key == "gen_hidden") c.gen_hidden = static_cast<int>(to_int(key, v));
  else if (key == "disc_emb") c.disc_emb = static_cast<int>(to_int(key, v));
  else if (key == "disc_filters") c.disc_filters = static_cast<int>(to_int(key, v));
  else if (key == "disc_filter_sizes")
    c.disc_filter_sizes = to_list<int>(key, v, [](const std::string& k, const std::string& s) {
      return static_cast<int>(to_int(k, s));
    });
  else if (key == "disc_heads") c.disc_heads = static_cast<int>(to_int(key, v));
  else if (key == "n_train_synthetic") c.n_train_synthetic = static_cast<int>(to_int(key, v));
  else if (key == "n_test_synthetic") c.n_test_synthetic = static_cast<int>(to_int(key, v));
  else if (key == "n_eval_samples") c.n_eval_samples = static_cast<int>(to_int(key, v));
  else if (key == "batch_size") c.batch_size = static_cast<int>(to_int(key, v));
  else if (key == "pretrain_epochs") c.pretrain_epochs = static_cast<int>(to_int(key, v));
  else if (key == "adv_epochs") c.adv_epochs = static_cast<int>(to_int(key, v));
  else if (key == "g_steps") c.g_steps = static_cast<int>(to_int(key, v));
  else if (key == "d_steps") c.d_steps = static_cast<int>(to_int(key, v));
  else if (key == "rollout_n") c.rollout_n = static_cast<int>(to_int(key, v));
  else if (key == "lr_pretrain") c.lr_pretrain = to_double(key, v);
  else if (key == "lr_g") c.lr_g = to_double(key, v);
  else if (key == "lr_d") c.lr_d = to_double(key, v);
  else if (key == "tau_target") c.tau_target = to_double(key, v);
  else if (key == "tau_warmup") c.tau_warmup = static_cast<int>(to_int(key, v));
  else if (key == "tau_shape") c.tau_shape = v;
  else if (key == "mean_baseline") c.mean_baseline = to_bool(key, v);
  else if (key == "wall_clock") c.wall_clock = to_bool(key, v);
  else if (key == "cuts_override") {
    if (v.empty()) c.cuts_override.clear();
    else
      c.cuts_override = to_list<int>(key, v, [](const std::string& k, const std::string& s) {
        return static_cast<int>(to_int(k, s));
      });
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

TrainConfig parse_config_lines(const std::vector<std::string>& lines) {
  TrainConfig cfg;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(i + 1) + ": expected key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& file,
                        const std::vector<std::string>& overrides) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config file " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  TrainConfig cfg = parse_config_lines(lines);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "': expected key=value");
    std::string key = trim(ov.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    apply_override(cfg, key, trim(ov.substr(eq + 1)));
  }
  return cfg;
}

void validate_config(const TrainConfig& c) {
  auto positive = [](const char* name, auto v) {
    if (!(v > 0)) throw ConfigError(std::string("config field '") + name + "' must be positive");
  };
  if (c.mode != "synthetic" && c.mode != "real")
    throw ConfigError("config field 'mode': must be 'synthetic' or 'real'");
  if (c.algorithm != "seqgan" && c.algorithm != "relgan")
    throw ConfigError("config field 'algorithm': must be 'seqgan' or 'relgan'");
  if (c.variant != "baseline" && c.variant != "full_prefix" && c.variant != "two_segment")
    throw ConfigError("config field 'variant': must be baseline | full_prefix | two_segment");
  if (c.tau_shape != "constant" && c.tau_shape != "exponential")
    throw ConfigError("config field 'tau_shape': must be 'constant' or 'exponential'");
  if (c.seeds.empty()) throw ConfigError("config field 'seeds': must be nonempty");
  positive("T", c.t_max);
  positive("vocab_cap", c.vocab_cap);
  positive("oracle_hidden", c.oracle_hidden);
  positive("gen_hidden", c.gen_hidden);
  positive("disc_emb", c.disc_emb);
  positive("disc_filters", c.disc_filters);
  positive("n_train_synthetic", c.n_train_synthetic);
  positive("n_test_synthetic", c.n_test_synthetic);
  positive("n_eval_samples", c.n_eval_samples);
  positive("batch_size", c.batch_size);
  positive("g_steps", c.g_steps);
  positive("d_steps", c.d_steps);
  positive("rollout_n", c.rollout_n);
  positive("lr_pretrain", c.lr_pretrain);
  positive("lr_g", c.lr_g);
  positive("lr_d", c.lr_d);
  positive("tau_target", c.tau_target);
  positive("tau_warmup", c.tau_warmup);
  if (c.pretrain_epochs < 0 || c.adv_epochs < 0)
    throw ConfigError("config epochs must be >= 0");
  if (c.disc_heads < 0) throw ConfigError("config field 'disc_heads' must be >= 0");
  for (int f : c.disc_filter_sizes) positive("disc_filter_sizes", f);
  if (c.mode == "real") {
    if (c.train_path.empty() || !std::filesystem::exists(c.train_path))
      throw ConfigError("config field 'train_path': file not found: " + c.train_path);
    if (c.test_path.empty() || !std::filesystem::exists(c.test_path))
      throw ConfigError("config field 'test_path': file not found: " + c.test_path);
  }
  if (!c.cuts_override.empty()) {
    if (c.cuts_override.size() != 2)
      throw ConfigError("config field 'cuts_override': expected 't_mid,t_full'");
    if (c.cuts_override[0] < 1 || c.cuts_override[0] >= c.cuts_override[1] ||
        c.cuts_override[1] > c.t_max)
      throw ConfigError("config field 'cuts_override': need 1 <= t_mid < t_full <= T");
  }
}

std::string config_to_text(const TrainConfig& c) {
  std::ostringstream os;
  auto list_u64 = [](const std::vector<std::uint64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  auto list_int = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  os << "mode = " << c.mode << "\n";
  os << "algorithm = " << c.algorithm << "\n";
  os << "variant = " << c.variant << "\n";
  os << "train_path = " << c.train_path << "\n";
  os << "test_path = " << c.test_path << "\n";
  os << "out_dir = " << c.out_dir << "\n";
  os << "seeds = " << list_u64(c.seeds) << "\n";
  os << "T = " << c.t_max << "\n";
  os << "vocab_cap = " << c.vocab_cap << "\n";
  os << "oracle_seed = " << c.oracle_seed << "\n";
  os << "oracle_hidden = " << c.oracle_hidden << "\n";
  os << "gen_hidden = " << c.gen_hidden << "\n";
  os << "disc_emb = " << c.disc_emb << "\n";
  os << "disc_filters = " << c.disc_filters << "\n";
  os << "disc_filter_sizes = " << list_int(c.disc_filter_sizes) << "\n";
  os << "disc_heads = " << c.disc_heads << "\n";
  os << "n_train_synthetic = " << c.n_train_synthetic << "\n";
  os << "n_test_synthetic = " << c.n_test_synthetic << "\n";
  os << "n_eval_samples = " << c.n_eval_samples << "\n";
  os << "batch_size = " << c.batch_size << "\n";
  os << "pretrain_epochs = " << c.pretrain_epochs << "\n";
  os << "adv_epochs = " << c.adv_epochs << "\n";
  os << "g_steps = " << c.g_steps << "\n";
  os << "d_steps = " << c.d_steps << "\n";
  os << "rollout_n = " << c.rollout_n << "\n";
  os << "lr_pretrain = " << c.lr_pretrain << "\n";
  os << "lr_g = " << c.lr_g << "\n";
  os << "lr_d = " << c.lr_d << "\n";
  os << "tau_target = " << c.tau_target << "\n";
  os << "tau_warmup = " << c.tau_warmup << "\n";
  os << "tau_shape = " << c.tau_shape << "\n";
  os << "mean_baseline = " << (c.mean_baseline ? "true" : "false") << "\n";
  os << "cuts_override = " << (c.cuts_override.empty() ? "" : list_int(c.cuts_override)) << "\n";
  os << "wall_clock = " << (c.wall_clock ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace prefixgan
