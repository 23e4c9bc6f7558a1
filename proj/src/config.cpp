#include "proxfi/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "proxfi/errors.hpp"

namespace proxfi {

namespace {

constexpr const char* kModeNames[] = {"verify_ideal", "verify_perturbed", "mc_exact",      "mc_smoothed",
                                      "ula_baseline", "restart",          "sweep_epsilon", "check_lemmas"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& s) {
  Int v = 0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define PROXFI_DOUBLE(name)                                                              \
  Field {                                                                                \
    #name, [](const ExperimentConfig& c) { return format_double(c.name); },              \
        [](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); } \
  }
#define PROXFI_INT(name, type)                                                                 \
  Field {                                                                                      \
    #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },                   \
        [](ExperimentConfig& c, const std::string& v) { c.name = to_int<type>(#name, v); }     \
  }
#define PROXFI_STRING(name)                                                  \
  Field {                                                                    \
    #name, [](const ExperimentConfig& c) { return c.name; },                 \
        [](ExperimentConfig& c, const std::string& v) { c.name = v; }        \
  }
#define PROXFI_DOUBLES(name)                                                                  \
  Field {                                                                                     \
    #name, [](const ExperimentConfig& c) { return join(c.name, format_double); },             \
        [](ExperimentConfig& c, const std::string& v) {                                       \
          c.name.clear();                                                                     \
          for (const auto& item : split_list(v)) c.name.push_back(to_double(#name, item));    \
        }                                                                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PROXFI_INT(schema_version, int),
      PROXFI_STRING(target),
      Field{"mode", [](const ExperimentConfig& c) { return to_string(c.mode); },
            [](ExperimentConfig& c, const std::string& v) { c.mode = parse_experiment_mode(v); }},
      PROXFI_DOUBLE(h),
      PROXFI_DOUBLE(h_over_L),
      PROXFI_INT(steps, int),
      Field{"rgo_mode", [](const ExperimentConfig& c) { return to_string(c.rgo_mode); },
            [](ExperimentConfig& c, const std::string& v) { c.rgo_mode = parse_rgo_mode(v); }},
      Field{"output", [](const ExperimentConfig& c) { return to_string(c.output); },
            [](ExperimentConfig& c, const std::string& v) { c.output = parse_output_mode(v); }},
      Field{"inner_method", [](const ExperimentConfig& c) { return to_string(c.inner_method); },
            [](ExperimentConfig& c, const std::string& v) { c.inner_method = parse_inner_method(v); }},
      PROXFI_DOUBLE(inner_step),
      PROXFI_INT(inner_steps, int),
      PROXFI_INT(inner_burn_in, int),
      PROXFI_DOUBLE(delta),
      PROXFI_DOUBLE(smoothing_variance),
      PROXFI_STRING(init),
      PROXFI_DOUBLE(init_mean),
      PROXFI_DOUBLE(init_variance),
      PROXFI_DOUBLE(init_tilt),
      PROXFI_INT(grid_nodes, int),
      PROXFI_DOUBLE(grid_min),
      PROXFI_DOUBLE(grid_max),
      PROXFI_DOUBLES(eps_mix),
      PROXFI_DOUBLES(epsilons),
      PROXFI_INT(max_steps, long),
      PROXFI_INT(chains, int),
      Field{"seeds", [](const ExperimentConfig& c) { return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }); },
            [](ExperimentConfig& c, const std::string& v) {
              c.seeds.clear();
              for (const auto& item : split_list(v)) c.seeds.push_back(to_int<std::uint64_t>("seeds", item));
            }},
      PROXFI_INT(lemma_triples, int),
      Field{"heat_orders", [](const ExperimentConfig& c) { return join(c.heat_orders, [](int q) { return std::to_string(q); }); },
            [](ExperimentConfig& c, const std::string& v) {
              c.heat_orders.clear();
              for (const auto& item : split_list(v)) c.heat_orders.push_back(to_int<int>("heat_orders", item));
            }},
      PROXFI_DOUBLES(heat_times),
      PROXFI_DOUBLES(heat_scaled_times),
      PROXFI_INT(restart_rounds, int),
      PROXFI_DOUBLE(epsilon_final),
      PROXFI_DOUBLES(ula_step),
      PROXFI_INT(ula_length, long),
      PROXFI_DOUBLE(ula_compare_step),
      PROXFI_INT(ula_budget, long),
      PROXFI_DOUBLE(smoothness),
      PROXFI_STRING(output_dir),
  };
  return table;
}

#undef PROXFI_DOUBLE
#undef PROXFI_INT
#undef PROXFI_STRING
#undef PROXFI_DOUBLES

void validate(const ExperimentConfig& c) {
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  }
  parse_target(c.target);
  if (c.init != "gaussian" && c.init != "tilted") throw ConfigError("unknown init '" + c.init + "'");
  if (c.steps < 1) throw ConfigError("steps must be >= 1");
  if (c.chains < 1) throw ConfigError("chains must be >= 1");
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (c.grid_nodes != 0 && c.grid_nodes < 5) throw ConfigError("grid_nodes must be 0 or >= 5");
  if (c.lemma_triples < 0) throw ConfigError("lemma_triples must be >= 0");
  for (double e : c.eps_mix) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("eps_mix entries must lie in [0, 1]");
  }
  for (double e : c.epsilons) {
    if (!(e > 0.0)) throw ConfigError("epsilons must be positive");
  }
}

}  // namespace

std::string to_string(ExperimentMode m) { return kModeNames[static_cast<int>(m)]; }

ExperimentMode parse_experiment_mode(const std::string& s) {
  for (int i = 0; i < 8; ++i) {
    if (s == kModeNames[i]) return static_cast<ExperimentMode>(i);
  }
  throw ConfigError("unknown mode '" + s + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    it->set(c, value);
  }
  if (!seen.count("schema_version")) throw ConfigError("missing schema_version");
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + '\n';
  return out;
}

void apply_environment(ExperimentConfig& config) {
  const char* seed = std::getenv("PROXFI_SEED");
  if (!seed) return;
  config.seeds = {to_int<std::uint64_t>("PROXFI_SEED", trim(seed))};
}

}  // namespace proxfi
