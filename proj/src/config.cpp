#include "fingergan/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace fingergan::config {
namespace {

struct Entry {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config: " + key + ": '" + v + "' is not a finite number");
  }
  return out;
}

template <class I>
I parse_int(const std::string& key, const std::string& v) {
  I out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw ConfigError("config: " + key + ": '" + v + "' is not an integer in range");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: " + key + ": '" + v + "' is not a boolean (true/false)");
}

template <class T>
using Ref = std::function<T&(RunConfig&)>;

template <class T>
Entry bind(const std::string& key, Ref<T> ref) {
  Entry e;
  e.get = [ref](const RunConfig& c) {
    const T& v = ref(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, bool>) {
      return std::string(v ? "true" : "false");
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_real(static_cast<double>(v));
    } else {
      return std::to_string(v);
    }
  };
  e.set = [ref, key](RunConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      ref(c) = parse_bool(key, v);
    } else if constexpr (std::is_floating_point_v<T>) {
      ref(c) = static_cast<T>(parse_real(key, v));
    } else {
      ref(c) = parse_int<T>(key, v);
    }
  };
  return e;
}

/// Angle stored in radians, exposed in degrees.
Entry bind_degrees(const std::string& key, Ref<double> ref) {
  Entry e;
  e.get = [ref](const RunConfig& c) { return format_real(ref(const_cast<RunConfig&>(c)) * 180.0 / std::numbers::pi); };
  e.set = [ref, key](RunConfig& c, const std::string& v) { ref(c) = parse_real(key, v) * std::numbers::pi / 180.0; };
  return e;
}

template <class E>
Entry bind_enum(const std::string& key, Ref<E> ref, std::vector<std::pair<E, std::string>> names) {
  Entry e;
  e.get = [ref, names](const RunConfig& c) {
    const E v = ref(const_cast<RunConfig&>(c));
    for (const auto& [value, name] : names) {
      if (value == v) return name;
    }
    return std::string("?");
  };
  e.set = [ref, names, key](RunConfig& c, const std::string& v) {
    for (const auto& [value, name] : names) {
      if (name == v) {
        ref(c) = value;
        return;
      }
    }
    std::string allowed;
    for (const auto& n : names) allowed += (allowed.empty() ? "" : "|") + n.second;
    throw ConfigError("config: " + key + ": '" + v + "' is not one of " + allowed);
  };
  return e;
}

struct Table {
  std::vector<std::string> order;
  std::map<std::string, Entry> entries;

  template <class T>
  void add(const std::string& key, Ref<T> ref) {
    put(key, bind<T>(key, std::move(ref)));
  }
  void put(const std::string& key, Entry e) {
    order.push_back(key);
    entries.emplace(key, std::move(e));
  }
};

#define FG_REF(T, expr) Ref<T>([](RunConfig& c) -> T& { return expr; })

const Table& table() {
  static const Table t = [] {
    Table t;
    t.add<std::uint64_t>("seed", FG_REF(std::uint64_t, c.seed));

    t.add<int>("synth.prints", FG_REF(int, c.synth.prints));
    t.add<int>("synth.latents_per_print", FG_REF(int, c.synth.pair.latents_per_print));
    t.add<int>("synth.width", FG_REF(int, c.synth.print.width));
    t.add<int>("synth.height", FG_REF(int, c.synth.print.height));
    t.add<double>("synth.period_min", FG_REF(double, c.synth.print.period_min));
    t.add<double>("synth.period_max", FG_REF(double, c.synth.print.period_max));
    t.add<int>("synth.backgrounds", FG_REF(int, c.synth.backgrounds));
    t.add<double>("synth.k_min", FG_REF(double, c.synth.pair.ranges.distortion.k_min));
    t.add<double>("synth.k_max", FG_REF(double, c.synth.pair.ranges.distortion.k_max));
    t.add<double>("synth.theta_max_deg", FG_REF(double, c.synth.pair.ranges.distortion.theta_max_deg));
    t.add<double>("synth.e_min", FG_REF(double, c.synth.pair.ranges.distortion.e_min));
    t.add<double>("synth.e_max", FG_REF(double, c.synth.pair.ranges.distortion.e_max));
    t.add<double>("synth.variance_min", FG_REF(double, c.synth.pair.ranges.variance_min));
    t.add<double>("synth.variance_max", FG_REF(double, c.synth.pair.ranges.variance_max));
    t.add<double>("synth.lambda_min", FG_REF(double, c.synth.pair.ranges.lambda_min));
    t.add<double>("synth.lambda_max", FG_REF(double, c.synth.pair.ranges.lambda_max));
    t.add<double>("synth.min_mean_coherence", FG_REF(double, c.synth.quality.min_mean_coherence));
    t.add<double>("tv.fidelity_weight", FG_REF(double, c.synth.pair.tv.fidelity_weight));
    t.add<int>("tv.max_iters", FG_REF(int, c.synth.pair.tv.max_iters));
    t.add<double>("tv.tolerance", FG_REF(double, c.synth.pair.tv.tolerance));
    t.add<double>("weight.sigma", FG_REF(double, c.synth.pair.weights.sigma));
    t.add<int>("weight.r", FG_REF(int, c.synth.pair.weights.r));
    t.add<int>("minutiae.spur_length", FG_REF(int, c.synth.pair.minutiae.spur_length));
    t.add<double>("minutiae.border_distance", FG_REF(double, c.synth.pair.minutiae.border_distance));
    t.add<int>("fomfe.order", FG_REF(int, c.synth.pair.fomfe.order));
    t.add<int>("fomfe.sample_step", FG_REF(int, c.synth.pair.fomfe.sample_step));

    t.add<double>("train.learning_rate", FG_REF(double, c.train.adam.learning_rate));
    t.add<double>("train.beta1", FG_REF(double, c.train.adam.beta1));
    t.add<double>("train.beta2", FG_REF(double, c.train.adam.beta2));
    t.add<double>("train.epsilon", FG_REF(double, c.train.adam.epsilon));
    t.add<double>("train.eta", FG_REF(double, c.train.loss.eta));
    t.put("train.generator_loss",
          bind_enum<losses::GeneratorAdversarial>(
              "train.generator_loss", FG_REF(losses::GeneratorAdversarial, c.train.loss.generator_form),
              {{losses::GeneratorAdversarial::non_saturating, "non-saturating"},
               {losses::GeneratorAdversarial::saturating, "saturating"}}));
    t.add<int>("train.patch", FG_REF(int, c.train.generator.patch));
    t.add<int>("train.generator_channels", FG_REF(int, c.train.generator.base_channels));
    t.add<int>("train.discriminator_channels", FG_REF(int, c.train.discriminator.base_channels));
    t.add<float>("train.slope", FG_REF(float, c.train.generator.slope));
    t.add<int>("train.batch_size", FG_REF(int, c.train.batch_size));
    t.add<int>("train.iterations", FG_REF(int, c.train.max_iterations));
    t.add<int>("train.checkpoint_every", FG_REF(int, c.train.checkpoint_every));
    t.add<double>("train.init_stddev", FG_REF(double, c.train.init_stddev));
    t.add<bool>("train.no_discriminator", FG_REF(bool, c.train.ablations.no_discriminator));
    t.add<bool>("train.gray_gt", FG_REF(bool, c.train.ablations.gray_gt));
    t.add<bool>("train.no_weight", FG_REF(bool, c.train.ablations.no_weight));

    t.add<int>("inference.window", FG_REF(int, c.inference.window));
    t.add<int>("inference.step", FG_REF(int, c.inference.step));
    t.put("inference.aggregation",
          bind_enum<inference::Aggregation>("inference.aggregation", FG_REF(inference::Aggregation, c.inference.aggregation),
                                            {{inference::Aggregation::mean, "mean"},
                                             {inference::Aggregation::gaussian, "gaussian"}}));
    t.add<double>("inference.gaussian_sigma", FG_REF(double, c.inference.gaussian_sigma));
    t.add<int>("inference.batch", FG_REF(int, c.inference.batch));
    t.add<double>("enhance.tv_fidelity_weight", FG_REF(double, c.enhance_tv.fidelity_weight));
    t.add<int>("enhance.tv_max_iters", FG_REF(int, c.enhance_tv.max_iters));

    t.add<double>("match.loc_radius", FG_REF(double, c.match.loc_radius));
    t.put("match.angle_tol_deg", bind_degrees("match.angle_tol_deg", FG_REF(double, c.match.angle_tol)));
    t.add<bool>("match.require_type", FG_REF(bool, c.match.require_type));
    t.add<double>("similarity.loc_radius", FG_REF(double, c.similarity.tolerance.loc_radius));
    t.put("similarity.angle_tol_deg",
          bind_degrees("similarity.angle_tol_deg", FG_REF(double, c.similarity.tolerance.angle_tol)));
    t.add<bool>("similarity.require_type", FG_REF(bool, c.similarity.tolerance.require_type));
    t.add<double>("similarity.rotation_step_deg", FG_REF(double, c.similarity.rotation_step_deg));
    return t;
  }();
  return t;
}

#undef FG_REF

const Entry& entry(const std::string& key) {
  const auto& e = table().entries;
  const auto it = e.find(key);
  if (it == e.end()) throw ConfigError("config: unknown key '" + key + "'");
  return it->second;
}

}  // namespace

void RunConfig::validate() {
  synth.seed = seed;
  train.seed = seed;
  try {
    synth.validate();
    train.validate();
    inference.validate();
    enhance_tv.validate();
    match.validate();
    similarity.tolerance.validate();
    if (synth.pair.fomfe.order < 1 || synth.pair.fomfe.sample_step < 1) {
      throw std::invalid_argument("fomfe: order and sample step must be >= 1");
    }
    if (synth.pair.minutiae.spur_length < 0 || !(synth.pair.minutiae.border_distance >= 0.0)) {
      throw std::invalid_argument("minutiae: spur length and border distance must be >= 0");
    }
    if (!(similarity.rotation_step_deg > 0.0)) throw std::invalid_argument("similarity: rotation step must be > 0");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

const std::vector<std::string>& keys() { return table().order; }

std::string env_name(const std::string& key) {
  std::string out = "FGAN_";
  for (const char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

void set(RunConfig& cfg, const std::string& key, const std::string& value) { entry(key).set(cfg, trim(value)); }

std::string get(const RunConfig& cfg, const std::string& key) { return entry(key).get(cfg); }

void apply_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      set(cfg, trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  apply_text(cfg, text.str(), path.string());
}

void apply_env(RunConfig& cfg, const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  for (const auto& key : keys()) {
    const std::string name = env_name(key);
    if (const auto v = lookup(name)) {
      try {
        set(cfg, key, *v);
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string dump(const RunConfig& cfg) {
  std::string out;
  for (const auto& key : keys()) out += key + "=" + get(cfg, key) + "\n";
  return out;
}

}  // namespace fingergan::config
