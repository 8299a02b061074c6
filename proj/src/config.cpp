#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include "geneft/common.hpp"
#include "geneft/harness.hpp"

namespace geneft {

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

struct ExperimentName {
  ExperimentKind kind;
  const char* name;
};

constexpr ExperimentName kExperimentNames[] = {
    {ExperimentKind::StaticsCurve, "statics_curve"},
    {ExperimentKind::StaticsAnalytic, "statics_analytic"},
    {ExperimentKind::ReponPhaseSpace, "repon_phase_space"},
    {ExperimentKind::ReponProbability, "repon_probability"},
    {ExperimentKind::TrainOnce, "train_once"},
    {ExperimentKind::FractionSweep, "fraction_sweep"},
    {ExperimentKind::LrPhaseDiagram, "lr_phase_diagram"},
    {ExperimentKind::WdPhaseDiagram, "wd_phase_diagram"},
    {ExperimentKind::Goldilocks, "goldilocks"},
};

// Value codecs. decode throws std::invalid_argument with a short reason.

double to_double(const std::string& s) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

template <class T>
T to_integer(const std::string& s) {
  T v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

std::vector<double> numeric_list(const std::string& text) {
  const std::string t = trim(text);
  for (const char* fn : {"linspace", "logspace"}) {
    const std::string prefix = std::string(fn) + "(";
    if (t.rfind(prefix, 0) != 0) continue;
    if (t.back() != ')') throw std::invalid_argument("unterminated " + std::string(fn) + "(...)");
    const auto args = split_trimmed(t.substr(prefix.size(), t.size() - prefix.size() - 1), ',');
    if (args.size() != 3) throw std::invalid_argument(std::string(fn) + " takes (start, stop, count)");
    const double lo = to_double(args[0]), hi = to_double(args[1]);
    const auto count = to_integer<std::size_t>(args[2]);
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (fn[1] == 'o') {
      if (!(lo > 0 && hi > 0)) throw std::invalid_argument("logspace endpoints must be positive");
      return log_grid(lo, hi, count);
    }
    std::vector<double> out(count, lo);
    for (std::size_t k = 1; k < count; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    if (count > 1) out.back() = hi;
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_trimmed(t, ',')) out.push_back(to_double(item));
  return out;
}

template <class T>
void decode(const std::string& s, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (s == "true" || s == "1" || s == "yes") out = true;
    else if (s == "false" || s == "0" || s == "no") out = false;
    else throw std::invalid_argument("expected true or false, got '" + s + "'");
  } else if constexpr (std::is_same_v<T, double>) {
    out = to_double(s);
  } else if constexpr (std::is_integral_v<T>) {
    if (std::is_unsigned_v<T> && !s.empty() && s[0] == '-') throw std::invalid_argument("expected a non-negative integer");
    out = to_integer<T>(s);
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = s;
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    out = numeric_list(s);
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    out.clear();
    for (const auto& item : split_trimmed(s, ',')) out.push_back(to_integer<int>(item));
  } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
    out = split_trimmed(s, ',');
  } else if constexpr (std::is_same_v<T, CombineMode>) {
    out = parse_combine_mode(s);
  } else if constexpr (std::is_same_v<T, OptimizerKind>) {
    if (s == "gd") out = OptimizerKind::FullBatchGD;
    else if (s == "adam") out = OptimizerKind::Adam;
    else throw std::invalid_argument("expected gd or adam, got '" + s + "'");
  } else if constexpr (std::is_same_v<T, Precision>) {
    if (s == "float32") out = Precision::Float32;
    else if (s == "float64") out = Precision::Float64;
    else throw std::invalid_argument("expected float32 or float64, got '" + s + "'");
  } else {
    static_assert(std::is_same_v<T, ExperimentKind>);
    out = parse_experiment(s);
  }
}

template <class T>
std::string encode(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, double>) {
    return format_double(v);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>> ||
                       std::is_same_v<T, std::vector<std::string>>) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) out += ", ";
      out += encode(v[k]);
    }
    return out;
  } else {
    return to_string(v);
  }
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Access>
Field field(std::string section, std::string key, Access access) {
  Field f;
  f.section = std::move(section);
  f.key = std::move(key);
  f.set = [access](ExperimentConfig& c, const std::string& text) { decode(text, access(c)); };
  f.get = [access](const ExperimentConfig& c) { return encode(access(const_cast<ExperimentConfig&>(c))); };
  return f;
}

#define GENEFT_FIELD(section, key, member) field(section, key, [](ExperimentConfig& c) -> auto& { return c.member; })

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      GENEFT_FIELD("", "experiment", experiment),
      GENEFT_FIELD("", "seed", seed),
      GENEFT_FIELD("", "workers", workers),
      GENEFT_FIELD("", "out", out),
      GENEFT_FIELD("relation", "names", relations),
      GENEFT_FIELD("relation", "n", n),
      GENEFT_FIELD("relation", "bipartite_part", bipartite_part),
      GENEFT_FIELD("model", "embed_dim", model.embed_dim),
      GENEFT_FIELD("model", "depth", model.depth),
      GENEFT_FIELD("model", "width", model.width),
      GENEFT_FIELD("model", "mode", model.mode),
      GENEFT_FIELD("train", "eta_enc", train.eta_enc),
      GENEFT_FIELD("train", "eta_dec", train.eta_dec),
      GENEFT_FIELD("train", "weight_decay", train.weight_decay_dec),
      GENEFT_FIELD("train", "max_steps", train.max_steps),
      GENEFT_FIELD("train", "eval_interval", train.eval_interval),
      GENEFT_FIELD("train", "train_fraction", train.train_fraction),
      GENEFT_FIELD("train", "optimizer", train.optimizer),
      GENEFT_FIELD("train", "adam_beta1", train.adam.beta1),
      GENEFT_FIELD("train", "adam_beta2", train.adam.beta2),
      GENEFT_FIELD("train", "adam_eps", train.adam.eps),
      GENEFT_FIELD("train", "init_scale", train.init_scale),
      GENEFT_FIELD("train", "early_stop", train.early_stop),
      GENEFT_FIELD("train", "precision", train.precision),
      GENEFT_FIELD("statics", "fractions", statics.fractions),
      GENEFT_FIELD("statics", "trials", statics.trials),
      GENEFT_FIELD("statics", "sequences", statics.sequences),
      GENEFT_FIELD("statics", "alpha", statics.alpha),
      GENEFT_FIELD("repon", "eta_A", repon.eta_A),
      GENEFT_FIELD("repon", "eta_x", repon.eta_x),
      GENEFT_FIELD("repon", "a2_min", repon.a2_min),
      GENEFT_FIELD("repon", "a2_max", repon.a2_max),
      GENEFT_FIELD("repon", "c_min", repon.c_min),
      GENEFT_FIELD("repon", "c_max", repon.c_max),
      GENEFT_FIELD("repon", "grid", repon.grid),
      GENEFT_FIELD("repon", "ratios", repon.ratios),
      GENEFT_FIELD("repon", "sigma_a", repon.sigma_a),
      GENEFT_FIELD("repon", "sigma_c", repon.sigma_c),
      GENEFT_FIELD("repon", "samples", repon.samples),
      GENEFT_FIELD("sweep", "fractions", sweep.fractions),
      GENEFT_FIELD("sweep", "repeats", sweep.repeats),
      GENEFT_FIELD("sweep", "enc_lrs", sweep.enc_lrs),
      GENEFT_FIELD("sweep", "dec_lrs", sweep.dec_lrs),
      GENEFT_FIELD("sweep", "weight_decays", sweep.weight_decays),
      GENEFT_FIELD("sweep", "depths", sweep.depths),
  };
  return fields;
}

#undef GENEFT_FIELD

std::string qualified(const Field& f) { return f.section.empty() ? f.key : f.section + "." + f.key; }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& e : kExperimentNames)
    if (e.kind == kind) return e.name;
  return "?";
}

ExperimentKind parse_experiment(const std::string& text) {
  for (const auto& e : kExperimentNames)
    if (text == e.name) return e.kind;
  std::string names;
  for (const auto& e : kExperimentNames) names += std::string(names.empty() ? "" : ", ") + e.name;
  throw std::invalid_argument("unknown experiment '" + text + "' (expected one of " + names + ")");
}

RelationSpec parse_relation(const std::string& name, int n, int bipartite_part) {
  if (name == "greater") return greater_than_spec(n);
  if (name == "bipartite") return bipartite_spec(n, bipartite_part);
  if (name.rfind("mod", 0) == 0 && name.size() > 3) return modulo_spec(n, to_integer<int>(name.substr(3)));
  if (name.rfind("file:", 0) == 0) {
    const RelationMatrix m = load_relation_file(name.substr(5));
    return m.spec();
  }
  throw std::invalid_argument("unknown relation '" + name + "' (expected modK, greater, bipartite or file:<path>)");
}

std::vector<RelationSpec> ExperimentConfig::relation_specs() const {
  std::vector<RelationSpec> specs;
  for (const auto& name : relations) {
    try {
      specs.push_back(parse_relation(name, n, bipartite_part));
      geneft::validate(specs.back());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("relation.names: " + std::string(e.what()));
    } catch (const std::runtime_error& e) {
      throw ConfigError("relation.names: " + std::string(e.what()));
    }
  }
  return specs;
}

void ExperimentConfig::validate() const {
  require(n >= 1, "relation.n", "must be positive");
  require(!relations.empty(), "relation.names", "at least one relation is required");
  const auto specs = relation_specs();
  ModelConfig m = model;
  m.n = n;
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& spec : specs) require(spec.n == n, "relation.names", "relation file node count differs from relation.n");

  for (double f : statics.fractions) require(f >= 0 && f <= 1, "statics.fractions", "values must lie in [0, 1]");
  require(statics.trials >= 1, "statics.trials", "must be >= 1");
  require(statics.sequences >= 1, "statics.sequences", "must be >= 1");
  require(statics.alpha > 0 && statics.alpha < 1, "statics.alpha", "must lie in (0, 1)");

  require(repon.eta_A > 0 && repon.eta_x > 0, "repon.eta_A", "learning rates must be positive");
  require(repon.a2_min < repon.a2_max, "repon.a2_min", "must be below repon.a2_max");
  require(repon.c_min < repon.c_max, "repon.c_min", "must be below repon.c_max");
  require(repon.grid >= 2, "repon.grid", "must be >= 2");
  for (double r : repon.ratios) require(r > 0, "repon.ratios", "values must be positive");
  require(repon.sigma_a.size() == repon.sigma_c.size(), "repon.sigma_c", "must have as many entries as repon.sigma_a");
  for (double s : repon.sigma_a) require(s > 0, "repon.sigma_a", "values must be positive");
  for (double s : repon.sigma_c) require(s > 0, "repon.sigma_c", "values must be positive");
  require(repon.samples >= 1, "repon.samples", "must be >= 1");

  require(sweep.repeats >= 1, "sweep.repeats", "must be >= 1");
  for (double f : sweep.fractions) require(f >= 0 && f <= 1, "sweep.fractions", "values must lie in [0, 1]");
  for (double v : sweep.enc_lrs) require(v > 0, "sweep.enc_lrs", "values must be positive");
  for (double v : sweep.dec_lrs) require(v > 0, "sweep.dec_lrs", "values must be positive");
  for (double v : sweep.weight_decays) require(v >= 0, "sweep.weight_decays", "values must be non-negative");
  for (int d : sweep.depths) require(d >= 0, "sweep.depths", "values must be non-negative");
  switch (experiment) {
    case ExperimentKind::FractionSweep:
      require(!sweep.fractions.empty(), "sweep.fractions", "required for fraction_sweep");
      break;
    case ExperimentKind::LrPhaseDiagram:
      require(!sweep.enc_lrs.empty(), "sweep.enc_lrs", "required for lr_phase_diagram");
      require(!sweep.dec_lrs.empty(), "sweep.dec_lrs", "required for lr_phase_diagram");
      break;
    case ExperimentKind::WdPhaseDiagram:
      require(!sweep.weight_decays.empty(), "sweep.weight_decays", "required for wd_phase_diagram");
      require(!sweep.dec_lrs.empty(), "sweep.dec_lrs", "required for wd_phase_diagram");
      break;
    case ExperimentKind::Goldilocks:
      require(!sweep.depths.empty(), "sweep.depths", "required for goldilocks");
      break;
    default:
      break;
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, const Field*> by_name;
  std::set<std::string> sections;
  for (const auto& f : schema()) {
    by_name[qualified(f)] = &f;
    sections.insert(f.section);
  }

  ExperimentConfig config;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section) || section.empty()) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string name = section.empty() ? key : section + "." + key;
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError("unknown key '" + name + "'", line_no);
    if (!seen.insert(name).second) throw ConfigError("duplicate key '" + name + "'", line_no);
    try {
      it->second->set(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(name + ": " + e.what(), line_no);
    } catch (const std::out_of_range& e) {
      throw ConfigError(name + ": value out of range", line_no);
    }
  }
  if (!seen.count("experiment")) throw ConfigError("missing required key 'experiment'");
  config.model.n = config.n;
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : schema()) {
    if (f.section != section) {
      section = f.section;
      out << "\n[" << section << "]\n";
    }
    const std::string value = f.get(config);
    out << f.key << " =" << (value.empty() ? "" : " ") << value << '\n';
  }
  return out.str();
}

}  // namespace geneft
