#include "gmix/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gmix/error.hpp"

namespace gmix {

namespace pt = boost::property_tree;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::mixing: return "mixing";
    case ExperimentKind::correlations: return "correlations";
    case ExperimentKind::fclt: return "fclt";
    case ExperimentKind::chernoff: return "chernoff";
    case ExperimentKind::poisson: return "poisson";
    case ExperimentKind::bounds: return "bounds";
    case ExperimentKind::validate_lemmas: return "validate-lemmas";
  }
  return "?";
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_real(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("config", what + ": '" + s + "' is not a number");
  return v;
}

std::uint64_t to_uint(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("config", what + ": '" + s + "' is not a nonnegative integer");
  return v;
}

bool to_bool(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("config", what + ": '" + s + "' is not a boolean");
}

// "name(a, b, c)" -> {"name", {"a", "b", "c"}}; plain text -> {"", {}}.
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')') return {"", {}};
  return {trim(t.substr(0, open)), split(t.substr(open + 1, t.size() - open - 2), ',')};
}

// Flat view of the INI tree that remembers which keys were read.
class Sections {
 public:
  explicit Sections(const pt::ptree& tree, std::string path) : path_(std::move(path)) {
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty())
        throw ConfigError("config", path_ + ": key '" + section + "' must live inside a [section]");
      for (const auto& [key, value] : body) values_[section + "." + key] = value.data();
    }
  }

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) throw ConfigError("config", path_ + ": missing mandatory key " + key);
    return *v;
  }

  void check_all_used() const {
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) throw ConfigError("config", path_ + ": unknown key " + key);
  }

 private:
  std::string path_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

template <class T, class Parse>
void read(Sections& s, const std::string& key, T& dst, Parse parse) {
  if (auto v = s.get(key)) dst = parse(*v, key);
}

std::vector<double> real_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_real(item, what));
  return out;
}

std::vector<std::size_t> size_list(const std::string& text, const std::string& what) {
  try {
    const auto v = parse_index_list(text);
    return {v.begin(), v.end()};
  } catch (const ConfigError& e) {
    throw ConfigError("config", what + ": " + e.what());
  }
}

History parse_history(const std::optional<std::string>& prefix, const std::optional<std::string>& tail,
                      Symbol default_tail, const std::string& what) {
  std::vector<Symbol> symbols;
  if (prefix)
    for (const auto& item : split(*prefix, ',')) symbols.push_back(static_cast<Symbol>(to_uint(item, what + "_prefix")));
  const Symbol t = tail ? static_cast<Symbol>(to_uint(*tail, what + "_tail")) : default_tail;
  return History(std::move(symbols), t);
}

ExperimentKind parse_kind(const std::string& s) {
  const std::string t = trim(s);
  for (auto k : {ExperimentKind::mixing, ExperimentKind::correlations, ExperimentKind::fclt, ExperimentKind::chernoff,
                 ExperimentKind::poisson, ExperimentKind::bounds, ExperimentKind::validate_lemmas})
    if (t == to_string(k)) return k;
  throw ConfigError("config", "experiment.kind: unknown kind '" + s + "'");
}

void load_model(Sections& s, ExperimentConfig& cfg) {
  const auto type = s.get("model.type");
  if (!type) {
    if (cfg.kind == ExperimentKind::validate_lemmas) return;
    throw ConfigError("config", "missing mandatory key model.type");
  }
  const std::string t = trim(*type);
  if (t == "iid") {
    cfg.model = PotentialModel::iid(real_list(s.require("model.p"), "model.p"));
  } else if (t == "markov") {
    const auto a = to_uint(s.require("model.alphabet"), "model.alphabet");
    const auto m = to_uint(s.require("model.order"), "model.order");
    cfg.model = PotentialModel::markov(a, m, real_list(s.require("model.table"), "model.table"));
  } else if (t == "long-memory") {
    cfg.model = PotentialModel::long_memory(to_real(s.require("model.eps0"), "model.eps0"),
                                            to_real(s.require("model.delta"), "model.delta"),
                                            to_uint(s.require("model.k_max"), "model.k_max"));
  } else if (t == "poisson-ar") {
    const auto cutoff = to_uint(s.require("model.cutoff"), "model.cutoff");
    if (cutoff < 1) throw ConfigError("config", "model.cutoff must be >= 1");
    const auto beta = parse_real_sequence(s.require("model.beta"), cutoff);
    const auto gamma_real = parse_real_sequence(s.require("model.gamma"), cutoff);
    if (beta.size() != cutoff || gamma_real.size() != cutoff)
      throw ConfigError("config", "model.beta and model.gamma need exactly `cutoff` terms");
    std::vector<std::uint32_t> gamma;
    for (double g : gamma_real) {
      if (!(g >= 0.0) || g != std::floor(g) || g > 4e9)
        throw ConfigError("config", "model.gamma entries must be nonnegative integers");
      gamma.push_back(static_cast<std::uint32_t>(g));
    }
    double tol = 1e-12;
    double delta = 0.5;
    read(s, "model.tail_mass_tol", tol, to_real);
    read(s, "model.delta", delta, to_real);
    cfg.model = PotentialModel::poisson_ar(beta, std::move(gamma), tol, delta);
  } else if (t == "profile") {
    RegularityProfile p;
    p.chi2_C = to_real(s.require("model.chi2_C"), "model.chi2_C");
    p.chi2_delta = to_real(s.require("model.chi2_delta"), "model.chi2_delta");
    if (auto v = s.get("model.chi2_zero")) p.chi2_zero = to_real(*v, "model.chi2_zero");
    if (auto v = s.get("model.explicit_chi2")) p.explicit_chi2 = real_list(*v, "model.explicit_chi2");
    read(s, "model.exhaustive", p.explicit_exhaustive, to_bool);
    p.validate();
    cfg.profile = p;
    return;
  } else {
    throw ConfigError("config", "model.type: unknown model '" + t + "'");
  }
  cfg.profile = cfg.model->regularity();
}

}  // namespace

std::vector<std::uint64_t> parse_index_list(const std::string& text) {
  const std::string t = trim(text);
  const auto [name, args] = parse_call(t);
  std::vector<std::uint64_t> out;
  if (name == "logspace") {
    if (args.size() != 3) throw ConfigError("config", "logspace needs (first, last, count)");
    const double a = to_real(args[0], "logspace"), b = to_real(args[1], "logspace");
    const auto m = to_uint(args[2], "logspace");
    if (!(a >= 1.0) || !(b > a) || m < 2) throw ConfigError("config", "logspace needs 1 <= first < last, count >= 2");
    for (std::uint64_t i = 0; i < m; ++i) {
      const double x = std::exp(std::log(a) + (std::log(b) - std::log(a)) * static_cast<double>(i) / static_cast<double>(m - 1));
      const auto v = static_cast<std::uint64_t>(std::llround(x));
      if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
  }
  if (!name.empty()) throw ConfigError("config", "unknown index family '" + name + "'");
  for (const auto& item : split(t, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_uint(item, "index list"));
      continue;
    }
    const auto lo = to_uint(item.substr(0, dots), "index range");
    const auto hi = to_uint(item.substr(dots + 2), "index range");
    if (hi < lo) throw ConfigError("config", "index range '" + item + "' is empty");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config", "empty index list");
  return out;
}

std::vector<double> parse_real_sequence(const std::string& text, std::size_t length) {
  const auto [name, args] = parse_call(text);
  if (name.empty()) return real_list(text, "sequence");
  std::vector<double> a;
  for (const auto& s : args) a.push_back(to_real(s, name));
  std::vector<double> out(length);
  if (name == "power" && a.size() == 2) {
    for (std::size_t i = 0; i < length; ++i) out[i] = a[0] * std::pow(static_cast<double>(i + 1), -a[1]);
  } else if (name == "geometric" && a.size() == 2) {
    for (std::size_t i = 0; i < length; ++i) out[i] = a[0] * std::pow(a[1], static_cast<double>(i));
  } else if (name == "constant" && a.size() == 1) {
    std::fill(out.begin(), out.end(), a[0]);
  } else {
    throw ConfigError("config", "unknown sequence family '" + name + "' (power(c,s), geometric(c,r), constant(v))");
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& path) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Sections s(tree, path);
  ExperimentConfig cfg;

  cfg.kind = parse_kind(s.require("experiment.kind"));
  cfg.seed = to_uint(s.require("experiment.seed"), "experiment.seed");
  read(s, "experiment.replicates", cfg.replicates, to_uint);
  if (auto v = s.get("experiment.threads")) cfg.threads = static_cast<int>(to_uint(*v, "experiment.threads"));
  read(s, "experiment.self_check", cfg.self_check, to_bool);
  if (auto v = s.get("experiment.output")) cfg.output_dir = trim(*v);
  if (cfg.replicates < 1) throw ConfigError("config", "experiment.replicates must be >= 1");

  load_model(s, cfg);

  read(s, "coupling.beta", cfg.beta, to_real);
  if (auto v = s.get("coupling.mode")) {
    const std::string m = trim(*v);
    if (m == "block-maximal")
      cfg.mode = BlockMaximal{};
    else if (m == "coordinate-sequential")
      cfg.mode = CoordinateSequential{};
    else
      throw ConfigError("config", "coupling.mode: unknown mode '" + m + "'");
  }
  if (auto v = s.get("coupling.max_block_states")) {
    if (auto* bm = std::get_if<BlockMaximal>(&cfg.mode)) bm->max_block_states = to_uint(*v, "coupling.max_block_states");
  }
  read(s, "coupling.blocks", cfg.blocks, to_uint);
  cfg.y = parse_history(s.get("coupling.y_prefix"), s.get("coupling.y_tail"), 0, "coupling.y");
  cfg.z = parse_history(s.get("coupling.z_prefix"), s.get("coupling.z_tail"), 1, "coupling.z");
  if (auto v = s.get("coupling.coords")) cfg.coords = parse_index_list(*v);

  read(s, "bounds.n_max", cfg.n_max, to_uint);
  read(s, "bounds.fit_lo", cfg.fit_lo, to_uint);
  read(s, "bounds.fit_hi", cfg.fit_hi, to_uint);
  read(s, "bounds.scan_width", cfg.scan_width, to_uint);
  read(s, "bounds.slope_tol", cfg.slope_tol, to_real);

  if (auto v = s.get("analysis.lags")) cfg.lags = size_list(*v, "analysis.lags");
  read(s, "analysis.burn_in", cfg.burn_in, to_uint);
  read(s, "analysis.path_len", cfg.path_len, to_uint);
  read(s, "analysis.n", cfg.n, to_uint);
  if (auto v = s.get("analysis.n_list")) cfg.n_list = size_list(*v, "analysis.n_list");
  read(s, "analysis.t", cfg.t, to_real);
  if (auto v = s.get("analysis.h")) cfg.h = real_list(*v, "analysis.h");
  if (auto v = s.get("analysis.f")) cfg.f = real_list(*v, "analysis.f");
  if (auto v = s.get("analysis.fhat")) cfg.fhat = real_list(*v, "analysis.fhat");
  if (auto v = s.get("analysis.known_mean")) cfg.known_mean = to_real(*v, "analysis.known_mean");
  read(s, "analysis.delta_prime", cfg.delta_prime, to_real);
  read(s, "analysis.ks_tol", cfg.ks_tol, to_real);
  read(s, "analysis.rate_tol", cfg.rate_tol, to_real);
  read(s, "analysis.min_resolvable_z", cfg.min_resolvable_z, to_real);

  read(s, "poisson.k_lo", cfg.k_lo, to_uint);
  read(s, "poisson.k_hi", cfg.k_hi, to_uint);
  read(s, "poisson.n_contexts", cfg.n_contexts, to_uint);
  read(s, "poisson.empirical_points", cfg.empirical_points, to_uint);
  read(s, "poisson.normalization_histories", cfg.normalization_histories, to_uint);
  read(s, "poisson.expected_slope", cfg.expected_slope, to_real);
  read(s, "poisson.expected_slope_tol", cfg.expected_slope_tol, to_real);

  read(s, "lemmas.samples", cfg.lemalg_samples, to_uint);
  read(s, "lemmas.hj1_k_max", cfg.hj1_k_max, to_uint);
  read(s, "lemmas.hj1_n_max", cfg.hj1_n_max, to_uint);
  read(s, "lemmas.hj2_k_max", cfg.hj2_k_max, to_uint);

  s.check_all_used();

  if (cfg.model) {
    cfg.y.validate(cfg.model->alphabet());
    cfg.z.validate(cfg.model->alphabet());
  }
  if (!(cfg.beta >= 1.0)) throw ConfigError("config", "coupling.beta must be >= 1");
  if (cfg.kind == ExperimentKind::bounds && !cfg.profile.is_zero() && !(cfg.beta * cfg.profile.chi2_delta > 1.0))
    throw ConfigError("config", "bound experiments need coupling.beta > 1/delta");
  const bool needs_model = cfg.kind != ExperimentKind::bounds && cfg.kind != ExperimentKind::validate_lemmas;
  if (needs_model && !cfg.model) throw ConfigError("config", "experiment kind needs a concrete model, not a profile");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace gmix
