#include "tumorlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tumorlab/format.hpp"

namespace tumorlab {

ConfigError::ConfigError(const std::string& message, std::size_t line, std::string field)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line),
      field_(std::move(field)) {}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

Grid GridConfig::build() const {
  return Grid::build(dims, lengths, resolution);
}

SchemeOptions TimeConfig::scheme() const {
  SchemeOptions s;
  s.stabilization = stabilization;
  s.energy_guard = guard;
  s.max_retries = max_retries;
  s.exchange_substeps = exchange_substeps;
  s.mode_cutoff = mode_cutoff;
  return s;
}

namespace {

// Value conversions. Each throws std::invalid_argument with a short reason.

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("'" + s + "' is not a valid number");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("'" + s + "' is not a boolean (use true or false)");
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list");
  return out;
}

bool is_none(const std::string& s) { return trim(s) == "none"; }

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <class E>
E parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, E>> table) {
  const std::string s = trim(text);
  std::string options;
  for (const auto& [name, value] : table) {
    if (s == name) return value;
    options += options.empty() ? name : std::string(", ") + name;
  }
  throw std::invalid_argument("'" + s + "' is not one of " + options);
}

template <class E>
std::string enum_name(E value, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, PotentialFamily>> kPotential{
    {"quartic", PotentialFamily::QuarticDoubleWell}, {"polynomial", PotentialFamily::CustomPolynomial}};
const std::initializer_list<std::pair<const char*, ProliferationFamily>> kProliferation{
    {"constant", ProliferationFamily::Constant},
    {"rational_bump", ProliferationFamily::RationalBump},
    {"polynomial", ProliferationFamily::Polynomial}};
const std::initializer_list<std::pair<const char*, ProliferationMode>> kMode{{"P1", ProliferationMode::P1},
                                                                              {"P2", ProliferationMode::P2}};
const std::initializer_list<std::pair<const char*, MobilityFamily>> kMobility{{"unit", MobilityFamily::Unit},
                                                                               {"bounded", MobilityFamily::Bounded}};

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  /// nullopt when the key is unset and should be omitted.
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

#define TL_KEY(sec, key, setter, getter)                                                \
  Key {                                                                                 \
    sec, key, [](RunConfig& c, const std::string& v) { setter; },                      \
        [](const RunConfig& c) -> std::optional<std::string> { return getter; }         \
  }

// Application order matters: a family key resets the spec before the
// individual fields are applied.
const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      TL_KEY("grid", "dims", c.grid.dims = parse_number<int>(v), std::to_string(c.grid.dims)),
      TL_KEY("grid", "lengths", c.grid.lengths = parse_list<double>(v), join(c.grid.lengths)),
      TL_KEY("grid", "resolution", c.grid.resolution = parse_list<int>(v), join(c.grid.resolution)),

      TL_KEY("model", "chi_phi", c.model.chi_phi = parse_number<double>(v), format_double(c.model.chi_phi)),
      TL_KEY("model", "chi_sigma", c.model.chi_sigma = parse_number<double>(v), format_double(c.model.chi_sigma)),
      TL_KEY("model", "potential",
             {
               const auto fam = parse_enum(v, kPotential);
               if (fam == PotentialFamily::QuarticDoubleWell) c.model.psi = quartic_double_well();
               c.model.psi.family = fam;
             },
             enum_name(c.model.psi.family, kPotential)),
      TL_KEY("model", "psi0", c.model.psi.psi0.coefficients = parse_list<double>(v),
             join(c.model.psi.psi0.coefficients)),
      TL_KEY("model", "lambda", c.model.psi.lambda.coefficients = parse_list<double>(v),
             join(c.model.psi.lambda.coefficients)),
      TL_KEY("model", "cutoff",
             {
               if (is_none(v)) {
                 c.model.psi.cutoff.reset();
               } else {
                 c.model.psi = truncate_potential(c.model.psi, parse_number<double>(v));
               }
             },
             c.model.psi.cutoff ? std::optional<std::string>(format_double(*c.model.psi.cutoff)) : std::nullopt),
      TL_KEY("model", "rho", c.model.psi.rho = parse_number<double>(v), format_double(c.model.psi.rho)),
      TL_KEY("model", "c1", c.model.psi.c1 = parse_number<double>(v), format_double(c.model.psi.c1)),
      TL_KEY("model", "c2", c.model.psi.c2 = parse_number<double>(v), format_double(c.model.psi.c2)),
      TL_KEY("model", "alpha", c.model.psi.alpha = parse_number<double>(v), format_double(c.model.psi.alpha)),
      TL_KEY("model", "R1", c.model.psi.R1 = parse_number<double>(v), format_double(c.model.psi.R1)),
      TL_KEY("model", "R2", c.model.psi.R2 = parse_number<double>(v), format_double(c.model.psi.R2)),
      TL_KEY("model", "proliferation", c.model.p.family = parse_enum(v, kProliferation),
             enum_name(c.model.p.family, kProliferation)),
      TL_KEY("model", "p0", c.model.p.p0 = parse_number<double>(v), format_double(c.model.p.p0)),
      TL_KEY("model", "delta", c.model.p.delta = parse_number<double>(v), format_double(c.model.p.delta)),
      TL_KEY("model", "p_poly", c.model.p.poly.coefficients = parse_list<double>(v),
             c.model.p.poly.coefficients.empty() ? std::nullopt
                                                 : std::optional<std::string>(join(c.model.p.poly.coefficients))),
      TL_KEY("model", "q", c.model.p.q = parse_number<double>(v), format_double(c.model.p.q)),
      TL_KEY("model", "p_mode", c.model.p.mode = parse_enum(v, kMode), enum_name(c.model.p.mode, kMode)),
      TL_KEY("model", "c3", c.model.p.c3 = parse_number<double>(v), format_double(c.model.p.c3)),
      TL_KEY("model", "c4", c.model.p.c4 = parse_number<double>(v), format_double(c.model.p.c4)),
      TL_KEY("model", "mobility_m", c.model.mobility_m.family = parse_enum(v, kMobility),
             enum_name(c.model.mobility_m.family, kMobility)),
      TL_KEY("model", "m_lower", c.model.mobility_m.lower = parse_number<double>(v),
             format_double(c.model.mobility_m.lower)),
      TL_KEY("model", "m_upper", c.model.mobility_m.upper = parse_number<double>(v),
             format_double(c.model.mobility_m.upper)),
      TL_KEY("model", "mobility_n", c.model.mobility_n.family = parse_enum(v, kMobility),
             enum_name(c.model.mobility_n.family, kMobility)),
      TL_KEY("model", "n_lower", c.model.mobility_n.lower = parse_number<double>(v),
             format_double(c.model.mobility_n.lower)),
      TL_KEY("model", "n_upper", c.model.mobility_n.upper = parse_number<double>(v),
             format_double(c.model.mobility_n.upper)),

      TL_KEY("initial", "generator", c.initial.generator = initial_generator_from_string(trim(v)),
             to_string(c.initial.generator)),
      TL_KEY("initial", "phi_mean", c.initial.phi_mean = parse_number<double>(v), format_double(c.initial.phi_mean)),
      TL_KEY("initial", "phi_amplitude", c.initial.phi_amplitude = parse_number<double>(v),
             format_double(c.initial.phi_amplitude)),
      TL_KEY("initial", "sigma_mean", c.initial.sigma_mean = parse_number<double>(v),
             format_double(c.initial.sigma_mean)),
      TL_KEY("initial", "sigma_amplitude", c.initial.sigma_amplitude = parse_number<double>(v),
             format_double(c.initial.sigma_amplitude)),
      TL_KEY("initial", "radius", c.initial.radius = parse_number<double>(v), format_double(c.initial.radius)),
      TL_KEY("initial", "width", c.initial.width = parse_number<double>(v), format_double(c.initial.width)),
      TL_KEY("initial", "count", c.initial.count = parse_number<int>(v), std::to_string(c.initial.count)),
      TL_KEY("initial", "seed", c.initial.seed = parse_number<std::uint64_t>(v), std::to_string(c.initial.seed)),

      TL_KEY("time", "T", c.time.T = parse_number<double>(v), format_double(c.time.T)),
      TL_KEY("time", "dt", c.time.dt = parse_number<double>(v), format_double(c.time.dt)),
      TL_KEY("time", "guard", c.time.guard = parse_bool(v), fmt_bool(c.time.guard)),
      TL_KEY("time", "max_retries", c.time.max_retries = parse_number<int>(v), std::to_string(c.time.max_retries)),
      TL_KEY("time", "exchange_substeps", c.time.exchange_substeps = parse_number<int>(v),
             std::to_string(c.time.exchange_substeps)),
      TL_KEY("time", "stabilization",
             c.time.stabilization = is_none(v) ? std::nullopt : std::optional<double>(parse_number<double>(v)),
             c.time.stabilization ? std::optional<std::string>(format_double(*c.time.stabilization)) : std::nullopt),
      TL_KEY("time", "mode_cutoff",
             c.time.mode_cutoff =
                 is_none(v) ? std::nullopt : std::optional<std::size_t>(parse_number<std::size_t>(v)),
             c.time.mode_cutoff ? std::optional<std::string>(std::to_string(*c.time.mode_cutoff)) : std::nullopt),
      TL_KEY("time", "snapshot_every", c.time.snapshot_every = parse_number<int>(v),
             std::to_string(c.time.snapshot_every)),

      TL_KEY("output", "directory", c.output.directory = trim(v), c.output.directory),
      TL_KEY("output", "snapshots", c.output.snapshots = parse_bool(v), fmt_bool(c.output.snapshots)),
      TL_KEY("output", "field_csv", c.output.field_csv = parse_bool(v), fmt_bool(c.output.field_csv)),
      TL_KEY("output", "png", c.output.png = parse_bool(v), fmt_bool(c.output.png)),

      TL_KEY("experiment", "epsilon", c.experiment.epsilon = parse_number<double>(v),
             format_double(c.experiment.epsilon)),
      TL_KEY("experiment", "dependence_times", c.experiment.dependence_times = parse_list<double>(v),
             join(c.experiment.dependence_times)),
      TL_KEY("experiment", "dependence_dt", c.experiment.dependence_dt = parse_number<double>(v),
             format_double(c.experiment.dependence_dt)),
      TL_KEY("experiment", "omega_T", c.experiment.omega_T = parse_number<double>(v),
             format_double(c.experiment.omega_T)),
      TL_KEY("experiment", "omega_dt", c.experiment.omega_dt = parse_number<double>(v),
             format_double(c.experiment.omega_dt)),
      TL_KEY("experiment", "velocity_tol", c.experiment.velocity_tol = parse_number<double>(v),
             format_double(c.experiment.velocity_tol)),
      TL_KEY("experiment", "regularity_from", c.experiment.regularity_from = parse_number<double>(v),
             format_double(c.experiment.regularity_from)),
      TL_KEY("experiment", "sanity_bound", c.experiment.sanity_bound = parse_number<double>(v),
             format_double(c.experiment.sanity_bound)),
      TL_KEY("experiment", "sweep_T", c.experiment.sweep_T = parse_number<double>(v),
             format_double(c.experiment.sweep_T)),
      TL_KEY("experiment", "sweep_seeds", c.experiment.sweep_seeds = parse_list<std::uint64_t>(v),
             join(c.experiment.sweep_seeds)),
      TL_KEY("experiment", "decay_times", c.experiment.decay_times = parse_list<double>(v),
             join(c.experiment.decay_times)),
      TL_KEY("experiment", "decay_vectors", c.experiment.decay_vectors = parse_number<std::size_t>(v),
             std::to_string(c.experiment.decay_vectors)),

      TL_KEY("stationary", "M", c.stationary.M = parse_number<double>(v), format_double(c.stationary.M)),
      TL_KEY("stationary", "tol", c.stationary.tol = parse_number<double>(v), format_double(c.stationary.tol)),
      TL_KEY("stationary", "max_iterations", c.stationary.max_iterations = parse_number<std::size_t>(v),
             std::to_string(c.stationary.max_iterations)),
      TL_KEY("stationary", "starts", c.stationary.starts = parse_number<std::size_t>(v),
             std::to_string(c.stationary.starts)),
      TL_KEY("stationary", "amplitude", c.stationary.amplitude = parse_number<double>(v),
             format_double(c.stationary.amplitude)),

      TL_KEY("galerkin", "modes", c.galerkin.modes = parse_number<std::size_t>(v), std::to_string(c.galerkin.modes)),
      TL_KEY("galerkin", "T", c.galerkin.T = parse_number<double>(v), format_double(c.galerkin.T)),
      TL_KEY("galerkin", "sample_dt", c.galerkin.sample_dt = parse_number<double>(v),
             format_double(c.galerkin.sample_dt)),
      TL_KEY("galerkin", "rtol", c.galerkin.rtol = parse_number<double>(v), format_double(c.galerkin.rtol)),
      TL_KEY("galerkin", "atol", c.galerkin.atol = parse_number<double>(v), format_double(c.galerkin.atol)),
      TL_KEY("galerkin", "padding", c.galerkin.padding = parse_number<int>(v), std::to_string(c.galerkin.padding)),
      TL_KEY("galerkin", "crossval_dt", c.galerkin.crossval_dt = parse_number<double>(v),
             format_double(c.galerkin.crossval_dt)),
  };
  return keys;
}

#undef TL_KEY

std::vector<std::string> section_names() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) {
    if (std::find(out.begin(), out.end(), k.section) == out.end()) out.push_back(k.section);
  }
  return out;
}

std::string suggestion(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
  for (const auto& c : candidates) {
    const std::size_t d = levenshtein(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best.empty() ? "" : " (did you mean \"" + best + "\"?)";
}

// Assumption check name -> config field it is reported against.
std::string field_for_check(const std::string& check) {
  static const std::map<std::string, std::string> table{
      {"A1.chi_sigma", "model.chi_sigma"},      {"A1.chi_phi", "model.chi_phi"},
      {"Psi.rho", "model.rho"},                 {"Psi.lambda_curvature", "model.alpha"},
      {"Psi.psi0_bracket", "model.psi0"},       {"Psi.coercivity", "model.R1"},
      {"Psi.chemotaxis_gap", "model.R1"},       {"P.q_range", "model.q"},
      {"M.mobility_m", "model.mobility_m"},     {"M.mobility_n", "model.mobility_n"}};
  const auto it = table.find(check);
  return it != table.end() ? it->second : "model.proliferation";
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field + ": " + message, 0, field);
}

}  // namespace

AssumptionReport validate_config(const RunConfig& c) {
  const auto& g = c.grid;
  require(g.dims >= 1 && g.dims <= 3, "grid.dims", "must be 1, 2 or 3");
  require(g.lengths.size() == static_cast<std::size_t>(g.dims), "grid.lengths", "needs one entry per dimension");
  require(g.resolution.size() == static_cast<std::size_t>(g.dims), "grid.resolution",
          "needs one entry per dimension");
  for (double L : g.lengths) require(L > 0.0, "grid.lengths", "must be positive");
  for (int n : g.resolution) require(n >= 4, "grid.resolution", "needs at least 4 points per axis");

  require(c.time.T >= 0.0, "time.T", "must be nonnegative");
  require(c.time.dt > 0.0, "time.dt", "must be positive");
  require(c.time.max_retries >= 0, "time.max_retries", "must be nonnegative");
  require(c.time.exchange_substeps >= 1, "time.exchange_substeps", "must be at least 1");
  require(c.time.snapshot_every >= 0, "time.snapshot_every", "must be nonnegative");
  require(!c.time.mode_cutoff || *c.time.mode_cutoff >= 1, "time.mode_cutoff", "must be at least 1");

  require(c.initial.count >= 1, "initial.count", "must be at least 1");
  require(c.initial.width > 0.0, "initial.width", "must be positive");
  require(c.initial.radius > 0.0, "initial.radius", "must be positive");
  require(!c.output.directory.empty(), "output.directory", "must not be empty");

  require(c.experiment.epsilon >= 0.0, "experiment.epsilon", "must be nonnegative");
  require(c.experiment.dependence_dt > 0.0, "experiment.dependence_dt", "must be positive");
  require(std::is_sorted(c.experiment.dependence_times.begin(), c.experiment.dependence_times.end()),
          "experiment.dependence_times", "must be increasing");
  require(c.experiment.omega_T > 0.0, "experiment.omega_T", "must be positive");
  require(c.experiment.omega_dt > 0.0, "experiment.omega_dt", "must be positive");
  require(c.experiment.velocity_tol > 0.0, "experiment.velocity_tol", "must be positive");
  require(c.experiment.sweep_T > 0.0, "experiment.sweep_T", "must be positive");
  require(c.experiment.decay_vectors >= 1, "experiment.decay_vectors", "must be at least 1");

  require(c.stationary.tol > 0.0, "stationary.tol", "must be positive");
  require(c.galerkin.modes >= 1, "galerkin.modes", "must be at least 1");
  require(c.galerkin.T >= 0.0, "galerkin.T", "must be nonnegative");
  require(c.galerkin.sample_dt > 0.0, "galerkin.sample_dt", "must be positive");
  require(c.galerkin.rtol > 0.0 && c.galerkin.atol > 0.0, "galerkin.rtol", "tolerances must be positive");
  require(c.galerkin.padding >= 1, "galerkin.padding", "must be at least 1");
  require(c.galerkin.crossval_dt > 0.0, "galerkin.crossval_dt", "must be positive");

  AssumptionReport rep = validate_assumptions(c.model);
  for (const auto& check : rep.checks) {
    if (!check.passed) {
      const std::string field = field_for_check(check.name);
      throw ConfigError(field + ": " + check.detail + " (assumption " + check.name + ")", 0, field);
    }
  }
  return rep;
}

RunConfig parse_config(const std::string& text) {
  const auto& keys = key_table();
  const auto sections = section_names();

  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry> entries;  // "section.key"

  std::istringstream in(text);
  std::string raw, section;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno, "");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        throw ConfigError("unknown section [" + section + "]" + suggestion(section, sections), lineno, section);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", lineno, "");
    if (section.empty()) throw ConfigError("key outside any section", lineno, "");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section + "." + key;

    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const Key& k) { return k.section == section && k.name == key; });
    if (!known) {
      std::vector<std::string> names;
      for (const auto& k : keys) {
        if (k.section == section) names.push_back(k.name);
      }
      throw ConfigError("unknown key \"" + key + "\" in [" + section + "]" + suggestion(key, names), lineno, field);
    }
    if (entries.count(field)) {
      throw ConfigError("duplicate key \"" + key + "\" (first set on line " +
                            std::to_string(entries[field].line) + ")",
                        lineno, field);
    }
    entries[field] = {value, lineno};
  }

  RunConfig cfg;
  for (const auto& k : keys) {
    const auto it = entries.find(k.section + "." + k.name);
    if (it == entries.end()) continue;
    try {
      k.set(cfg, it->second.value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("[" + k.section + "] " + k.name + ": " + e.what(), it->second.line, it->first);
    } catch (const std::out_of_range& e) {
      throw ConfigError("[" + k.section + "] " + k.name + ": value out of range", it->second.line, it->first);
    }
  }

  try {
    cfg.validation = validate_config(cfg);
  } catch (const ConfigError& e) {
    const auto it = entries.find(e.field());
    throw ConfigError(e.what(), it != entries.end() ? it->second.line : 0, e.field());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path, 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : key_table()) {
    const auto value = k.get(config);
    if (!value) continue;
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + *value + "\n";
  }
  return out;
}

}  // namespace tumorlab
