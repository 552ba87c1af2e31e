#include "amctl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "amctl/hash.hpp"

namespace amctl {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"model", "modes", ConfigType::integer, "number of retained modes N"},
      {"model", "horizon", ConfigType::real, "time horizon c"},
      {"model", "spectrum", ConfigType::string, "\"dirichlet\" (a_n = -n^2) or \"list\""},
      {"model", "eigenvalues", ConfigType::list, "negative, non-increasing; with spectrum = \"list\""},
      {"model", "kernel", ConfigType::string, "\"zero\" or \"exponential\""},
      {"model", "kernel_amplitude", ConfigType::real, "beta in beta exp(-alpha t)"},
      {"model", "kernel_decay", ConfigType::real, "alpha > 0"},
      {"model", "control", ConfigType::string, "\"example\" (mixing) or \"identity\""},
      {"model", "noise", ConfigType::string, "\"inverse_square\" (scale / k^2) or \"list\""},
      {"model", "noise_scale", ConfigType::real, "scale of the inverse-square variances"},
      {"model", "noise_variances", ConfigType::list, "lambda_k > 0; with noise = \"list\""},
      {"model", "f", ConfigType::string, "\"example\" or \"zero\""},
      {"model", "g", ConfigType::string, "\"example\" or \"zero\""},
      {"model", "zeta", ConfigType::string, "\"example\" or \"zero\""},
      {"model", "envelope", ConfigType::string, "\"safe\" or \"stated\""},
      {"grid", "steps", ConfigType::integer, "number of time steps m"},
      {"experiment", "mode", ConfigType::string, "\"stochastic\" or \"deterministic\""},
      {"experiment", "mu", ConfigType::list, "sweep levels, strictly decreasing"},
      {"experiment", "ac_mu", ConfigType::list, "levels of the linear decay test, decreasing"},
      {"experiment", "mu_fixed", ConfigType::real, "mu for gamma and feasibility runs"},
      {"experiment", "gamma", ConfigType::list, "freezing times as fractions of c, decreasing"},
      {"experiment", "paths", ConfigType::integer, "Monte Carlo paths per level"},
      {"experiment", "seed", ConfigType::integer, "RNG seed (read modulo 2^64)"},
      {"experiment", "target_mean", ConfigType::list, "mean terminal target, length N"},
      {"experiment", "target_loading", ConfigType::real, "b in a + b W_k(c)"},
      {"experiment", "target_mode", ConfigType::integer, "k in a + b W_k(c), 1-based"},
      {"experiment", "radius", ConfigType::real, "ball radius r for the feasibility check"},
      {"experiment", "tol", ConfigType::real, "Picard tolerance"},
      {"experiment", "max_iter", ConfigType::integer, "Picard iteration cap"},
      {"experiment", "damping", ConfigType::real, "Picard relaxation in (0, 1]"},
      {"experiment", "blowup", ConfigType::real, "divergence guard on ||x||^2"},
      {"output", "directory", ConfigType::string, "output directory"},
      {"output", "svg", ConfigType::boolean, "also write SVG plots"},
  };
  return schema;
}

namespace {

const ConfigKey* schema_key(const std::string& section, const std::string& key) {
  for (const ConfigKey& k : config_schema()) {
    if (k.section == section && k.key == key) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  for (const ConfigKey& k : config_schema()) {
    if (k.section == section) return true;
  }
  return false;
}

const char* type_name(ConfigType t) {
  switch (t) {
    case ConfigType::integer:
      return "integer";
    case ConfigType::real:
      return "float";
    case ConfigType::boolean:
      return "bool";
    case ConfigType::string:
      return "string";
    case ConfigType::list:
      break;
  }
  return "list";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class LineError {
 public:
  LineError(const std::string& source, int line) : prefix_(source + ":" + std::to_string(line)) {}
  [[noreturn]] void raise(const std::string& msg) const { throw ConfigError(prefix_ + ": " + msg); }

 private:
  std::string prefix_;
};

// Strips a trailing comment outside string literals.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (in_string && line[i] == '\\') {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (!in_string && line[i] == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool parse_number(std::string_view text, ConfigValue& out) {
  if (text.empty()) return false;
  const bool real = text.find_first_of(".eE") != std::string_view::npos ||
                    text.find("inf") != std::string_view::npos ||
                    text.find("nan") != std::string_view::npos;
  std::string_view digits = text.front() == '+' ? text.substr(1) : text;
  const char* end = digits.data() + digits.size();
  if (real) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), end, v);
    if (ec != std::errc() || ptr != end) return false;
    out = v;
  } else {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), end, v);
    if (ec != std::errc() || ptr != end) return false;
    out = v;
  }
  return true;
}

ConfigValue parse_value(std::string_view text, const LineError& err) {
  if (text.empty()) err.raise("missing value");
  if (text.front() == '"') {
    std::string s;
    std::size_t i = 1;
    for (; i < text.size() && text[i] != '"'; ++i) {
      if (text[i] == '\\') {
        if (++i == text.size()) break;
        switch (text[i]) {
          case '"':
          case '\\':
            s.push_back(text[i]);
            break;
          case 'n':
            s.push_back('\n');
            break;
          case 't':
            s.push_back('\t');
            break;
          default:
            err.raise(std::string("unknown escape \\") + text[i]);
        }
      } else {
        s.push_back(text[i]);
      }
    }
    if (i >= text.size()) err.raise("unterminated string");
    if (!trim(text.substr(i + 1)).empty()) err.raise("trailing characters after string");
    return s;
  }
  if (text.front() == '[') {
    if (text.back() != ']') err.raise("unterminated list");
    std::vector<double> items;
    std::string_view body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const std::size_t comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      ConfigValue v;
      if (!parse_number(item, v)) err.raise("list items must be numbers: '" + std::string(item) + "'");
      items.push_back(std::holds_alternative<double>(v) ? std::get<double>(v)
                                                         : static_cast<double>(std::get<std::int64_t>(v)));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) err.raise("trailing comma in list");
    }
    return items;
  }
  if (text == "true") return true;
  if (text == "false") return false;
  ConfigValue v;
  if (!parse_number(text, v)) err.raise("cannot parse value '" + std::string(text) + "'");
  return v;
}

// Coerces to the declared type; integer literals widen to float.
bool coerce(ConfigType type, ConfigValue& v) {
  switch (type) {
    case ConfigType::integer:
      return std::holds_alternative<std::int64_t>(v);
    case ConfigType::real:
      if (std::holds_alternative<std::int64_t>(v)) v = static_cast<double>(std::get<std::int64_t>(v));
      return std::holds_alternative<double>(v);
    case ConfigType::boolean:
      return std::holds_alternative<bool>(v);
    case ConfigType::string:
      return std::holds_alternative<std::string>(v);
    case ConfigType::list:
      break;
  }
  return std::holds_alternative<std::vector<double>>(v);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_value(const ConfigValue& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (auto* d = std::get_if<double>(&v)) return format_real(*d);
  if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (auto* s = std::get_if<std::string>(&v)) {
    std::string out = "\"";
    for (char ch : *s) {
      if (ch == '"' || ch == '\\') {
        out += '\\';
        out += ch;
      } else if (ch == '\n') {
        out += "\\n";
      } else if (ch == '\t') {
        out += "\\t";
      } else {
        out += ch;
      }
    }
    return out + "\"";
  }
  const auto& list = std::get<std::vector<double>>(v);
  std::string out = "[";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out += ", ";
    out += format_real(list[i]);
  }
  return out + "]";
}

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    const LineError err(cfg.source_, line_no);
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') err.raise("malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section)) err.raise("unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) err.raise("expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (section.empty()) err.raise("key '" + key + "' outside any section");
    const ConfigKey* spec = schema_key(section, key);
    if (spec == nullptr) err.raise("unknown key '" + key + "' in section [" + section + "]");
    if (cfg.values_.count({section, key})) err.raise("duplicate key " + section + "." + key);
    ConfigValue value = parse_value(trim(line.substr(eq + 1)), err);
    if (!coerce(spec->type, value)) {
      err.raise(section + "." + key + " must be of type " + type_name(spec->type));
    }
    cfg.values_[{section, key}] = Entry{std::move(value), line_no};
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

std::string Config::serialize() const {
  std::string out;
  std::string section;
  for (const ConfigKey& k : config_schema()) {
    const Entry* e = find(k.section, k.key);
    if (e == nullptr) continue;
    if (k.section != section) {
      if (!out.empty()) out += "\n";
      out += "[" + k.section + "]\n";
      section = k.section;
    }
    out += k.key + " = " + format_value(e->value) + "\n";
  }
  return out;
}

std::string Config::hash() const { return hex64(fnv1a64(serialize())); }

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  auto it = values_.find({section, key});
  return it == values_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  const Entry* e = find(section, key);
  return e ? std::get<std::int64_t>(e->value) : fallback;
}

double Config::get_real(const std::string& section, const std::string& key,
                        double fallback) const {
  const Entry* e = find(section, key);
  return e ? std::get<double>(e->value) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  return e ? std::get<bool>(e->value) : fallback;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? std::get<std::string>(e->value) : fallback;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  return e ? std::get<std::vector<double>>(e->value) : fallback;
}

void Config::set(const std::string& section, const std::string& key, ConfigValue value) {
  const ConfigKey* spec = schema_key(section, key);
  if (spec == nullptr) throw ConfigError("unknown key " + section + "." + key);
  if (!coerce(spec->type, value)) {
    throw ConfigError(section + "." + key + " must be of type " + type_name(spec->type));
  }
  values_[{section, key}] = Entry{std::move(value), 0};
}

std::string Config::where(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr || e->line == 0) return source_;
  return source_ + ":" + std::to_string(e->line);
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bad(const Config& cfg, const std::string& section, const std::string& key,
                      const std::string& msg) {
  throw ConfigError(cfg.where(section, key) + ": " + section + "." + key + " " + msg);
}

std::string choice(const Config& cfg, const std::string& section, const std::string& key,
                   const std::string& fallback, std::initializer_list<const char*> allowed) {
  const std::string v = cfg.get_string(section, key, fallback);
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  bad(cfg, section, key, "must be one of: " + list + " (got \"" + v + "\")");
}

ScalarMap scalar_map(const Config& cfg, const std::string& key) {
  return choice(cfg, "model", key, "example", {"example", "zero"}) == "example"
             ? ScalarMap::example()
             : ScalarMap::zero();
}

}  // namespace

int build_steps(const Config& cfg) {
  const std::int64_t m = cfg.get_int("grid", "steps", 1000);
  if (m < 2 || m > 10'000'000) bad(cfg, "grid", "steps", "must lie in [2, 1e7]");
  return static_cast<int>(m);
}

SpectralModel build_model(const Config& cfg) {
  const std::int64_t modes = cfg.get_int("model", "modes", 8);
  if (modes < 1 || modes > 100'000) bad(cfg, "model", "modes", "must lie in [1, 1e5]");
  const int n = static_cast<int>(modes);

  const double c = cfg.get_real("model", "horizon", 1.0);
  if (!(c > 0.0) || !std::isfinite(c)) bad(cfg, "model", "horizon", "must be positive");

  std::vector<double> eigenvalues;
  if (choice(cfg, "model", "spectrum", "dirichlet", {"dirichlet", "list"}) == "dirichlet") {
    eigenvalues = dirichlet_laplacian_eigenvalues(n);
  } else {
    eigenvalues = cfg.get_list("model", "eigenvalues", {});
    if (static_cast<int>(eigenvalues.size()) != n) {
      bad(cfg, "model", "eigenvalues", "must have exactly model.modes entries");
    }
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
      if (!(eigenvalues[i] < 0.0) || !std::isfinite(eigenvalues[i])) {
        bad(cfg, "model", "eigenvalues", "entries must be negative and finite");
      }
      if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) {
        bad(cfg, "model", "eigenvalues", "must be non-increasing");
      }
    }
  }

  MemoryKernel kernel = MemoryKernel::zero();
  if (choice(cfg, "model", "kernel", "exponential", {"zero", "exponential"}) == "exponential") {
    const double amp = cfg.get_real("model", "kernel_amplitude", 1.0);
    const double decay = cfg.get_real("model", "kernel_decay", 1.0);
    if (!std::isfinite(amp)) bad(cfg, "model", "kernel_amplitude", "must be finite");
    if (!(decay > 0.0) || !std::isfinite(decay)) {
      bad(cfg, "model", "kernel_decay", "must be positive");
    }
    kernel = MemoryKernel::exponential(amp, decay);
  }

  const auto kind = choice(cfg, "model", "control", "example", {"example", "identity"}) == "example"
                        ? ControlOperatorSpec::Kind::example
                        : ControlOperatorSpec::Kind::identity;
  if (kind == ControlOperatorSpec::Kind::example && n < 2) {
    bad(cfg, "model", "control", "\"example\" needs model.modes >= 2");
  }

  std::vector<double> variances;
  if (choice(cfg, "model", "noise", "inverse_square", {"inverse_square", "list"}) ==
      "inverse_square") {
    const double scale = cfg.get_real("model", "noise_scale", 1.0);
    if (!(scale > 0.0) || !std::isfinite(scale)) bad(cfg, "model", "noise_scale", "must be positive");
    variances = QWienerSpec::inverse_square(n, scale).mode_variances();
  } else {
    variances = cfg.get_list("model", "noise_variances", {});
    if (static_cast<int>(variances.size()) != n) {
      bad(cfg, "model", "noise_variances", "must have exactly model.modes entries");
    }
    for (double v : variances) {
      if (!(v > 0.0) || !std::isfinite(v)) bad(cfg, "model", "noise_variances", "entries must be positive");
    }
  }

  NonlinearitySpec nl{scalar_map(cfg, "f"), scalar_map(cfg, "g"), scalar_map(cfg, "zeta")};
  return SpectralModel(std::move(eigenvalues), kernel, ControlOperatorSpec(kind),
                       QWienerSpec(std::move(variances)), std::move(nl), c);
}

GrowthEnvelope build_envelope(const Config& cfg, const SpectralModel& model) {
  return choice(cfg, "model", "envelope", "safe", {"safe", "stated"}) == "safe"
             ? GrowthEnvelope::example_safe(model.dim())
             : GrowthEnvelope::stated();
}

SteeringTarget build_target(const Config& cfg, const SpectralModel& model) {
  const int n = model.dim();
  std::vector<double> fallback(n);
  for (int i = 0; i < n; ++i) fallback[i] = 1.0 / (i + 1);
  const std::vector<double> mean = cfg.get_list("experiment", "target_mean", fallback);
  if (static_cast<int>(mean.size()) != n) {
    bad(cfg, "experiment", "target_mean", "must have exactly model.modes entries");
  }
  for (double v : mean) {
    if (!std::isfinite(v)) bad(cfg, "experiment", "target_mean", "entries must be finite");
  }
  const double loading = cfg.get_real("experiment", "target_loading", 0.5);
  if (!std::isfinite(loading)) bad(cfg, "experiment", "target_loading", "must be finite");
  const std::int64_t mode = cfg.get_int("experiment", "target_mode", 1);
  if (mode < 1 || mode > n) bad(cfg, "experiment", "target_mode", "must lie in [1, model.modes]");
  return SteeringTarget::affine(Eigen::Map<const SpectralField>(mean.data(), n), loading,
                                static_cast<int>(mode));
}

SolveOptions build_solve_options(const Config& cfg, double horizon) {
  SolveOptions o;
  o.tol = cfg.get_real("experiment", "tol", o.tol);
  if (!(o.tol > 0.0)) bad(cfg, "experiment", "tol", "must be positive");
  const std::int64_t it = cfg.get_int("experiment", "max_iter", o.max_iter);
  if (it < 1 || it > 1'000'000) bad(cfg, "experiment", "max_iter", "must lie in [1, 1e6]");
  o.max_iter = static_cast<int>(it);
  o.damping = cfg.get_real("experiment", "damping", o.damping);
  if (!(o.damping > 0.0 && o.damping <= 1.0)) bad(cfg, "experiment", "damping", "must lie in (0, 1]");
  o.blowup = cfg.get_real("experiment", "blowup", o.blowup);
  if (!(o.blowup > 0.0)) bad(cfg, "experiment", "blowup", "must be positive");
  o.validate(horizon);
  return o;
}

SweepConfig build_sweep_config(const Config& cfg) {
  SpectralModel model = build_model(cfg);
  GrowthEnvelope envelope = build_envelope(cfg, model);
  SteeringTarget target = build_target(cfg, model);
  SolveOptions solve = build_solve_options(cfg, model.horizon());

  const std::vector<double> mu = cfg.get_list("experiment", "mu", {1.0, 1e-1, 1e-2, 1e-3});
  if (mu.empty()) bad(cfg, "experiment", "mu", "must not be empty");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0) || (i > 0 && !(mu[i] < mu[i - 1]))) {
      bad(cfg, "experiment", "mu", "must be positive and strictly decreasing");
    }
  }
  const std::vector<double> ac_mu =
      cfg.get_list("experiment", "ac_mu", {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  if (ac_mu.size() < 2) bad(cfg, "experiment", "ac_mu", "needs at least two levels");
  for (std::size_t i = 0; i < ac_mu.size(); ++i) {
    if (!(ac_mu[i] > 0.0) || (i > 0 && !(ac_mu[i] < ac_mu[i - 1]))) {
      bad(cfg, "experiment", "ac_mu", "must be positive and strictly decreasing");
    }
  }
  const std::int64_t paths = cfg.get_int("experiment", "paths", 200);
  if (paths < 1 || paths > 10'000'000) bad(cfg, "experiment", "paths", "must lie in [1, 1e7]");
  const bool deterministic =
      choice(cfg, "experiment", "mode", "stochastic", {"stochastic", "deterministic"}) ==
      "deterministic";

  SweepConfig sc{std::move(model),
                 build_steps(cfg),
                 mu,
                 deterministic ? 1 : static_cast<int>(paths),
                 std::move(target),
                 deterministic ? SweepMode::deterministic : SweepMode::stochastic,
                 static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", 0)),
                 solve,
                 envelope,
                 ac_mu};
  return sc;
}

GammaStudyConfig build_gamma_config(const Config& cfg) {
  SweepConfig base = build_sweep_config(cfg);
  const double mu = cfg.get_real("experiment", "mu_fixed", 1e-2);
  if (!(mu > 0.0) || !std::isfinite(mu)) bad(cfg, "experiment", "mu_fixed", "must be positive");
  base.mu_list = {mu};
  const std::vector<double> fractions =
      cfg.get_list("experiment", "gamma", {0.4, 0.2, 0.1, 0.05});
  if (fractions.empty()) bad(cfg, "experiment", "gamma", "must not be empty");
  std::vector<double> gamma;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] < 1.0) ||
        (i > 0 && !(fractions[i] < fractions[i - 1]))) {
      bad(cfg, "experiment", "gamma", "fractions must be strictly decreasing in (0, 1)");
    }
    gamma.push_back(fractions[i] * base.model.horizon());
  }
  return {std::move(base), std::move(gamma)};
}

}  // namespace amctl
