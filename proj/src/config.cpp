#include "minstab/config.hpp"

#include "minstab/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace minstab {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

// Raw key/value table plus the error list shared by every reader below.
class Table {
 public:
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::vector<std::string> errors;

  bool has_section(const std::string& section) const { return sections.count(section) > 0; }

  Entry* find(const std::string& section, const std::string& key) {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  void error(const std::string& section, const std::string& key, int line, const std::string& what) {
    std::ostringstream msg;
    if (line > 0) msg << "line " << line << ": ";
    msg << '[' << section << "] " << key << ": " << what;
    errors.push_back(msg.str());
  }

  void missing(const std::string& section, const std::string& key) {
    error(section, key, 0, "required field is missing");
  }

  std::optional<double> real(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    const auto v = parse_real(e->value);
    if (!v) error(section, key, e->line, "malformed number '" + e->value + "'");
    return v;
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    const auto v = parse_integer(e->value);
    if (!v) error(section, key, e->line, "malformed integer '" + e->value + "'");
    return v;
  }

  std::optional<std::vector<double>> reals(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const std::string& item : split(e->value)) {
      const auto v = parse_real(item);
      if (!v) {
        error(section, key, e->line, "malformed number '" + item + "' in list");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    if (out.empty()) error(section, key, e->line, "empty list");
    return out;
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e) return std::nullopt;
    const std::string v = lower(e->value);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    error(section, key, e->line, "expected a boolean, got '" + e->value + "'");
    return std::nullopt;
  }

  int line_of(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    return e ? e->line : 0;
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
  }

  static std::optional<double> parse_real(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  }

  static std::optional<long long> parse_integer(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
  }
};

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"domain", {"n", "lower", "upper", "resolution"}},
      {"function", {"m", "builtin", "A", "b", "amplitude", "frequency", "phase", "seed", "modes"}},
      {"constants", {"mode", "seed", "tol_eig", "eig_residual", "eig_block", "eig_max_iterations"}},
      {"flow", {"dt_safety", "max_steps", "residual_target", "omega_floor", "scaling", "log_interval",
                "scale_to_criterion", "omega_tolerance"}},
      {"algebra", {"pairs", "count", "seed", "tolerance", "oracle_count"}},
      {"output", {"dir"}},
  };
  return keys;
}

bool is_quadratic_key(const std::string& key) {
  if (key.size() < 2 || key[0] != 'Q') return false;
  return std::all_of(key.begin() + 1, key.end(), [](unsigned char c) { return std::isdigit(c); });
}

Table tokenize(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        table.errors.push_back("line " + std::to_string(line) + ": malformed section header '" + s + "'");
        continue;
      }
      section = lower(trim(s.substr(1, s.size() - 2)));
      if (!known_keys().count(section)) {
        table.errors.push_back("line " + std::to_string(line) + ": unknown section [" + section + "]");
      }
      table.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      table.errors.push_back("line " + std::to_string(line) + ": expected 'key = value', got '" + s + "'");
      continue;
    }
    if (section.empty()) {
      table.errors.push_back("line " + std::to_string(line) + ": key outside of any section");
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    auto& entries = table.sections[section];
    if (entries.count(key)) {
      table.error(section, key, line, "duplicate key");
      continue;
    }
    entries[key] = Entry{trim(s.substr(eq + 1)), line, false};
  }
  return table;
}

void require_positive(Table& t, const std::string& section, const std::string& key, double v) {
  if (!(v > 0.0)) t.error(section, key, t.line_of(section, key), "must be > 0");
}

std::optional<DomainSpec> read_domain(Table& t, bool required) {
  if (!t.has_section("domain")) {
    if (required) t.errors.push_back("[domain] section is missing");
    return std::nullopt;
  }
  DomainSpec d;
  const auto n = t.integer("domain", "n");
  const auto lo = t.reals("domain", "lower");
  const auto hi = t.reals("domain", "upper");
  const auto res = t.reals("domain", "resolution");
  if (!t.line_of("domain", "n")) t.missing("domain", "n");
  if (!t.line_of("domain", "lower")) t.missing("domain", "lower");
  if (!t.line_of("domain", "upper")) t.missing("domain", "upper");
  if (!t.line_of("domain", "resolution")) t.missing("domain", "resolution");
  if (!n || !lo || !hi || !res) return std::nullopt;
  if (*n < 1) {
    t.error("domain", "n", t.line_of("domain", "n"), "must be >= 1");
    return std::nullopt;
  }
  d.n = static_cast<int>(*n);
  bool ok = true;
  // A single value is broadcast to every axis.
  const auto expand = [&](const std::vector<double>& v, const std::string& key) {
    if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(d.n), v[0]);
    if (v.size() != static_cast<std::size_t>(d.n)) {
      t.error("domain", key, t.line_of("domain", key), "expected 1 or n = " + std::to_string(d.n) + " values");
      ok = false;
    }
    return v;
  };
  d.lower = expand(*lo, "lower");
  d.upper = expand(*hi, "upper");
  for (double r : expand(*res, "resolution")) {
    if (r != std::floor(r)) {
      t.error("domain", "resolution", t.line_of("domain", "resolution"), "values must be integers");
      ok = false;
      break;
    }
    d.resolution.push_back(static_cast<int>(r));
  }
  if (!ok) return std::nullopt;
  for (int i = 0; i < d.n; ++i) {
    if (!(d.lower[i] < d.upper[i])) {
      t.error("domain", "lower", t.line_of("domain", "lower"),
              "axis " + std::to_string(i) + " needs lower < upper");
      ok = false;
    }
    if (d.resolution[i] < 5) {
      t.error("domain", "resolution", t.line_of("domain", "resolution"),
              "axis " + std::to_string(i) + " needs at least 5 nodes");
      ok = false;
    }
  }
  return ok ? std::optional<DomainSpec>(d) : std::nullopt;
}

std::optional<Matrix> read_matrix(Table& t, const std::string& key, long rows, long cols) {
  const auto v = t.reals("function", key);
  if (!v) return std::nullopt;
  if (static_cast<long>(v->size()) != rows * cols) {
    t.error("function", key, t.line_of("function", key),
            "expected " + std::to_string(rows * cols) + " values (" + std::to_string(rows) + " x " +
                std::to_string(cols) + ", row-major), got " + std::to_string(v->size()));
    return std::nullopt;
  }
  Matrix out(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) out(i, j) = (*v)[static_cast<std::size_t>(i * cols + j)];
  }
  return out;
}

std::optional<Vector> read_vector(Table& t, const std::string& key, long size) {
  const auto m = read_matrix(t, key, size, 1);
  if (!m) return std::nullopt;
  return Vector(m->col(0));
}

// n is 0 when the domain could not be read.
std::optional<FunctionSpec> read_function(Table& t, bool required, int n) {
  if (!t.has_section("function")) {
    if (required) t.errors.push_back("[function] section is missing");
    return std::nullopt;
  }
  FunctionSpec f;
  const auto m = t.integer("function", "m");
  const auto builtin = t.text("function", "builtin");
  if (!t.line_of("function", "m")) t.missing("function", "m");
  if (!builtin) t.missing("function", "builtin");
  if (m && *m < 1) t.error("function", "m", t.line_of("function", "m"), "must be >= 1");
  if (!m || *m < 1 || !builtin) return std::nullopt;
  f.m = static_cast<int>(*m);
  f.builtin = lower(*builtin);

  static const std::vector<std::string> builtins{"zero", "linear", "quadratic", "sinusoidal", "random_fourier"};
  if (std::find(builtins.begin(), builtins.end(), f.builtin) == builtins.end()) {
    t.error("function", "builtin", t.line_of("function", "builtin"),
            "unknown builtin '" + f.builtin + "' (zero, linear, quadratic, sinusoidal, random_fourier)");
    return std::nullopt;
  }
  if (const auto seed = t.integer("function", "seed")) f.seed = static_cast<std::uint64_t>(*seed);
  if (const auto modes = t.integer("function", "modes")) {
    f.modes = static_cast<int>(*modes);
    if (f.modes < 1) t.error("function", "modes", t.line_of("function", "modes"), "must be >= 1");
  }

  // Q1..Qm live in the same section; they are validated below once n is known.
  std::vector<std::string> qkeys;
  if (auto s = t.sections.find("function"); s != t.sections.end()) {
    for (const auto& [key, entry] : s->second) {
      if (is_quadratic_key(key)) qkeys.push_back(key);
    }
  }
  if (n == 0) {
    for (const auto& key : {"A", "b", "amplitude", "frequency", "phase"}) t.find("function", key);
    for (const auto& key : qkeys) t.find("function", key);
    return f;
  }

  const int dim = n;
  if (t.line_of("function", "A")) f.a = read_matrix(t, "A", f.m, dim);
  if (t.line_of("function", "b")) f.b = read_vector(t, "b", f.m);
  if (t.line_of("function", "amplitude")) {
    const long count = f.builtin == "random_fourier" ? 1 : f.m;
    f.amplitude = read_vector(t, "amplitude", count);
  }
  if (t.line_of("function", "frequency")) f.frequency = read_vector(t, "frequency", dim);
  if (t.line_of("function", "phase")) f.phase = read_vector(t, "phase", dim);

  if (f.builtin == "linear" && !t.line_of("function", "A")) t.missing("function", "A");
  if (f.builtin == "sinusoidal") {
    if (!t.line_of("function", "amplitude")) t.missing("function", "amplitude");
    if (!t.line_of("function", "frequency")) t.missing("function", "frequency");
  }
  if (f.builtin == "quadratic") {
    f.quadratic.assign(static_cast<std::size_t>(f.m), Matrix::Zero(dim, dim));
    if (qkeys.empty()) t.missing("function", "Q1");
    for (const auto& key : qkeys) {
      const int index = std::atoi(key.c_str() + 1);
      if (index < 1 || index > f.m) {
        t.error("function", key, t.line_of("function", key), "component index out of range 1..m");
        continue;
      }
      if (auto q = read_matrix(t, key, dim, dim)) {
        if (!q->isApprox(q->transpose(), 1e-12)) {
          t.error("function", key, t.line_of("function", key), "matrix must be symmetric");
        }
        f.quadratic[static_cast<std::size_t>(index - 1)] = *q;
      }
    }
  } else {
    for (const auto& key : qkeys) t.error("function", key, t.line_of("function", key), "only used by builtin quadratic");
  }
  return f;
}

void read_constants(Table& t, ConstantsSpec& c) {
  if (const auto mode = t.text("constants", "mode")) {
    try {
      c.mode = parse_mode(*mode);
    } catch (const ConfigError& e) {
      t.error("constants", "mode", t.line_of("constants", "mode"), e.what());
    }
  }
  if (const auto seed = t.integer("constants", "seed")) c.seed = static_cast<std::uint64_t>(*seed);
  if (const auto v = t.real("constants", "tol_eig")) c.tol_eig = *v;
  if (const auto v = t.real("constants", "eig_residual")) {
    c.eig_residual = *v;
    require_positive(t, "constants", "eig_residual", *v);
  }
  if (const auto v = t.integer("constants", "eig_block")) {
    c.eig_block = static_cast<int>(*v);
    require_positive(t, "constants", "eig_block", static_cast<double>(*v));
  }
  if (const auto v = t.integer("constants", "eig_max_iterations")) {
    c.eig_max_iterations = static_cast<std::size_t>(std::max(0LL, *v));
    require_positive(t, "constants", "eig_max_iterations", static_cast<double>(*v));
  }
}

void read_flow(Table& t, FlowSpec& f) {
  if (const auto v = t.real("flow", "dt_safety")) {
    f.config.dt_safety = *v;
    if (!(*v > 0.0 && *v <= 1.0)) t.error("flow", "dt_safety", t.line_of("flow", "dt_safety"), "must lie in (0, 1]");
  }
  if (const auto v = t.integer("flow", "max_steps")) {
    f.config.max_steps = static_cast<std::size_t>(std::max(0LL, *v));
    if (*v < 0) t.error("flow", "max_steps", t.line_of("flow", "max_steps"), "must be >= 0");
  }
  if (const auto v = t.real("flow", "residual_target")) {
    f.config.residual_target = *v;
    require_positive(t, "flow", "residual_target", *v);
  }
  if (const auto v = t.real("flow", "omega_floor")) f.config.omega_floor = *v;
  if (const auto v = t.real("flow", "scaling")) f.config.scaling = *v;
  if (const auto v = t.integer("flow", "log_interval")) {
    f.config.log_interval = static_cast<std::size_t>(std::max(0LL, *v));
    require_positive(t, "flow", "log_interval", static_cast<double>(*v));
  }
  if (const auto v = t.boolean("flow", "scale_to_criterion")) f.scale_to_criterion = *v;
  if (const auto v = t.real("flow", "omega_tolerance")) {
    f.omega_tolerance = *v;
    if (*v < 0.0) t.error("flow", "omega_tolerance", t.line_of("flow", "omega_tolerance"), "must be >= 0");
  }
}

void read_algebra(Table& t, AlgebraSpec& a) {
  if (const auto pairs = t.text("algebra", "pairs")) {
    a.pairs.clear();
    for (const std::string& item : Table::split(*pairs)) {
      const auto x = item.find('x');
      const auto n = x == std::string::npos ? std::nullopt : Table::parse_integer(trim(item.substr(0, x)));
      const auto m = x == std::string::npos ? std::nullopt : Table::parse_integer(trim(item.substr(x + 1)));
      if (!n || !m || *n < 1 || *m < 1) {
        t.error("algebra", "pairs", t.line_of("algebra", "pairs"), "expected entries like '3x4', got '" + item + "'");
        continue;
      }
      a.pairs.emplace_back(static_cast<int>(*n), static_cast<int>(*m));
    }
  }
  if (const auto v = t.integer("algebra", "count")) {
    a.count = static_cast<std::size_t>(std::max(0LL, *v));
    require_positive(t, "algebra", "count", static_cast<double>(*v));
  }
  if (const auto v = t.integer("algebra", "seed")) a.seed = static_cast<std::uint64_t>(*v);
  if (const auto v = t.real("algebra", "tolerance")) {
    a.tolerance = *v;
    if (*v < 0.0) t.error("algebra", "tolerance", t.line_of("algebra", "tolerance"), "must be >= 0");
  }
  if (const auto v = t.integer("algebra", "oracle_count")) {
    a.oracle_count = static_cast<std::size_t>(std::max(0LL, *v));
    if (*v < 0) t.error("algebra", "oracle_count", t.line_of("algebra", "oracle_count"), "must be >= 0");
  }
}

}  // namespace

std::string to_string(Subcommand command) {
  switch (command) {
    case Subcommand::criterion: return "criterion";
    case Subcommand::analyze: return "analyze";
    case Subcommand::flow: return "flow";
    case Subcommand::verify_algebra: return "verify-algebra";
    case Subcommand::pipeline: return "pipeline";
  }
  return "pipeline";
}

Subcommand parse_subcommand(const std::string& text) {
  for (Subcommand c : {Subcommand::criterion, Subcommand::analyze, Subcommand::flow,
                       Subcommand::verify_algebra, Subcommand::pipeline}) {
    if (to_string(c) == text) return c;
  }
  throw ConfigError("unknown subcommand '" + text + "'");
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = std::to_string(errors.size()) + " configuration error(s)";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<std::string> errors)
    : ConfigError(join_errors(errors)), errors_(std::move(errors)) {}

RunConfig parse_config(const std::string& text, Subcommand subcommand) {
  Table table = tokenize(text);
  RunConfig config;
  config.subcommand = subcommand;
  const bool needs_graph = subcommand != Subcommand::verify_algebra;

  config.domain = read_domain(table, needs_graph);
  config.function = read_function(table, needs_graph, config.domain ? config.domain->n : 0);
  read_constants(table, config.constants);
  read_flow(table, config.flow);
  read_algebra(table, config.algebra);
  if (const auto dir = table.text("output", "dir")) config.output.dir = *dir;

  for (const auto& [section, entries] : table.sections) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) continue;
    for (const auto& [key, entry] : entries) {
      if (entry.used) continue;
      if (section == "function" && is_quadratic_key(key)) continue;
      table.error(section, key, entry.line, "unknown key");
    }
  }
  if (!table.errors.empty()) throw ConfigErrors(std::move(table.errors));
  return config;
}

RunConfig load_config(const std::string& path, Subcommand subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), subcommand);
}

GridDomain make_domain(const DomainSpec& spec) {
  std::vector<std::pair<double, double>> bounds;
  for (int i = 0; i < spec.n; ++i) bounds.emplace_back(spec.lower.at(i), spec.upper.at(i));
  return build_grid(spec.n, bounds, spec.resolution);
}

Evaluator make_evaluator(const FunctionSpec& spec, const GridDomain& domain, std::uint64_t fallback_seed) {
  const int n = domain.dim();
  const int m = spec.m;
  const Matrix a = spec.a.value_or(Matrix::Zero(m, n));
  const Vector b = spec.b.value_or(Vector::Zero(m));
  if (a.rows() != m || a.cols() != n || b.size() != m) throw ConfigError("function: A must be m x n and b length m");

  if (spec.builtin == "zero") return [m](const Vector&) { return Vector(Vector::Zero(m)); };
  if (spec.builtin == "linear") return [a, b](const Vector& x) { return Vector(a * x + b); };
  if (spec.builtin == "quadratic") {
    if (spec.quadratic.size() != static_cast<std::size_t>(m)) throw ConfigError("function: quadratic needs m matrices");
    const auto q = spec.quadratic;
    return [a, b, q, m](const Vector& x) {
      Vector f = a * x + b;
      for (int i = 0; i < m; ++i) f[i] += 0.5 * x.dot(q[static_cast<std::size_t>(i)] * x);
      return f;
    };
  }
  if (spec.builtin == "sinusoidal") {
    if (!spec.amplitude || !spec.frequency || spec.amplitude->size() != m || spec.frequency->size() != n) {
      throw ConfigError("function: sinusoidal needs amplitude (m values) and frequency (n values)");
    }
    const Vector amp = *spec.amplitude;
    const Vector freq = *spec.frequency;
    const Vector phase = spec.phase.value_or(Vector::Zero(n));
    if (phase.size() != n) throw ConfigError("function: phase needs n values");
    return [amp, freq, phase, n](const Vector& x) {
      double p = 1.0;
      for (int i = 0; i < n; ++i) p *= std::sin(freq[i] * M_PI * x[i] + phase[i]);
      return Vector(amp * p);
    };
  }
  if (spec.builtin == "random_fourier") {
    if (spec.modes < 1) throw ConfigError("function: modes must be >= 1");
    const double amplitude = spec.amplitude ? (*spec.amplitude)[0] : 1.0;
    Rng rng(spec.seed.value_or(fallback_seed));
    // Mode multi-indices k in {0..modes}^n without k = 0.
    std::vector<std::vector<int>> ks;
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    while (true) {
      int i = n - 1;
      while (i >= 0 && k[static_cast<std::size_t>(i)] == spec.modes) k[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
      ++k[static_cast<std::size_t>(i)];
      ks.push_back(k);
    }
    Matrix coeff(m, static_cast<Eigen::Index>(ks.size()));
    std::vector<Matrix> phases(ks.size(), Matrix(m, n));
    for (std::size_t j = 0; j < ks.size(); ++j) {
      double k2 = 0.0;
      for (int v : ks[j]) k2 += v * v;
      for (int c = 0; c < m; ++c) {
        coeff(c, static_cast<Eigen::Index>(j)) = amplitude * rng.uniform(-1.0, 1.0) / k2;
        for (int i = 0; i < n; ++i) phases[j](c, i) = rng.uniform(0.0, 2.0 * M_PI);
      }
    }
    Vector lo(n), width(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = domain.lower(i);
      width[i] = domain.upper(i) - domain.lower(i);
    }
    return [=](const Vector& x) {
      Vector f = Vector::Zero(m);
      for (std::size_t j = 0; j < ks.size(); ++j) {
        for (int c = 0; c < m; ++c) {
          double p = coeff(c, static_cast<Eigen::Index>(j));
          for (int i = 0; i < n; ++i) p *= std::cos(ks[j][static_cast<std::size_t>(i)] * M_PI * (x[i] - lo[i]) / width[i] + phases[j](c, i));
          f[c] += p;
        }
      }
      return f;
    };
  }
  throw ConfigError("function: unknown builtin '" + spec.builtin + "'");
}

GraphSample make_sample(const RunConfig& config) {
  if (!config.domain || !config.function) throw ConfigError("config: [domain] and [function] are required");
  const GridDomain domain = make_domain(*config.domain);
  return sample_function(domain, config.function->m,
                         make_evaluator(*config.function, domain, config.constants.seed));
}

}  // namespace minstab
