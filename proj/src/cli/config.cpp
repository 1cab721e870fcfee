#include "sgldv/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sgldv/errors.hpp"
#include "sgldv/schedule.hpp"

namespace sgldv::cli {

namespace {

enum class Kind { Number, Integer, Unsigned, List, Matrix, Text };

using Schema = std::map<std::string, Kind>;

const Schema& target_schema() {
  static const Schema s{{"family", Kind::Text},      {"dim", Kind::Integer},
                        {"n", Kind::Integer},        {"mean", Kind::List},
                        {"precision", Kind::Number}, {"half_separation", Kind::Number},
                        {"shifts", Kind::Matrix},    {"weights", Kind::List},
                        {"modes", Kind::Matrix},     {"noise", Kind::Matrix},
                        {"m", Kind::Number},         {"b", Kind::Number},
                        {"L", Kind::Number},         {"H", Kind::Text},
                        {"G", Kind::Number}};
  return s;
}

const Schema& sampler_schema() {
  static const Schema s{{"kind", Kind::Text},     {"eta", Kind::Number},      {"beta", Kind::Number},
                        {"B", Kind::Integer},     {"K", Kind::Integer},       {"R", Kind::Text},
                        {"r", Kind::Text},        {"seed", Kind::Unsigned},   {"chain_id", Kind::Unsigned},
                        {"initial", Kind::Text},  {"initial_point", Kind::List}};
  return s;
}

const Schema& experiment_schema() {
  static const Schema s{
      {"eps", Kind::Number},         {"c0", Kind::Number},          {"rho", Kind::Text},
      {"mode", Kind::Text},          {"bins", Kind::Integer},       {"hist_range", Kind::Number},
      {"burn_in", Kind::Number},     {"cheeger_nodes", Kind::Integer}, {"cells", Kind::Integer},
      {"kernel_kind", Kind::Text},   {"sets", Kind::Integer},       {"points", Kind::Integer},
      {"delta", Kind::Text},         {"tolerance", Kind::Number},   {"scan_points", Kind::Integer},
      {"probe_radius", Kind::Number}, {"probe_points", Kind::Integer}, {"probe_seed", Kind::Unsigned},
      {"sweep", Kind::Text},         {"sweep_mode", Kind::Text},    {"eta_grid", Kind::List},
      {"seeds", Kind::List},         {"steps", Kind::Integer},      {"r_rule", Kind::Text},
      {"range", Kind::Number}};
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

void check_kind(const Section& sec, const std::string& key, Kind kind) {
  switch (kind) {
    case Kind::Number: sec.number(key); break;
    case Kind::Integer: sec.integer(key); break;
    case Kind::Unsigned: sec.unsigned_integer(key, 0); break;
    case Kind::List: sec.list(key); break;
    case Kind::Matrix: sec.matrix(key); break;
    case Kind::Text:
      if (sec.raw(key).empty()) sec.fail(key, "value is empty");
      break;
  }
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

Matrix zero_columns(const Section& t, const std::string& key, int n, int d) {
  if (!t.has(key)) return Matrix::Zero(n, d);
  Matrix m = t.matrix(key);
  if (m.cols() != d) t.fail(key, "expected " + std::to_string(d) + " entries per row");
  return m;
}

TargetModel build_family(const Section& t) {
  const std::string family = t.text("family", "");
  if (family.empty()) throw InvalidConfig("[target] requires 'family'");
  if (family == "gaussian") {
    const int d = static_cast<int>(t.integer("dim", 1));
    Vector mean = t.has("mean") ? to_vector(t.list("mean")) : Vector::Zero(d);
    if (mean.size() != d) t.fail("mean", "length does not match dim");
    return make_gaussian(mean, t.number("precision", 1.0), static_cast<int>(t.integer("n", 1)));
  }
  if (family == "double_well") {
    Matrix shifts;
    if (t.has("shifts")) {
      shifts = t.matrix("shifts");
      if (shifts.cols() != 1) t.fail("shifts", "double-well shifts are scalars (one per row)");
    } else {
      shifts = Matrix::Zero(t.integer("n", 1), 1);
    }
    return make_double_well(t.number("half_separation", 2.0), shifts);
  }
  if (family == "mixture") {
    if (!t.has("weights") || !t.has("modes")) throw InvalidConfig("mixture needs 'weights' and 'modes'");
    const Vector w = to_vector(t.list("weights"));
    const Matrix modes = t.matrix("modes");
    if (modes.rows() != w.size()) t.fail("modes", "one mode per weight is required");
    const Matrix shifts = t.has("shifts") ? zero_columns(t, "shifts", 0, static_cast<int>(modes.cols()))
                                          : Matrix::Zero(t.integer("n", 1), modes.cols());
    return make_shifted_mixture(w, modes, shifts);
  }
  t.fail("family", "unknown target family '" + family + "'");
}

}  // namespace

const std::string& Section::raw(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw InvalidConfig("missing key '" + key + "'");
  return it->second;
}

void Section::fail(const std::string& key, const std::string& message) const {
  const auto it = lines.find(key);
  const std::string where = it == lines.end() ? "" : "line " + std::to_string(it->second) + ": ";
  throw InvalidConfig(where + "'" + key + "': " + message);
}

double Section::number(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(raw(key), v)) fail(key, "expected a number, got '" + raw(key) + "'");
  return v;
}

double Section::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Section::integer(const std::string& key) const {
  const std::string& s = raw(key);
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    // Allow integral scientific notation such as 1e6.
    double d = 0.0;
    if (parse_double(s, d) && d == std::floor(d) && std::abs(d) < 9e18) return static_cast<std::int64_t>(d);
    fail(key, "expected an integer, got '" + s + "'");
  }
  return v;
}

std::int64_t Section::integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t Section::unsigned_integer(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = raw(key);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "expected an unsigned integer, got '" + s + "'");
  return v;
}

std::string Section::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

std::vector<double> Section::list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(raw(key), ',')) {
    double v = 0.0;
    if (!parse_double(item, v)) fail(key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

Matrix Section::matrix(const std::string& key) const {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(raw(key), ';')) {
    std::vector<double> r;
    for (const auto& item : split(row, ',')) {
      double v = 0.0;
      if (!parse_double(item, v)) fail(key, "expected rows of numbers separated by ';'");
      r.push_back(v);
    }
    if (!rows.empty() && r.size() != rows.front().size()) fail(key, "rows have different lengths");
    rows.push_back(r);
  }
  if (rows.empty() || rows.front().empty()) fail(key, "matrix is empty");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.target.values == b.target.values && a.sampler.values == b.sampler.values &&
         a.experiment.values == b.experiment.values;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  Section* current = nullptr;
  const Schema* schema = nullptr;
  auto err = [&](const std::string& msg) {
    throw InvalidConfig(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    // '#' starts a comment anywhere; ';' only at line start (it separates matrix rows).
    std::string body = trim(line.substr(0, line.find('#')));
    if (!body.empty() && body.front() == ';') body.clear();
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') err("malformed section header");
      const std::string name = trim(body.substr(1, body.size() - 2));
      if (name == "target") {
        current = &cfg.target;
        schema = &target_schema();
      } else if (name == "sampler") {
        current = &cfg.sampler;
        schema = &sampler_schema();
      } else if (name == "experiment") {
        current = &cfg.experiment;
        schema = &experiment_schema();
      } else {
        err("unknown section [" + name + "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) err("expected key = value");
    if (!current) err("key outside of a section");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!schema->count(key)) err("unknown key '" + key + "'");
    if (current->has(key)) err("duplicate key '" + key + "'");
    current->values[key] = value;
    current->lines[key] = lineno;
  }
  // Type checks, then semantic checks.
  try {
    for (const auto& [sec, sch] : {std::pair{&cfg.target, &target_schema()}, std::pair{&cfg.sampler, &sampler_schema()},
                                   std::pair{&cfg.experiment, &experiment_schema()}})
      for (const auto& [key, value] : sec->values) check_kind(*sec, key, sch->at(key));
    const TargetModel model = build_target(cfg);
    if (cfg.sampler.has("kind")) sampler_kind(cfg);
    if (cfg.sampler.has("eta")) {
      const ChainConfig chain = chain_config(cfg, model);
      try {
        validate_chain_config(chain, model, sampler_kind(cfg));
      } catch (const InvalidParameter& e) {
        cfg.sampler.fail("eta", std::string("sampler settings: ") + e.what());
      }
    }
  } catch (const InvalidConfig& e) {
    if (std::string(e.what()).rfind("line ", 0) == 0) throw InvalidConfig(source + ":" + std::string(e.what()).substr(5));
    throw InvalidConfig(source + ": " + e.what());
  } catch (const InvalidParameter& e) {
    const int at = cfg.target.lines.count("family") ? cfg.target.lines.at("family") : 0;
    throw InvalidConfig(source + ":" + std::to_string(at) + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [name, sec] : {std::pair{"target", &cfg.target}, std::pair{"sampler", &cfg.sampler},
                                  std::pair{"experiment", &cfg.experiment}}) {
    if (sec->values.empty()) continue;
    out += std::string("[") + name + "]\n";
    for (const auto& [k, v] : sec->values) out += k + " = " + v + "\n";
  }
  return out;
}

TargetModel build_target(const ExperimentConfig& cfg) {
  const Section& t = cfg.target;
  TargetModel model = build_family(t);
  if (t.has("noise")) {
    const Matrix noise = t.matrix("noise");
    if (noise.cols() != model.dim()) t.fail("noise", "row length must equal the target dimension");
    if (noise.rows() != model.n()) t.fail("noise", "one row per component is required");
    model = make_noise_split(model, noise);
  }
  bool overridden = false;
  TargetConstants c = model.constants();
  for (const char* key : {"m", "b", "L", "G"}) {
    if (!t.has(key)) continue;
    overridden = true;
    const double v = t.number(key);
    if (std::string(key) == "m") c.m = v;
    if (std::string(key) == "b") c.b = v;
    if (std::string(key) == "L") c.L = v;
    if (std::string(key) == "G") c.G = v;
  }
  if (t.has("H")) {
    overridden = true;
    // "none" declares the Hessian Lipschitz constant unknown.
    if (t.raw("H") == "none")
      c.H.reset();
    else
      c.H = t.number("H");
  }
  if (overridden) model = model.with_constants(c);
  return model;
}

SamplerKind sampler_kind(const ExperimentConfig& cfg) {
  try {
    return parse_sampler_kind(cfg.sampler.text("kind", "sgld"));
  } catch (const InvalidConfig& e) {
    cfg.sampler.fail("kind", e.what());
  }
}

double sampler_beta(const ExperimentConfig& cfg) { return cfg.sampler.number("beta", 1.0); }

ChainConfig chain_config(const ExperimentConfig& cfg, const TargetModel& model) {
  const Section& s = cfg.sampler;
  ChainConfig c;
  if (!s.has("eta")) throw InvalidConfig("[sampler] requires 'eta'");
  c.eta = s.number("eta");
  c.beta = s.number("beta", 1.0);
  c.B = static_cast<int>(s.integer("B", model.n()));
  c.K = s.integer("K", 0);
  c.seed = s.unsigned_integer("seed", 0);
  c.chain_id = s.unsigned_integer("chain_id", 0);
  const double eps = cfg.experiment.number("eps", 0.1);
  const int d = model.dim();
  const auto& k = model.constants();
  try {
    if (s.has("R")) {
      if (s.raw("R") == "auto") {
        if (c.K < 1) s.fail("R", "'auto' needs K >= 1");
        c.R = bar_r(eps / (4.0 * static_cast<double>(c.K)), k.m, k.b, k.L, c.beta, d);
      } else {
        c.R = s.number("R");
      }
    }
    if (s.has("r")) {
      const std::string& v = s.raw("r");
      if (v == "lemma62" || v == "lemma63") {
        if (c.K < 1) s.fail("r", "'" + v + "' needs K >= 1");
        const ProjRadii radii = proj_radii(c.eta, d, c.beta, c.K, eps);
        c.r = v == "lemma62" ? radii.r_lemma62 : radii.r_lemma63;
      } else {
        c.r = s.number("r");
      }
    }
  } catch (const InvalidParameter& e) {
    s.fail(s.has("r") ? "r" : "R", e.what());
  }
  const std::string init = s.text("initial", "gaussian");
  if (init == "point") {
    if (!s.has("initial_point")) s.fail("initial", "'point' needs initial_point");
    c.initial.kind = InitialSpec::Kind::Point;
    c.initial.point = to_vector(s.list("initial_point"));
  } else if (init != "gaussian") {
    s.fail("initial", "expected 'gaussian' or 'point'");
  }
  return c;
}

}  // namespace sgldv::cli
