#include "socdiffuse/config.hpp"

#include <rbm/matrix_io.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace socdiffuse {

namespace {

constexpr const char* kKindNames[] = {"sample-alg1", "sample-alg2",  "verify-lq",
                                      "verify-bridge", "verify-prop2", "verify-hjb",
                                      "verify-afa",  "sweep-gamma"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const auto it = entries_.find(key);
    std::string where = it == entries_.end() ? "" : "line " + std::to_string(it->second.line) + ": ";
    throw ConfigError(where + "field '" + key + "': " + why);
  }

  const std::string* raw(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second.value;
  }

  std::string require(const std::string& key) const {
    const auto* v = raw(key);
    if (!v) throw ConfigError("missing required field '" + key + "'");
    if (v->empty()) fail(key, "empty value");
    return *v;
  }

  double to_double(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail(key, "not a number: '" + t + "'");
    return v;
  }

  long long to_int(const std::string& key, const std::string& s) const {
    long long v = 0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail(key, "not an integer: '" + t + "'");
    return v;
  }

  std::vector<double> to_list(const std::string& key, const std::string& s) const {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    std::istringstream in(s);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(to_double(key, cell));
    return out;
  }

  Vector to_vector(const std::string& key, const std::string& s) const {
    const auto list = to_list(key, s);
    return Eigen::Map<const Vector>(list.data(), static_cast<Eigen::Index>(list.size()));
  }

  Matrix to_matrix(const std::string& key, const std::string& s) const {
    if (trim(s).empty()) return Matrix();
    std::vector<std::vector<double>> rows;
    std::istringstream in(s);
    std::string row;
    while (std::getline(in, row, ';')) {
      rows.push_back(to_list(key, row));
      if (rows.back().empty() || rows.back().size() != rows.front().size()) {
        fail(key, "matrix rows must be non-empty and equally long");
      }
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return m;
  }

  // Optional accessors leave `out` untouched when the key is absent.
  void get(const std::string& key, double& out) const {
    if (const auto* v = raw(key)) out = to_double(key, *v);
  }
  void get(const std::string& key, int& out) const {
    if (const auto* v = raw(key)) out = static_cast<int>(to_int(key, *v));
  }
  void get(const std::string& key, std::string& out) const {
    if (const auto* v = raw(key)) out = *v;
  }
  void get(const std::string& key, Vector& out) const {
    if (const auto* v = raw(key)) out = to_vector(key, *v);
  }
  void get(const std::string& key, Matrix& out) const {
    if (const auto* v = raw(key)) out = to_matrix(key, *v);
  }
  void get(const std::string& key, std::vector<double>& out) const {
    if (const auto* v = raw(key)) out = to_list(key, *v);
  }
  void get(const std::string& key, std::optional<double>& out) const {
    if (const auto* v = raw(key)) {
      if (trim(*v).empty()) {
        out.reset();
      } else {
        out = to_double(key, *v);
      }
    }
  }

  template <class F>
  auto parse_enum(const std::string& key, F&& parse) const {
    try {
      return parse(require(key));
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

 private:
  std::map<std::string, Entry> entries_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.kind",         "experiment.dimension",     "experiment.features",
      "experiment.seeds",        "experiment.output_dir",    "schedule.kind",
      "score.kind",              "score.path",               "score.mean",
      "score.variance",          "score.weights",            "score.means",
      "score.variances",         "extractor.kind",           "extractor.matrix",
      "extractor.reference",     "sampler.steps",            "sampler.eta",
      "sampler.opt_steps",       "sampler.lambda",           "sampler.gradient_mode",
      "sampler.alg2_init",       "sampler.proximal_update",  "sampler.alg2_noise",
      "control.x0",              "control.x1",               "control.t0",
      "control.dt",              "control.gamma",            "control.drift_mode",
      "control.gammas",          "control.grid_points",      "afa.instances",
      "afa.query_tokens",        "afa.tokens",               "afa.key_width",
      "afa.value_width",         "afa.heads",                "afa.scale"};
  return keys;
}

std::vector<std::uint64_t> parse_seeds(const Reader& r, const std::string& key,
                                       const std::string& text) {
  // "a..b" (inclusive range) or a comma list.
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  const auto as_seed = [&](const std::string& s) {
    const long long v = r.to_int(key, s);
    if (v < 0) r.fail(key, "seeds must be >= 0");
    return static_cast<std::uint64_t>(v);
  };
  if (dots != std::string::npos) {
    const auto lo = as_seed(text.substr(0, dots));
    const auto hi = as_seed(text.substr(dots + 2));
    if (hi < lo) r.fail(key, "empty seed range");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  } else {
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) seeds.push_back(as_seed(cell));
  }
  if (seeds.empty()) r.fail(key, "seed list is empty");
  return seeds;
}

bool is_sampling(ExperimentKind k) {
  return k == ExperimentKind::SampleAlg1 || k == ExperimentKind::SampleAlg2;
}

void validate(const ExperimentConfig& c, const Reader& r) {
  if (c.seeds.empty()) throw ConfigError("field 'experiment.seeds': seed list is empty");
  if (c.output_dir.empty()) throw ConfigError("field 'experiment.output_dir': empty path");
  if (is_sampling(c.kind)) {
    if (c.score.kind == "gaussian") {
      if (c.score.mean.size() == 0) r.fail("score.mean", "required for a gaussian score");
      if (!(c.score.variance > 0.0)) r.fail("score.variance", "must be > 0");
    } else if (c.score.kind == "mixture") {
      if (c.score.means.rows() == 0) r.fail("score.means", "required for a mixture score");
      if (c.score.weights.size() != static_cast<std::size_t>(c.score.means.rows()) ||
          c.score.variances.size() != c.score.weights.size()) {
        r.fail("score.weights", "weights, means and variances must have equal counts");
      }
    } else {
      r.fail("score.kind", "expected gaussian or mixture");
    }
    if (c.score.path != "variance-preserving") {
      r.fail("score.path", "samplers need the variance-preserving path");
    }
    const int d = c.score.kind == "gaussian" ? static_cast<int>(c.score.mean.size())
                                             : static_cast<int>(c.score.means.cols());
    if (c.dimension != 0 && c.dimension != d) {
      r.fail("experiment.dimension", "does not match the score dimension");
    }
    if (c.extractor.kind == "linear") {
      if (c.extractor.matrix.size() == 0) r.fail("extractor.matrix", "required for linear");
      if (c.extractor.matrix.cols() != d) r.fail("extractor.matrix", "column count must equal d");
    } else if (c.extractor.kind != "quadratic") {
      r.fail("extractor.kind", "expected linear or quadratic");
    }
    const int k = c.extractor.kind == "linear" ? static_cast<int>(c.extractor.matrix.rows()) : d;
    if (c.extractor.reference.size() != k) {
      r.fail("extractor.reference", "length must equal the feature dimension k");
    }
    if (c.features != 0 && c.features != k) {
      r.fail("experiment.features", "does not match the extractor output dimension");
    }
    try {
      c.sampler.validate(c.kind == ExperimentKind::SampleAlg2);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sampler section: ") + e.what());
    }
  }
}

template <class T>
std::string join(const T& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += rbm::format_double(values[i]);
  }
  return out;
}

std::string join_vector(const Vector& v) {
  return join(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string join_matrix(const Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += "; ";
    out += join_vector(m.row(r).transpose());
  }
  return out;
}

}  // namespace

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool operator==(const ScoreSpec& a, const ScoreSpec& b) {
  return a.kind == b.kind && a.path == b.path && same(a.mean, b.mean) &&
         a.variance == b.variance && a.weights == b.weights && same(a.means, b.means) &&
         a.variances == b.variances;
}

bool operator==(const ExtractorSpec& a, const ExtractorSpec& b) {
  return a.kind == b.kind && same(a.matrix, b.matrix) && same(a.reference, b.reference);
}

bool operator==(const ControlSpec& a, const ControlSpec& b) {
  return same(a.x0, b.x0) && same(a.x1, b.x1) && a.t0 == b.t0 && a.dt == b.dt &&
         a.gamma == b.gamma && a.drift_mode == b.drift_mode && a.gammas == b.gammas &&
         a.grid_points == b.grid_points;
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (int i = 0; i < 8; ++i) {
    if (name == kKindNames[i]) return static_cast<ExperimentKind>(i);
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

std::string to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known_keys().count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown field '" + key + "'");
    }
    if (entries.count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate field '" + key + "'");
    }
    entries[key] = {trim(line.substr(eq + 1)), lineno};
  }

  const Reader r(std::move(entries));
  ExperimentConfig c;
  c.kind = r.parse_enum("experiment.kind",
                        [](const std::string& v) { return parse_experiment_kind(v); });
  r.get("experiment.dimension", c.dimension);
  r.get("experiment.features", c.features);
  if (r.has("experiment.seeds")) {
    c.seeds = parse_seeds(r, "experiment.seeds", r.require("experiment.seeds"));
  }
  r.get("experiment.output_dir", c.output_dir);
  if (r.has("schedule.kind")) {
    c.schedule = r.parse_enum("schedule.kind", [](const std::string& v) {
      return rbm::diffusion::parse_schedule_kind(v);
    });
  }

  r.get("score.kind", c.score.kind);
  r.get("score.path", c.score.path);
  r.get("score.mean", c.score.mean);
  r.get("score.variance", c.score.variance);
  r.get("score.weights", c.score.weights);
  r.get("score.means", c.score.means);
  r.get("score.variances", c.score.variances);

  r.get("extractor.kind", c.extractor.kind);
  r.get("extractor.matrix", c.extractor.matrix);
  r.get("extractor.reference", c.extractor.reference);

  auto& s = c.sampler;
  if (is_sampling(c.kind)) {
    s.num_steps = static_cast<int>(r.to_int("sampler.steps", r.require("sampler.steps")));
    s.step_size = r.to_double("sampler.eta", r.require("sampler.eta"));
    s.opt_steps = static_cast<int>(r.to_int("sampler.opt_steps", r.require("sampler.opt_steps")));
    if (c.kind == ExperimentKind::SampleAlg2) {
      s.proximal_strength = r.to_double("sampler.lambda", r.require("sampler.lambda"));
    } else {
      r.get("sampler.lambda", s.proximal_strength);
    }
  } else {
    r.get("sampler.steps", s.num_steps);
    r.get("sampler.eta", s.step_size);
    r.get("sampler.opt_steps", s.opt_steps);
    r.get("sampler.lambda", s.proximal_strength);
  }
  using namespace rbm::sampling;
  if (r.has("sampler.gradient_mode")) {
    s.gradient_mode = r.parse_enum("sampler.gradient_mode",
                                   [](const std::string& v) { return parse_gradient_mode(v); });
  }
  if (r.has("sampler.alg2_init")) {
    s.proximal_init = r.parse_enum("sampler.alg2_init",
                                   [](const std::string& v) { return parse_proximal_init(v); });
  }
  if (r.has("sampler.proximal_update")) {
    s.proximal_update = r.parse_enum(
        "sampler.proximal_update", [](const std::string& v) { return parse_proximal_update(v); });
  }
  if (r.has("sampler.alg2_noise")) {
    s.noise_estimate = r.parse_enum("sampler.alg2_noise",
                                    [](const std::string& v) { return parse_noise_estimate(v); });
  }

  r.get("control.x0", c.control.x0);
  r.get("control.x1", c.control.x1);
  r.get("control.t0", c.control.t0);
  r.get("control.dt", c.control.dt);
  if (const auto* g = r.raw("control.gamma")) {
    const std::string v = trim(*g);
    if (v == "inf" || v == "infinity") {
      c.control.gamma = rbm::Gamma::infinite();
    } else {
      try {
        c.control.gamma = rbm::Gamma::finite(r.to_double("control.gamma", v));
      } catch (const std::invalid_argument& e) {
        r.fail("control.gamma", e.what());
      }
    }
  }
  if (r.has("control.drift_mode")) {
    c.control.drift_mode = r.parse_enum(
        "control.drift_mode", [](const std::string& v) { return rbm::control::parse_drift_mode(v); });
  }
  r.get("control.gammas", c.control.gammas);
  r.get("control.grid_points", c.control.grid_points);
  if (!(c.control.dt > 0.0)) r.fail("control.dt", "must be > 0");
  if (!(c.control.t0 >= 0.0 && c.control.t0 < 1.0)) r.fail("control.t0", "must lie in [0, 1)");
  if (c.control.grid_points < 2) r.fail("control.grid_points", "must be >= 2");
  for (double g : c.control.gammas) {
    if (!(g > 0.0)) r.fail("control.gammas", "entries must be > 0");
  }

  r.get("afa.instances", c.afa.instances);
  r.get("afa.query_tokens", c.afa.query_tokens);
  r.get("afa.tokens", c.afa.tokens);
  r.get("afa.key_width", c.afa.key_width);
  r.get("afa.value_width", c.afa.value_width);
  r.get("afa.heads", c.afa.heads);
  r.get("afa.scale", c.afa.scale);
  if (c.afa.instances < 1 || c.afa.query_tokens < 1 || c.afa.tokens < 1 ||
      c.afa.key_width < 1 || c.afa.value_width < 1 || c.afa.heads < 1) {
    throw ConfigError("afa section: sizes must be >= 1");
  }
  if (c.afa.key_width % c.afa.heads || c.afa.value_width % c.afa.heads) {
    r.fail("afa.heads", "must divide key_width and value_width");
  }
  if (c.afa.scale && !(*c.afa.scale > 0.0)) r.fail("afa.scale", "must be > 0");

  validate(c, r);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto kv = [&](const char* key, const std::string& value) {
    o << key << " = " << value << '\n';
  };
  const auto num = [](double v) { return rbm::format_double(v); };
  kv("experiment.kind", to_string(c.kind));
  kv("experiment.dimension", std::to_string(c.dimension));
  kv("experiment.features", std::to_string(c.features));
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (i) seeds += ", ";
    seeds += std::to_string(c.seeds[i]);
  }
  kv("experiment.seeds", seeds);
  kv("experiment.output_dir", c.output_dir);
  kv("schedule.kind", std::string(rbm::diffusion::to_string(c.schedule)));
  kv("score.kind", c.score.kind);
  kv("score.path", c.score.path);
  kv("score.mean", join_vector(c.score.mean));
  kv("score.variance", num(c.score.variance));
  kv("score.weights", join(c.score.weights));
  kv("score.means", join_matrix(c.score.means));
  kv("score.variances", join(c.score.variances));
  kv("extractor.kind", c.extractor.kind);
  kv("extractor.matrix", join_matrix(c.extractor.matrix));
  kv("extractor.reference", join_vector(c.extractor.reference));
  const auto& s = c.sampler;
  kv("sampler.steps", std::to_string(s.num_steps));
  kv("sampler.eta", num(s.step_size));
  kv("sampler.opt_steps", std::to_string(s.opt_steps));
  kv("sampler.lambda", s.proximal_strength ? num(*s.proximal_strength) : "");
  kv("sampler.gradient_mode", std::string(rbm::sampling::to_string(s.gradient_mode)));
  kv("sampler.alg2_init", std::string(rbm::sampling::to_string(s.proximal_init)));
  kv("sampler.proximal_update", std::string(rbm::sampling::to_string(s.proximal_update)));
  kv("sampler.alg2_noise", std::string(rbm::sampling::to_string(s.noise_estimate)));
  kv("control.x0", join_vector(c.control.x0));
  kv("control.x1", join_vector(c.control.x1));
  kv("control.t0", num(c.control.t0));
  kv("control.dt", num(c.control.dt));
  kv("control.gamma", c.control.gamma.is_infinite() ? "inf" : num(c.control.gamma.value()));
  kv("control.drift_mode", std::string(rbm::control::to_string(c.control.drift_mode)));
  kv("control.gammas", join(c.control.gammas));
  kv("control.grid_points", std::to_string(c.control.grid_points));
  kv("afa.instances", std::to_string(c.afa.instances));
  kv("afa.query_tokens", std::to_string(c.afa.query_tokens));
  kv("afa.tokens", std::to_string(c.afa.tokens));
  kv("afa.key_width", std::to_string(c.afa.key_width));
  kv("afa.value_width", std::to_string(c.afa.value_width));
  kv("afa.heads", std::to_string(c.afa.heads));
  kv("afa.scale", c.afa.scale ? num(*c.afa.scale) : "");
  return o.str();
}

void rebase_seeds(ExperimentConfig& config, std::uint64_t base) {
  if (config.seeds.empty()) return;
  const auto lowest = *std::min_element(config.seeds.begin(), config.seeds.end());
  for (auto& s : config.seeds) s = s - lowest + base;
}

}  // namespace socdiffuse
