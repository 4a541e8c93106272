#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cgmlab {

namespace {

/// Source positions of parsed keys, by dotted path.
using Marks = std::map<std::string, YAML::Mark>;

struct Reader {
  std::string source;
  Marks marks;

  std::string where(const YAML::Mark& m) const {
    if (m.is_null()) return source;
    return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& msg) const {
    throw ConfigError(where(node.Mark()) + ": " + path + ": " + msg);
  }

  void expect_map(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, path, "unknown key '" + key + "'");
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& path, const char* what) {
    marks[path] = node.Mark();
    if (!node.IsScalar()) fail(node, path, std::string("expected ") + what);
    try {
      return node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node, path, std::string("expected ") + what + ", got '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& path) {
    const double v = scalar<double>(node, path, "a number");
    if (!std::isfinite(v)) fail(node, path, "must be finite");
    return v;
  }

  int integer(const YAML::Node& node, const std::string& path) { return scalar<int>(node, path, "an integer"); }

  std::vector<double> numbers(const YAML::Node& node, const std::string& path) {
    marks[path] = node.Mark();
    if (!node.IsSequence()) fail(node, path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  void kernel(const YAML::Node& node, KernelSpec& k) {
    expect_map(node, "kernel", {"type", "c", "terms", "coeffs"});
    if (node["type"]) k.type = scalar<std::string>(node["type"], "kernel.type", "a string");
    if (k.type == "zero") {
      k.c = 0.0;
    } else if (k.type == "constant") {
      if (node["c"]) k.c = number(node["c"], "kernel.c");
    } else if (k.type == "exp_sum") {
      const auto terms = node["terms"];
      if (!terms || !terms.IsSequence() || terms.size() == 0) fail(node, "kernel.terms", "exp_sum needs a nonempty list");
      marks["kernel.terms"] = terms.Mark();
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string p = "kernel.terms[" + std::to_string(i) + "]";
        expect_map(terms[i], p, {"c", "b"});
        if (!terms[i]["c"] || !terms[i]["b"]) fail(terms[i], p, "needs both c and b");
        k.terms.push_back({number(terms[i]["c"], p + ".c"), number(terms[i]["b"], p + ".b")});
      }
    } else if (k.type == "polynomial") {
      if (!node["coeffs"]) fail(node, "kernel.coeffs", "polynomial needs coeffs");
      k.coeffs = numbers(node["coeffs"], "kernel.coeffs");
      if (k.coeffs.empty()) fail(node["coeffs"], "kernel.coeffs", "must not be empty");
    } else {
      fail(node["type"], "kernel.type", "unknown kernel type '" + k.type + "'");
    }
  }

  void profile(const YAML::Node& node, const std::string& path, ProfileSpec& p) {
    expect_map(node, path, {"type", "value", "amplitude", "omega", "phase", "coeffs"});
    if (node["type"]) p.type = scalar<std::string>(node["type"], path + ".type", "a string");
    if (p.type != "zero" && p.type != "constant" && p.type != "sine" && p.type != "polynomial")
      fail(node["type"], path + ".type", "unknown profile type '" + p.type + "'");
    if (node["value"]) p.value = number(node["value"], path + ".value");
    if (node["amplitude"]) p.amplitude = number(node["amplitude"], path + ".amplitude");
    if (node["omega"]) p.omega = number(node["omega"], path + ".omega");
    if (node["phase"]) p.phase = number(node["phase"], path + ".phase");
    if (node["coeffs"]) p.coeffs = numbers(node["coeffs"], path + ".coeffs");
  }

  ExperimentConfig read(const YAML::Node& root) {
    ExperimentConfig cfg;
    if (root.IsNull()) return cfg;
    expect_map(root, "config", {"kernel", "T", "steps", "modes", "scope", "initial_data", "forcing", "precision",
                                "max_bits", "biorth", "control"});
    if (root["kernel"]) kernel(root["kernel"], cfg.kernel);
    if (root["T"]) cfg.T = number(root["T"], "T");
    if (root["steps"]) cfg.steps = integer(root["steps"], "steps");
    if (root["modes"]) cfg.modes = integer(root["modes"], "modes");
    if (const auto s = root["scope"]) {
      marks["scope"] = s.Mark();
      if (s.IsScalar() && s.Scalar() == "auto")
        cfg.scope.reset();
      else
        cfg.scope = integer(s, "scope");
    }
    if (const auto d = root["initial_data"]) {
      expect_map(d, "initial_data", {"type", "scale", "power", "values"});
      auto& x = cfg.initial_data;
      if (d["type"]) x.type = scalar<std::string>(d["type"], "initial_data.type", "a string");
      if (x.type != "power" && x.type != "list")
        fail(d["type"], "initial_data.type", "unknown initial data type '" + x.type + "'");
      if (d["scale"]) x.scale = number(d["scale"], "initial_data.scale");
      if (d["power"]) x.power = number(d["power"], "initial_data.power");
      if (d["values"]) x.values = numbers(d["values"], "initial_data.values");
      marks["initial_data"] = d.Mark();
    }
    if (const auto f = root["forcing"]) {
      expect_map(f, "forcing", {"x0", "x1"});
      if (f["x0"]) profile(f["x0"], "forcing.x0", cfg.forcing[0]);
      if (f["x1"]) profile(f["x1"], "forcing.x1", cfg.forcing[1]);
    }
    if (root["precision"]) cfg.precision = integer(root["precision"], "precision");
    if (root["max_bits"]) cfg.max_bits = integer(root["max_bits"], "max_bits");
    if (const auto b = root["biorth"]) {
      expect_map(b, "biorth", {"family", "gram_size", "fit", "horizon", "shift"});
      if (b["family"]) cfg.biorth.family = integer(b["family"], "biorth.family");
      if (b["gram_size"]) cfg.biorth.gram_size = integer(b["gram_size"], "biorth.gram_size");
      if (const auto w = b["fit"]) {
        marks["biorth.fit"] = w.Mark();
        if (!w.IsSequence() || w.size() != 2) fail(w, "biorth.fit", "expected [lo, hi]");
        cfg.biorth.fit = {integer(w[0], "biorth.fit[0]"), integer(w[1], "biorth.fit[1]")};
      }
      if (b["horizon"]) {
        cfg.biorth.horizon = scalar<std::string>(b["horizon"], "biorth.horizon", "a string");
        if (cfg.biorth.horizon != "infinite" && cfg.biorth.horizon != "finite")
          fail(b["horizon"], "biorth.horizon", "expected 'infinite' or 'finite'");
      }
      if (b["shift"]) cfg.biorth.shift = number(b["shift"], "biorth.shift");
    }
    if (const auto c = root["control"]) {
      expect_map(c, "control", {"refine", "endpoints"});
      if (c["refine"]) cfg.control.refine = integer(c["refine"], "control.refine");
      if (const auto e = c["endpoints"]) {
        marks["control.endpoints"] = e.Mark();
        if (!e.IsSequence() || e.size() != 2) fail(e, "control.endpoints", "expected [bool, bool]");
        cfg.control.endpoints = {scalar<bool>(e[0], "control.endpoints[0]", "true or false"),
                                 scalar<bool>(e[1], "control.endpoints[1]", "true or false")};
      }
    }
    return cfg;
  }
};

void check(const Reader* r, bool ok, const std::string& path, const std::string& msg) {
  if (ok) return;
  std::string where = r ? r->source : "config";
  if (r) {
    const auto it = r->marks.find(path);
    if (it != r->marks.end()) where = r->where(it->second);
  }
  throw ConfigError(where + ": " + path + ": " + msg);
}

void validate_impl(const ExperimentConfig& c, const Reader* r) {
  check(r, c.T > 0.0, "T", "must be positive");
  check(r, c.steps >= 100, "steps", "must be at least 100");
  check(r, c.modes >= 1, "modes", "must be at least 1");
  check(r, !c.scope || *c.scope >= 1, "scope", "must be 'auto' or a positive mode index");
  check(r, c.precision >= 53, "precision", "must be at least 53 bits");
  check(r, c.max_bits >= c.precision, "max_bits", "must not be below precision");
  check(r, c.control.refine >= 1, "control.refine", "must be at least 1");
  check(r, c.control.endpoints[0] || c.control.endpoints[1], "control.endpoints", "at least one must be active");
  for (std::size_t i = 0; i < c.kernel.terms.size(); ++i)
    check(r, c.kernel.terms[i].b >= 0.0, "kernel.terms[" + std::to_string(i) + "].b", "decay rate must be >= 0");
  if (c.initial_data.type == "list")
    check(r, static_cast<int>(c.initial_data.values.size()) >= c.modes, "initial_data",
          "list needs at least 'modes' values");
  const auto& b = c.biorth;
  check(r, b.family >= 2, "biorth.family", "must be at least 2");
  check(r, b.gram_size >= 2, "biorth.gram_size", "must be at least 2");
  check(r, b.fit[0] >= 1 && b.fit[0] < b.fit[1], "biorth.fit", "needs 1 <= lo < hi");
  check(r, b.fit[1] <= b.family, "biorth.fit", "window exceeds the family size");
  check(r, b.shift < cgm::kPi * cgm::kPi, "biorth.shift", "must stay below pi^2 so that every exponent is positive");
}

}  // namespace

cgm::MemoryKernel KernelSpec::build() const {
  if (type == "zero") return cgm::MemoryKernel::zero();
  if (type == "constant") return cgm::MemoryKernel::constant(c);
  if (type == "exp_sum") return cgm::MemoryKernel::exp_sum(terms);
  return cgm::MemoryKernel::polynomial(coeffs);
}

double ProfileSpec::operator()(double t) const {
  if (type == "constant") return value;
  if (type == "sine") return amplitude * std::sin(omega * t + phase);
  if (type == "polynomial") {
    double s = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * t + *it;
    return s;
  }
  return 0.0;
}

double InitialDataSpec::operator()(int n) const {
  if (type == "list") return static_cast<std::size_t>(n) <= values.size() ? values[static_cast<std::size_t>(n - 1)] : 0.0;
  return scale / std::pow(static_cast<double>(n), power);
}

cgm::BoundaryControl ExperimentConfig::boundary(const cgm::GridPtr& grid) const {
  return cgm::BoundaryControl(cgm::SampledFunction::from(grid, forcing[0]),
                              cgm::SampledFunction::from(grid, forcing[1]));
}

std::string ExperimentConfig::to_yaml() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap << YAML::Key << "type" << YAML::Value << kernel.type;
  if (kernel.type == "constant") out << YAML::Key << "c" << YAML::Value << kernel.c;
  if (kernel.type == "exp_sum") {
    out << YAML::Key << "terms" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : kernel.terms)
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "c" << YAML::Value << t.c << YAML::Key << "b"
          << YAML::Value << t.b << YAML::EndMap;
    out << YAML::EndSeq;
  }
  if (kernel.type == "polynomial") out << YAML::Key << "coeffs" << YAML::Value << YAML::Flow << kernel.coeffs;
  out << YAML::EndMap;
  out << YAML::Key << "T" << YAML::Value << T;
  out << YAML::Key << "steps" << YAML::Value << steps;
  out << YAML::Key << "modes" << YAML::Value << modes;
  out << YAML::Key << "scope" << YAML::Value;
  if (scope)
    out << *scope;
  else
    out << "auto";
  out << YAML::Key << "initial_data" << YAML::Value << YAML::BeginMap << YAML::Key << "type" << YAML::Value
      << initial_data.type;
  if (initial_data.type == "power")
    out << YAML::Key << "scale" << YAML::Value << initial_data.scale << YAML::Key << "power" << YAML::Value
        << initial_data.power;
  else
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << initial_data.values;
  out << YAML::EndMap;
  out << YAML::Key << "forcing" << YAML::Value << YAML::BeginMap;
  for (int e = 0; e < 2; ++e) {
    const auto& p = forcing[e];
    out << YAML::Key << (e == 0 ? "x0" : "x1") << YAML::Value << YAML::BeginMap << YAML::Key << "type"
        << YAML::Value << p.type;
    if (p.type == "constant") out << YAML::Key << "value" << YAML::Value << p.value;
    if (p.type == "sine")
      out << YAML::Key << "amplitude" << YAML::Value << p.amplitude << YAML::Key << "omega" << YAML::Value << p.omega
          << YAML::Key << "phase" << YAML::Value << p.phase;
    if (p.type == "polynomial") out << YAML::Key << "coeffs" << YAML::Value << YAML::Flow << p.coeffs;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  out << YAML::Key << "precision" << YAML::Value << precision;
  out << YAML::Key << "max_bits" << YAML::Value << max_bits;
  out << YAML::Key << "biorth" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << biorth.family;
  out << YAML::Key << "gram_size" << YAML::Value << biorth.gram_size;
  out << YAML::Key << "fit" << YAML::Value << YAML::Flow << YAML::BeginSeq << biorth.fit[0] << biorth.fit[1]
      << YAML::EndSeq;
  out << YAML::Key << "horizon" << YAML::Value << biorth.horizon;
  out << YAML::Key << "shift" << YAML::Value << biorth.shift;
  out << YAML::EndMap;
  out << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "refine" << YAML::Value << control.refine;
  out << YAML::Key << "endpoints" << YAML::Value << YAML::Flow << YAML::BeginSeq << control.endpoints[0]
      << control.endpoints[1] << YAML::EndSeq;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  Reader r{source, {}};
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(r.where(e.mark) + ": " + e.msg);
  }
  auto cfg = r.read(root);
  validate_impl(cfg, &r);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate(const ExperimentConfig& cfg) { validate_impl(cfg, nullptr); }

}  // namespace cgmlab
