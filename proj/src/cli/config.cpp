#include "qpinem/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "qpinem/errors.hpp"

namespace qpinem::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const Json& obj, const std::string& path, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
  }
}

const Json& require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

long long read_integer(const Json& j, const std::string& path) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  throw ConfigError(path, "expected an integer");
}

int read_int(const Json& j, const std::string& path) {
  const long long v = read_integer(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(path, "integer out of range");
  }
  return static_cast<int>(v);
}

double read_real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

bool read_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string read_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

Complex read_complex(const Json& j, const std::string& path) {
  if (j.is_number()) return {read_real(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [re, im]");
  return {read_real(j[0], path + "[0]"), read_real(j[1], path + "[1]")};
}

InitialStateSpec parse_initial(const Json& j, const std::string& path, int n_max) {
  require_object(j, path);
  InitialStateSpec s;
  if (!j.contains("type")) throw ConfigError(join(path, "type"), "missing");
  const std::string type = read_string(j["type"], join(path, "type"));
  auto need = [&](const char* key) -> const Json& {
    if (!j.contains(key)) throw ConfigError(join(path, key), "missing");
    return j[key];
  };
  if (type == "vacuum") {
    reject_unknown(j, path, {"type"});
    s.kind = InitialStateSpec::Kind::vacuum;
  } else if (type == "fock") {
    reject_unknown(j, path, {"type", "n"});
    s.kind = InitialStateSpec::Kind::fock;
    s.n = read_int(need("n"), join(path, "n"));
  } else if (type == "coherent") {
    reject_unknown(j, path, {"type", "alpha"});
    s.kind = InitialStateSpec::Kind::coherent;
    s.alpha = read_complex(need("alpha"), join(path, "alpha"));
  } else if (type == "thermal") {
    reject_unknown(j, path, {"type", "theta"});
    s.kind = InitialStateSpec::Kind::thermal;
    s.theta = read_real(need("theta"), join(path, "theta"));
    if (!(s.theta > 0.0)) throw ConfigError(join(path, "theta"), "must be positive");
  } else if (type == "displaced_fock") {
    reject_unknown(j, path, {"type", "n", "alpha"});
    s.kind = InitialStateSpec::Kind::displaced_fock;
    s.n = read_int(need("n"), join(path, "n"));
    s.alpha = read_complex(need("alpha"), join(path, "alpha"));
  } else {
    throw ConfigError(join(path, "type"), "unknown initial state '" + type + "'");
  }
  if (s.n < 0 || s.n > n_max) {
    throw ConfigError(join(path, "n"), "Fock index outside [0, n_max]");
  }
  return s;
}

ElectronSpec parse_electron(const Json& j, const std::string& path) {
  require_object(j, path);
  const std::string type =
      j.contains("type") ? read_string(j["type"], join(path, "type")) : std::string("delta");
  if (type == "delta") {
    reject_unknown(j, path, {"type", "k0"});
    DeltaElectron d;
    if (j.contains("k0")) d.k0 = read_int(j["k0"], join(path, "k0"));
    return d;
  }
  if (type == "comb") {
    reject_unknown(j, path, {"type", "K", "K_prime", "beta"});
    CombElectron c;
    if (j.contains("K")) c.K = read_int(j["K"], join(path, "K"));
    if (j.contains("K_prime")) c.K_prime = read_int(j["K_prime"], join(path, "K_prime"));
    if (j.contains("beta")) c.beta = read_complex(j["beta"], join(path, "beta"));
    if (c.K < 0 || c.K_prime < 0) throw ConfigError(path, "comb extents must be >= 0");
    if (std::abs(std::abs(c.beta) - 1.0) > 1e-12) throw ConfigError(join(path, "beta"), "|beta| must be 1");
    return c;
  }
  throw ConfigError(join(path, "type"), "unknown electron '" + type + "'");
}

Measurement parse_measurement(const Json& j, const std::string& path) {
  std::string type;
  if (j.is_string()) {
    type = j.get<std::string>();
  } else {
    require_object(j, path);
    if (!j.contains("type")) throw ConfigError(join(path, "type"), "missing");
    type = read_string(j["type"], join(path, "type"));
  }
  if (type == "trace_out" || type == "sample") {
    if (j.is_object()) reject_unknown(j, path, {"type"});
    if (type == "sample") return Sample{};
    return TraceOut{};
  }
  if (type == "postselect") {
    if (!j.is_object() || !j.contains("k")) throw ConfigError(join(path, "k"), "missing");
    reject_unknown(j, path, {"type", "k"});
    return PostSelect{read_int(j["k"], join(path, "k"))};
  }
  throw ConfigError(path, "unknown measurement '" + type + "'");
}

LossSpec parse_loss(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"dt_over_tau", "substeps", "mode"});
  LossSpec l;
  if (!j.contains("dt_over_tau")) throw ConfigError(join(path, "dt_over_tau"), "missing");
  l.dt_over_tau = read_real(j["dt_over_tau"], join(path, "dt_over_tau"));
  if (l.dt_over_tau < 0.0) throw ConfigError(join(path, "dt_over_tau"), "must be >= 0");
  if (j.contains("substeps")) l.substeps = read_int(j["substeps"], join(path, "substeps"));
  if (l.substeps < 1) throw ConfigError(join(path, "substeps"), "must be >= 1");
  if (j.contains("mode")) {
    const std::string mode = read_string(j["mode"], join(path, "mode"));
    if (mode == "euler") l.mode = LossMode::euler;
    else if (mode == "exact_damping") l.mode = LossMode::exact_damping;
    else throw ConfigError(join(path, "mode"), "expected euler or exact_damping");
  }
  return l;
}

StepPolicy parse_policy(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"electron", "measurement", "loss"});
  StepPolicy p;
  if (j.contains("electron")) p.electron = parse_electron(j["electron"], join(path, "electron"));
  if (j.contains("measurement")) {
    p.measurement = parse_measurement(j["measurement"], join(path, "measurement"));
  }
  if (j.contains("loss") && !j["loss"].is_null()) p.loss = parse_loss(j["loss"], join(path, "loss"));
  return p;
}

LadderWindow electron_extent(const ElectronSpec& e) {
  if (const auto* d = std::get_if<DeltaElectron>(&e)) return {d->k0, d->k0};
  const auto& c = std::get<CombElectron>(e);
  return {-c.K, c.K_prime};
}

Json electron_to_json(const ElectronSpec& e) {
  if (const auto* d = std::get_if<DeltaElectron>(&e)) return Json{{"type", "delta"}, {"k0", d->k0}};
  const auto& c = std::get<CombElectron>(e);
  return Json{{"type", "comb"}, {"K", c.K}, {"K_prime", c.K_prime}, {"beta", complex_to_json(c.beta)}};
}

Json measurement_to_json(const Measurement& m) {
  if (std::holds_alternative<TraceOut>(m)) return Json{{"type", "trace_out"}};
  if (std::holds_alternative<Sample>(m)) return Json{{"type", "sample"}};
  return Json{{"type", "postselect"}, {"k", std::get<PostSelect>(m).k}};
}

}  // namespace

bool ScenarioConfig::uses_sampling() const {
  return std::any_of(policies.begin(), policies.end(),
                     [](const StepPolicy& p) { return std::holds_alternative<Sample>(p.measurement); });
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("", "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    const bool numeric = std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
    Json* child = nullptr;
    if (node->is_array() && numeric) {
      const std::size_t idx = std::stoul(part);
      if (idx > node->size()) throw ConfigError(key, "array index out of range");
      if (idx == node->size()) node->push_back(Json{});
      child = &(*node)[idx];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
      child = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *child = std::move(value);
      return;
    }
    node = child;
    start = dot + 1;
  }
}

ScenarioConfig parse_config(const Json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"n_max", "electron_window", "g_qu", "initial_state", "policies", "n_steps",
                           "seed", "ensemble_size", "channel_mode", "output", "E0_eV", "omega_rad_s"});
  ScenarioConfig c;
  if (!doc.contains("n_max")) throw ConfigError("n_max", "missing");
  c.n_max = read_int(doc["n_max"], "n_max");
  if (c.n_max < 0) throw ConfigError("n_max", "must be >= 0");

  if (doc.contains("g_qu")) c.g.g_qu = read_complex(doc["g_qu"], "g_qu");

  c.initial = doc.contains("initial_state") ? parse_initial(doc["initial_state"], "initial_state", c.n_max)
                                            : InitialStateSpec{};

  if (doc.contains("policies")) {
    const Json& ps = doc["policies"];
    if (!ps.is_array()) throw ConfigError("policies", "expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      c.policies.push_back(parse_policy(ps[i], "policies." + std::to_string(i)));
    }
  } else {
    c.policies.push_back(StepPolicy{});
  }

  if (doc.contains("n_steps")) c.n_steps = read_int(doc["n_steps"], "n_steps");
  if (c.n_steps < 0) throw ConfigError("n_steps", "must be >= 0");
  if (c.n_steps > 0 && c.policies.empty()) throw ConfigError("policies", "empty policy sequence");

  if (doc.contains("electron_window")) {
    const Json& w = doc["electron_window"];
    if (!w.is_array() || w.size() != 2) throw ConfigError("electron_window", "expected [lo, hi]");
    c.electron_window = {read_int(w[0], "electron_window[0]"), read_int(w[1], "electron_window[1]")};
    if (c.electron_window.hi < c.electron_window.lo) throw ConfigError("electron_window", "lo > hi");
  } else {
    int lo = 0;
    int hi = 0;
    for (std::size_t i = 0; i < c.policies.size(); ++i) {
      const LadderWindow e = electron_extent(c.policies[i].electron);
      lo = i == 0 ? e.lo : std::min(lo, e.lo);
      hi = i == 0 ? e.hi : std::max(hi, e.hi);
    }
    c.electron_window = {lo - c.n_max, hi + c.n_max};
  }
  for (std::size_t i = 0; i < c.policies.size(); ++i) {
    if (const auto* ps = std::get_if<PostSelect>(&c.policies[i].measurement)) {
      if (!c.electron_window.contains(ps->k)) {
        throw ConfigError("policies." + std::to_string(i) + ".measurement.k", "outside electron_window");
      }
    }
  }

  if (doc.contains("seed") && !doc["seed"].is_null()) {
    const long long s = read_integer(doc["seed"], "seed");
    if (s < 0) throw ConfigError("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (c.uses_sampling() && !c.seed) throw ConfigError("seed", "required when a policy samples");

  if (doc.contains("ensemble_size")) c.ensemble_size = read_int(doc["ensemble_size"], "ensemble_size");
  if (c.ensemble_size < 1) throw ConfigError("ensemble_size", "must be >= 1");

  if (doc.contains("channel_mode")) {
    const std::string m = read_string(doc["channel_mode"], "channel_mode");
    if (m == "density") c.channel_mode = ChannelMode::density;
    else if (m == "ensemble") c.channel_mode = ChannelMode::ensemble;
    else throw ConfigError("channel_mode", "expected density or ensemble");
  }

  if (doc.contains("output")) {
    const Json& o = require_object(doc["output"], "output");
    reject_unknown(o, "output", {"dir", "trajectory", "snapshot"});
    if (o.contains("dir")) c.output.dir = read_string(o["dir"], "output.dir");
    if (o.contains("trajectory")) c.output.trajectory = read_bool(o["trajectory"], "output.trajectory");
    if (o.contains("snapshot")) c.output.snapshot = read_bool(o["snapshot"], "output.snapshot");
  }

  if (doc.contains("E0_eV") && !doc["E0_eV"].is_null()) c.e0_ev = read_real(doc["E0_eV"], "E0_eV");
  if (doc.contains("omega_rad_s") && !doc["omega_rad_s"].is_null()) {
    c.omega_rad_s = read_real(doc["omega_rad_s"], "omega_rad_s");
  }
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path.string());
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("", "config " + path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["n_max"] = c.n_max;
  j["electron_window"] = Json::array({c.electron_window.lo, c.electron_window.hi});
  j["g_qu"] = complex_to_json(c.g.g_qu);

  Json init;
  switch (c.initial.kind) {
    case InitialStateSpec::Kind::vacuum:
      init = {{"type", "vacuum"}};
      break;
    case InitialStateSpec::Kind::fock:
      init = {{"type", "fock"}, {"n", c.initial.n}};
      break;
    case InitialStateSpec::Kind::coherent:
      init = {{"type", "coherent"}, {"alpha", complex_to_json(c.initial.alpha)}};
      break;
    case InitialStateSpec::Kind::thermal:
      init = {{"type", "thermal"}, {"theta", c.initial.theta}};
      break;
    case InitialStateSpec::Kind::displaced_fock:
      init = {{"type", "displaced_fock"}, {"n", c.initial.n}, {"alpha", complex_to_json(c.initial.alpha)}};
      break;
  }
  j["initial_state"] = init;

  Json ps = Json::array();
  for (const auto& p : c.policies) {
    Json pj{{"electron", electron_to_json(p.electron)}, {"measurement", measurement_to_json(p.measurement)}};
    if (p.loss) {
      pj["loss"] = {{"dt_over_tau", p.loss->dt_over_tau},
                    {"substeps", p.loss->substeps},
                    {"mode", p.loss->mode == LossMode::euler ? "euler" : "exact_damping"}};
    } else {
      pj["loss"] = nullptr;
    }
    ps.push_back(pj);
  }
  j["policies"] = ps;
  j["n_steps"] = c.n_steps;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["ensemble_size"] = c.ensemble_size;
  j["channel_mode"] = c.channel_mode == ChannelMode::density ? "density" : "ensemble";
  j["output"] = {{"dir", c.output.dir.string()}, {"trajectory", c.output.trajectory},
                 {"snapshot", c.output.snapshot}};
  j["E0_eV"] = c.e0_ev ? Json(*c.e0_ev) : Json(nullptr);
  j["omega_rad_s"] = c.omega_rad_s ? Json(*c.omega_rad_s) : Json(nullptr);
  return j;
}

PhotonState build_initial_state(const ScenarioConfig& c) {
  switch (c.initial.kind) {
    case InitialStateSpec::Kind::vacuum:
      return make_vacuum(c.n_max);
    case InitialStateSpec::Kind::fock:
      return make_fock(c.initial.n, c.n_max);
    case InitialStateSpec::Kind::coherent:
      return make_coherent(c.initial.alpha, c.n_max);
    case InitialStateSpec::Kind::thermal:
      return make_thermal(c.initial.theta, c.n_max);
    case InitialStateSpec::Kind::displaced_fock:
      return make_displaced_fock(c.initial.n, c.initial.alpha, c.n_max);
  }
  throw ConfigError("initial_state", "unhandled kind");
}

}  // namespace qpinem::cli
