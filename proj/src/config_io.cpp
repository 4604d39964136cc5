#include "diffstep/config_io.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

namespace diffstep {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Strict reader over one JSON object: every key must be consumed by a read_*
// call; finish() rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, child(key));
  }

  template <class T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    out = convert<T>(*it, child(key));
  }

  const json* get(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(child(key), "unknown key");
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path, "must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path, "must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
          throw ConfigError(path, "must be non-negative");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path, "must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path, "must be a string");
    }
    return v.get<T>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> read_numbers(const json& v, const std::string& path, std::size_t expected) {
  if (!v.is_array() || (expected && v.size() != expected)) {
    throw ConfigError(path, expected ? fmt::format("must be an array of {} numbers", expected)
                                     : "must be an array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(ObjectReader::convert<double>(v[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

UeProfile ue_from_json(const json& j, const std::string& path) {
  UeProfile ue;
  ObjectReader r(j, path);
  r.read("delta_t_local", ue.delta_t_local);
  r.read("delta_t_edge", ue.delta_t_edge);
  r.read("c1_attenuation", ue.c1_attenuation);
  r.read("c2_utility", ue.c2_utility);
  r.read("cpu_freq_local", ue.cpu_freq_local);
  r.read("cpu_freq_edge_alloc", ue.cpu_freq_edge_alloc);
  r.read("k_local", ue.k_local);
  r.read("s_cap_local", ue.s_cap_local);
  r.read("s_cap_edge", ue.s_cap_edge);
  r.finish();
  return ue;
}

ordered_json ue_to_json(const UeProfile& ue) {
  return {{"delta_t_local", ue.delta_t_local},     {"delta_t_edge", ue.delta_t_edge},
          {"c1_attenuation", ue.c1_attenuation},   {"c2_utility", ue.c2_utility},
          {"cpu_freq_local", ue.cpu_freq_local},   {"cpu_freq_edge_alloc", ue.cpu_freq_edge_alloc},
          {"k_local", ue.k_local},                 {"s_cap_local", ue.s_cap_local},
          {"s_cap_edge", ue.s_cap_edge}};
}

SweptParam swept_param_from(const json& v, const std::string& path) {
  const auto name = ObjectReader::convert<std::string>(v, path);
  const auto p = parse_swept_param(name);
  if (!p) throw ConfigError(path, "one of s_edge_budget, cost_weights, s_cap_local");
  return *p;
}

}  // namespace

SystemConfig config_from_json_at(const json& j, const std::string& path);
SweepSpec sweep_from_json_at(const json& j, const std::string& path);

ordered_json config_to_json(const SystemConfig& c) {
  ordered_json ues = ordered_json::array();
  for (const auto& ue : c.ues) ues.push_back(ue_to_json(ue));
  const auto& t = c.tolerances;
  ordered_json j;
  j["ues"] = std::move(ues);
  j["k_edge"] = c.k_edge;
  j["s_edge_budget"] = c.s_edge_budget;
  j["eps_fwd"] = c.eps_fwd;
  j["cost_weights"] = {c.cost_weights.time, c.cost_weights.error, c.cost_weights.energy};
  j["blend_weights"] = {c.blend_weights.cost, c.blend_weights.utility};
  j["tau_penalty"] = c.tau_penalty;
  j["tolerances"] = {{"inner", t.inner},         {"outer", t.outer},
                     {"bisection", t.bisection}, {"max_inner", t.max_inner},
                     {"max_outer", t.max_outer}, {"aux_floor", t.aux_floor},
                     {"bisection_max_iter", t.bisection_max_iter}};
  j["init"] = {{"a0", c.init.a0},
               {"s0", c.init.s0 ? ordered_json(*c.init.s0) : ordered_json(nullptr)},
               {"starts", c.init.starts}};
  j["seed"] = c.seed;
  j["allow_nonpositive_cost"] = c.allow_nonpositive_cost;
  return j;
}

SystemConfig config_from_json(const json& j) { return config_from_json_at(j, ""); }

SystemConfig config_from_json_at(const json& j, const std::string& path) {
  SystemConfig c;
  ObjectReader r(j, path);
  const json* ues = r.get("ues");
  if (!ues) throw ConfigError(r.child("ues"), "required");
  if (!ues->is_array()) throw ConfigError(r.child("ues"), "must be an array of UE objects");
  c.ues.clear();
  for (std::size_t n = 0; n < ues->size(); ++n) {
    c.ues.push_back(ue_from_json((*ues)[n], fmt::format("{}[{}]", r.child("ues"), n)));
  }
  r.read("k_edge", c.k_edge);
  r.read("s_edge_budget", c.s_edge_budget);
  r.read("eps_fwd", c.eps_fwd);
  if (const json* w = r.get("cost_weights")) {
    const auto v = read_numbers(*w, r.child("cost_weights"), 3);
    c.cost_weights = {v[0], v[1], v[2]};
  }
  if (const json* w = r.get("blend_weights")) {
    const auto v = read_numbers(*w, r.child("blend_weights"), 2);
    c.blend_weights = {v[0], v[1]};
  }
  r.read("tau_penalty", c.tau_penalty);
  if (const json* t = r.get("tolerances")) {
    ObjectReader tr(*t, r.child("tolerances"));
    tr.read("inner", c.tolerances.inner);
    tr.read("outer", c.tolerances.outer);
    tr.read("bisection", c.tolerances.bisection);
    tr.read("max_inner", c.tolerances.max_inner);
    tr.read("max_outer", c.tolerances.max_outer);
    tr.read("aux_floor", c.tolerances.aux_floor);
    tr.read("bisection_max_iter", c.tolerances.bisection_max_iter);
    tr.finish();
  }
  if (const json* i = r.get("init")) {
    ObjectReader ir(*i, r.child("init"));
    ir.read("a0", c.init.a0);
    ir.read_optional("s0", c.init.s0);
    ir.read("starts", c.init.starts);
    ir.finish();
  }
  r.read("seed", c.seed);
  r.read("allow_nonpositive_cost", c.allow_nonpositive_cost);
  r.get("provenance");  // informational, emitted by print-default-config
  r.finish();
  return c;
}

ordered_json sweep_to_json(const SweepSpec& s) {
  ordered_json j;
  j["base"] = config_to_json(s.base);
  if (s.cost_preset) j["cost_preset"] = to_string(*s.cost_preset);
  ordered_json fixed = ordered_json::object();
  for (const auto& [p, v] : s.fixed) fixed[to_string(p)] = v;
  j["fixed"] = std::move(fixed);
  j["swept_param"] = to_string(s.param);
  j["values"] = s.values;
  j["seeds"] = s.seeds;
  ordered_json methods = ordered_json::array();
  for (Method m : s.methods) methods.push_back(to_string(m));
  j["methods"] = std::move(methods);
  j["grid_step"] = s.grid_step;
  return j;
}

SweepSpec sweep_from_json_at(const json& j, const std::string& path) {
  SweepSpec s;
  ObjectReader r(j, path);
  if (const json* base = r.get("base")) s.base = config_from_json_at(*base, r.child("base"));
  if (const json* b = r.get("blend_weights")) {
    const auto v = read_numbers(*b, r.child("blend_weights"), 2);
    s.base.blend_weights = {v[0], v[1]};
  }
  if (const json* p = r.get("cost_preset")) {
    const auto name = ObjectReader::convert<std::string>(*p, r.child("cost_preset"));
    s.cost_preset = parse_weight_preset(name);
    if (!s.cost_preset) {
      throw ConfigError(r.child("cost_preset"), "one of equal, time-heavy, error-heavy, energy-heavy");
    }
  }
  if (const json* f = r.get("fixed")) {
    if (!f->is_object()) throw ConfigError(r.child("fixed"), "must be an object");
    for (const auto& [key, value] : f->items()) {
      const std::string kp = r.child("fixed") + "." + key;
      s.fixed.emplace_back(swept_param_from(json(key), kp), ObjectReader::convert<double>(value, kp));
    }
  }
  const json* param = r.get("swept_param");
  if (!param) throw ConfigError(r.child("swept_param"), "required");
  s.param = swept_param_from(*param, r.child("swept_param"));
  const json* values = r.get("values");
  if (!values) throw ConfigError(r.child("values"), "required");
  s.values = read_numbers(*values, r.child("values"), 0);
  if (s.values.empty()) throw ConfigError(r.child("values"), "value list non-empty");
  if (const json* seeds = r.get("seeds")) {
    if (!seeds->is_array() || seeds->empty()) {
      throw ConfigError(r.child("seeds"), "must be a non-empty array of integers");
    }
    s.seeds.clear();
    for (std::size_t i = 0; i < seeds->size(); ++i) {
      s.seeds.push_back(ObjectReader::convert<std::uint64_t>((*seeds)[i],
                                                             fmt::format("{}[{}]", r.child("seeds"), i)));
    }
  }
  if (const json* methods = r.get("methods")) {
    if (!methods->is_array() || methods->empty()) {
      throw ConfigError(r.child("methods"), "methods non-empty");
    }
    s.methods.clear();
    for (std::size_t i = 0; i < methods->size(); ++i) {
      const std::string mp = fmt::format("{}[{}]", r.child("methods"), i);
      const auto m = parse_method(ObjectReader::convert<std::string>((*methods)[i], mp));
      if (!m) throw ConfigError(mp, "one of proposed, baseline, oracle");
      s.methods.push_back(*m);
    }
  }
  r.read("grid_step", s.grid_step);
  if (!(s.grid_step > 0)) throw ConfigError(r.child("grid_step"), "grid_step > 0");
  r.finish();
  return s;
}

SweepSpec sweep_from_json(const json& j) { return sweep_from_json_at(j, ""); }

std::vector<SweepSpec> sweeps_from_json(const json& j) {
  std::vector<SweepSpec> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(sweep_from_json_at(j[i], fmt::format("[{}]", i)));
  } else {
    out.push_back(sweep_from_json(j));
  }
  return out;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "file must exist and be readable");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), fmt::format("valid JSON ({})", e.what()));
  }
}

}  // namespace diffstep
