#pragma once

// JSON configuration for scenarios.
//
// Parsing is strict: every key must be recognized, and violations name the
// full dotted path ("controller.kpp is not a recognized key"). A config that
// parses is also fully defaulted — the canonical form written back out (and
// hashed into the log metadata) contains every effective value, so two
// configs that resolve to the same run hash identically no matter which
// defaults they spelled out.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "indilab/rng.hpp"
#include "indilab/sim.hpp"

namespace indilab::config {

using nlohmann::json;

namespace detail {

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ConfigError("'" + path + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.count(key))
      throw ConfigError("'" + (path.empty() ? key : path + "." + key) +
                        "' is not a recognized key");
  }
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number())
    throw ConfigError("'" + path + "' must be a number");
  return v.get<double>();
}

inline double get_number(const json& obj, const std::string& path,
                         const char* key, double fallback) {
  return obj.contains(key) ? as_number(obj.at(key), path + "." + key)
                           : fallback;
}

inline std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError("'" + path + "' must be an integer");
  return v.get<std::int64_t>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError("'" + path + "' must be a boolean");
  return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("'" + path + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<double> as_number_list(const json& v,
                                          const std::string& path) {
  if (!v.is_array() || v.empty())
    throw ConfigError("'" + path + "' must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Eigen::VectorXd as_vector(const json& v, const std::string& path) {
  const auto list = as_number_list(v, path);
  Eigen::VectorXd out(static_cast<Eigen::Index>(list.size()));
  for (std::size_t i = 0; i < list.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = list[i];
  return out;
}

inline Eigen::Matrix3d as_matrix3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3)
    throw ConfigError("'" + path + "' must be a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3)
      throw ConfigError("'" + path + "' must be a 3x3 array");
    for (int c = 0; c < 3; ++c)
      m(r, c) = as_number(row[static_cast<std::size_t>(c)],
                          path + "[" + std::to_string(r) + "][" +
                              std::to_string(c) + "]");
  }
  return m;
}

inline json matrix3_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 3; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline dynamics::EnvelopeMode envelope_from_name(const std::string& s,
                                                 const std::string& path) {
  if (s == "off") return dynamics::EnvelopeMode::Off;
  if (s == "warn") return dynamics::EnvelopeMode::Warn;
  if (s == "strict") return dynamics::EnvelopeMode::Strict;
  throw ConfigError("'" + path + "' must be off|warn|strict");
}

}  // namespace detail

struct ResolvedConfig {
  sim::Scenario scenario;
  bool pi_equivalence = false;
  json canonical;     // fully defaulted config
  std::string hash;   // fnv1a-64 of canonical.dump()
};

inline json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
}

/// Applies a `dotted.path=value` override; the value is parsed as JSON when
/// possible (numbers, arrays, booleans) and taken as a string otherwise.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare words are strings
  }

  json* node = &root;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (key.empty())
      throw ConfigError("override '" + assignment + "' has an empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

/// Resolves a config argument: an existing file path wins; otherwise the
/// name is looked up as `<preset_dir>/<spec>.json`.
inline std::string find_config(const std::string& spec,
                               const std::string& preset_dir) {
  namespace fs = std::filesystem;
  if (fs::exists(spec) && fs::is_regular_file(spec)) return spec;
  const fs::path candidate = fs::path(preset_dir) / (spec + ".json");
  if (fs::exists(candidate) && fs::is_regular_file(candidate))
    return candidate.string();
  throw ConfigError("config '" + spec + "' not found (also tried '" +
                    candidate.string() + "')");
}

inline ResolvedConfig parse_config(const json& root) {
  using namespace detail;
  check_keys(root, "",
             {"name", "plant", "controller", "sim", "actuator", "noise",
              "reference", "diagnostics"});

  ResolvedConfig rc;
  sim::Scenario& sc = rc.scenario;
  json canon;

  // ---- name ----------------------------------------------------------
  sc.name = root.contains("name") ? as_string(root.at("name"), "name") : "run";
  canon["name"] = sc.name;

  // ---- plant ---------------------------------------------------------
  if (!root.contains("plant")) throw ConfigError("'plant' is required");
  const json& plant = root.at("plant");
  check_keys(plant, "plant",
             {"kind", "longitudinal", "rotational", "scale_f", "scale_g"});
  if (!plant.contains("kind"))
    throw ConfigError("'plant.kind' is required (longitudinal|rotational)");
  const std::string kind = as_string(plant.at("kind"), "plant.kind");
  sc.scale_f = get_number(plant, "plant", "scale_f", 1.0);
  sc.scale_g = get_number(plant, "plant", "scale_g", 1.0);

  Eigen::Index n_out = 0;
  json canon_plant;
  canon_plant["kind"] = kind;
  canon_plant["scale_f"] = sc.scale_f;
  canon_plant["scale_g"] = sc.scale_g;

  if (kind == "longitudinal") {
    if (plant.contains("rotational"))
      throw ConfigError(
          "'plant.rotational' is only valid when plant.kind is 'rotational'");
    const json& lp = plant.contains("longitudinal") ? plant.at("longitudinal")
                                                    : json::object();
    check_keys(lp, "plant.longitudinal",
               {"qbar", "S", "d", "mass", "VT", "Iyy", "mach", "envelope"});
    // defaults: a representative supersonic interceptor pitch plane
    const double qbar = get_number(lp, "plant.longitudinal", "qbar", 1.318e5);
    const double S = get_number(lp, "plant.longitudinal", "S", 0.0409);
    const double d = get_number(lp, "plant.longitudinal", "d", 0.229);
    const double mass = get_number(lp, "plant.longitudinal", "mass", 204.0);
    const double VT = get_number(lp, "plant.longitudinal", "VT", 632.0);
    const double Iyy = get_number(lp, "plant.longitudinal", "Iyy", 247.4);
    const double mach = get_number(lp, "plant.longitudinal", "mach", 2.0);
    const std::string env =
        lp.contains("envelope")
            ? as_string(lp.at("envelope"), "plant.longitudinal.envelope")
            : "warn";
    const dynamics::EnvelopeMode mode =
        envelope_from_name(env, "plant.longitudinal.envelope");
    dynamics::LongitudinalModel model(qbar, S, d, mass, VT, Iyy, mach, mode);
    sc.plant_factory = sim::make_longitudinal_factory(model, mode);
    n_out = 1;
    json jl;
    jl["qbar"] = qbar;
    jl["S"] = S;
    jl["d"] = d;
    jl["mass"] = mass;
    jl["VT"] = VT;
    jl["Iyy"] = Iyy;
    jl["mach"] = mach;
    jl["envelope"] = env;
    canon_plant["longitudinal"] = jl;
  } else if (kind == "rotational") {
    if (plant.contains("longitudinal"))
      throw ConfigError(
          "'plant.longitudinal' is only valid when plant.kind is 'longitudinal'");
    if (!plant.contains("rotational"))
      throw ConfigError("'plant.rotational' is required for a rotational plant");
    const json& rp = plant.at("rotational");
    check_keys(rp, "plant.rotational",
               {"inertia", "control_effectiveness", "damping"});
    if (!rp.contains("inertia") || !rp.contains("control_effectiveness"))
      throw ConfigError(
          "'plant.rotational' needs 'inertia' and 'control_effectiveness'");
    const Eigen::Matrix3d I =
        as_matrix3(rp.at("inertia"), "plant.rotational.inertia");
    const Eigen::Matrix3d Mc = as_matrix3(rp.at("control_effectiveness"),
                                          "plant.rotational.control_effectiveness");
    dynamics::RotationalModel::AeroMomentFn aero;  // zero moment by default
    json jr;
    jr["inertia"] = matrix3_to_json(I);
    jr["control_effectiveness"] = matrix3_to_json(Mc);
    if (rp.contains("damping")) {
      const Eigen::Matrix3d D =
          as_matrix3(rp.at("damping"), "plant.rotational.damping");
      aero = dynamics::RotationalModel::linear_damping(D);
      jr["damping"] = matrix3_to_json(D);
    }
    dynamics::RotationalModel model(I, Mc, aero);
    sc.plant_factory = sim::make_rotational_factory(model);
    n_out = 3;
    canon_plant["rotational"] = jr;
  } else {
    throw ConfigError("'plant.kind' must be longitudinal|rotational");
  }
  canon["plant"] = canon_plant;

  // ---- controller -------------------------------------------------------
  if (!root.contains("controller")) throw ConfigError("'controller' is required");
  const json& ctl = root.at("controller");
  check_keys(ctl, "controller", {"law", "accel", "kp", "kd", "gbar_scale"});
  if (!ctl.contains("law")) throw ConfigError("'controller.law' is required");
  sc.law = sim::law_from_name(as_string(ctl.at("law"), "controller.law"));
  sc.accel = ctl.contains("accel")
                 ? sim::accel_from_name(
                       as_string(ctl.at("accel"), "controller.accel"))
                 : sim::AccelSource::ErrorFd;
  if (!ctl.contains("kp")) throw ConfigError("'controller.kp' is required");
  sc.kp = as_vector(ctl.at("kp"), "controller.kp");
  if (ctl.contains("kd")) sc.kd = as_vector(ctl.at("kd"), "controller.kd");
  sc.gbar_scale = get_number(ctl, "controller", "gbar_scale", 1.0);
  json jc;
  jc["law"] = sim::law_name(sc.law);
  jc["accel"] = sim::accel_name(sc.accel);
  jc["kp"] = vector_to_json(sc.kp);
  if (sc.kd.size()) jc["kd"] = vector_to_json(sc.kd);
  jc["gbar_scale"] = sc.gbar_scale;
  canon["controller"] = jc;

  // ---- sim ----------------------------------------------------------------
  const json& js = root.contains("sim") ? root.at("sim") : json::object();
  check_keys(js, "sim", {"ts", "duration", "substeps", "x0", "delta_trim"});
  sc.ts = get_number(js, "sim", "ts", 0.01);
  sc.duration = get_number(js, "sim", "duration", 4.0);
  sc.substeps = js.contains("substeps")
                    ? static_cast<int>(as_integer(js.at("substeps"), "sim.substeps"))
                    : 10;
  if (js.contains("x0")) sc.x0 = as_vector(js.at("x0"), "sim.x0");
  if (js.contains("delta_trim"))
    sc.delta_trim = as_vector(js.at("delta_trim"), "sim.delta_trim");
  json jsim;
  jsim["ts"] = sc.ts;
  jsim["duration"] = sc.duration;
  jsim["substeps"] = sc.substeps;
  if (sc.x0.size()) jsim["x0"] = vector_to_json(sc.x0);
  if (sc.delta_trim.size()) jsim["delta_trim"] = vector_to_json(sc.delta_trim);
  canon["sim"] = jsim;

  // ---- actuator -------------------------------------------------------
  const json& ja = root.contains("actuator") ? root.at("actuator") : json::object();
  check_keys(ja, "actuator",
             {"enabled", "gain", "tau", "position_limit", "rate_limit"});
  sc.actuator.enabled =
      ja.contains("enabled") ? as_bool(ja.at("enabled"), "actuator.enabled") : true;
  sc.actuator.gain = get_number(ja, "actuator", "gain", 1.0);
  sc.actuator.tau = get_number(ja, "actuator", "tau", 0.01);
  if (ja.contains("position_limit"))
    sc.actuator.position_limit =
        as_number(ja.at("position_limit"), "actuator.position_limit");
  if (ja.contains("rate_limit"))
    sc.actuator.rate_limit = as_number(ja.at("rate_limit"), "actuator.rate_limit");
  json jact;
  jact["enabled"] = sc.actuator.enabled;
  jact["gain"] = sc.actuator.gain;
  jact["tau"] = sc.actuator.tau;
  if (sc.actuator.position_limit) jact["position_limit"] = *sc.actuator.position_limit;
  if (sc.actuator.rate_limit) jact["rate_limit"] = *sc.actuator.rate_limit;
  canon["actuator"] = jact;

  // ---- noise ------------------------------------------------------------
  const json& jn = root.contains("noise") ? root.at("noise") : json::object();
  check_keys(jn, "noise", {"std", "seed"});
  sc.noise.std = get_number(jn, "noise", "std", 0.0);
  sc.noise.seed = jn.contains("seed")
                      ? static_cast<std::uint64_t>(
                            as_integer(jn.at("seed"), "noise.seed"))
                      : 7u;
  json jnoise;
  jnoise["std"] = sc.noise.std;
  jnoise["seed"] = sc.noise.seed;
  canon["noise"] = jnoise;

  // ---- reference -------------------------------------------------------
  const json& jr = root.contains("reference") ? root.at("reference") : json::object();
  json canon_ref;
  if (jr.empty()) {
    sc.reference = reference::ReferenceBank::zeros(n_out);
    canon_ref["kind"] = "zero";
    canon_ref["channel"] = 0;
  } else {
    if (!jr.contains("kind")) throw ConfigError("'reference.kind' is required");
    const std::string rkind = as_string(jr.at("kind"), "reference.kind");
    const auto channel =
        jr.contains("channel")
            ? static_cast<Eigen::Index>(as_integer(jr.at("channel"), "reference.channel"))
            : Eigen::Index{0};
    canon_ref["kind"] = rkind;
    canon_ref["channel"] = channel;
    reference::ReferenceSignal signal;
    if (rkind == "zero") {
      check_keys(jr, "reference", {"kind", "channel"});
    } else if (rkind == "constant") {
      check_keys(jr, "reference", {"kind", "channel", "level"});
      if (!jr.contains("level"))
        throw ConfigError("'reference.level' is required for kind constant");
      const double level = as_number(jr.at("level"), "reference.level");
      signal = reference::ReferenceSignal::constant(level);
      canon_ref["level"] = level;
    } else if (rkind == "step") {
      check_keys(jr, "reference", {"kind", "channel", "amplitude", "start"});
      const double amp = get_number(jr, "reference", "amplitude", 0.1);
      const double start = get_number(jr, "reference", "start", 0.5);
      signal = reference::ReferenceSignal::step(amp, start);
      canon_ref["amplitude"] = amp;
      canon_ref["start"] = start;
    } else if (rkind == "smooth_doublet") {
      check_keys(jr, "reference",
                 {"kind", "channel", "amplitude", "start", "plateau", "edge"});
      const double amp = get_number(jr, "reference", "amplitude", 0.2);
      const double start = get_number(jr, "reference", "start", 0.5);
      const double plateau = get_number(jr, "reference", "plateau", 1.0);
      const double edge = get_number(jr, "reference", "edge", 0.2);
      signal = reference::ReferenceSignal::smooth_doublet(amp, start, plateau, edge);
      canon_ref["amplitude"] = amp;
      canon_ref["start"] = start;
      canon_ref["plateau"] = plateau;
      canon_ref["edge"] = edge;
    } else if (rkind == "table") {
      check_keys(jr, "reference", {"kind", "channel", "times", "values"});
      if (!jr.contains("times") || !jr.contains("values"))
        throw ConfigError("'reference' of kind table needs 'times' and 'values'");
      const auto times = as_number_list(jr.at("times"), "reference.times");
      const auto values = as_number_list(jr.at("values"), "reference.values");
      signal = reference::ReferenceSignal::table(times, values);
      canon_ref["times"] = times;
      canon_ref["values"] = values;
    } else {
      throw ConfigError(
          "'reference.kind' must be zero|constant|step|smooth_doublet|table");
    }
    sc.reference = reference::ReferenceBank::single(n_out, channel, signal);
  }
  canon["reference"] = canon_ref;

  // ---- diagnostics --------------------------------------------------------
  const json& jd =
      root.contains("diagnostics") ? root.at("diagnostics") : json::object();
  check_keys(jd, "diagnostics", {"pi_equivalence"});
  rc.pi_equivalence =
      jd.contains("pi_equivalence")
          ? as_bool(jd.at("pi_equivalence"), "diagnostics.pi_equivalence")
          : false;
  json jdg;
  jdg["pi_equivalence"] = rc.pi_equivalence;
  canon["diagnostics"] = jdg;

  rc.canonical = canon;
  rc.hash = rng::fnv1a64_hex(canon.dump());
  return rc;
}

}  // namespace indilab::config
