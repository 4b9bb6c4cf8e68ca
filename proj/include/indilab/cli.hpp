#pragma once

// Command implementations behind the `indilab` binary. They are plain
// functions over option structs (with an injectable output stream) so the
// test suite can drive them in-process; the binary's main() is only argv
// plumbing.
//
// Exit codes: 0 success, 1 comparison failed, 2 configuration problem
// (including unknown keys and unusable option combinations), 3 runtime
// failure (divergence, inversion breakdown, envelope abort).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "indilab/config.hpp"
#include "indilab/log_io.hpp"
#include "indilab/sim.hpp"

namespace indilab::cli {

namespace fs = std::filesystem;

inline std::string default_preset_dir() {
  if (const char* env = std::getenv("INDILAB_PRESET_DIR")) return env;
  return "presets";
}

inline std::string default_out_root() {
  if (const char* env = std::getenv("INDILAB_OUT_DIR")) return env;
  return "out";
}

struct CommonOptions {
  std::string config;                  // preset name or file path
  std::vector<std::string> overrides;  // dotted key=value assignments
  std::string preset_dir;              // empty = default_preset_dir()
  std::string out_dir;                 // empty = <out root>/<scenario name>
};

inline config::ResolvedConfig load_resolved(const CommonOptions& opt) {
  if (opt.config.empty()) throw ConfigError("no config given");
  const std::string dir =
      opt.preset_dir.empty() ? default_preset_dir() : opt.preset_dir;
  nlohmann::json j = config::load_json_file(config::find_config(opt.config, dir));
  for (const auto& ov : opt.overrides) config::apply_override(j, ov);
  return config::parse_config(j);
}

inline fs::path ensure_out_dir(const CommonOptions& opt,
                               const std::string& scenario_name) {
  const fs::path dir = opt.out_dir.empty()
                           ? fs::path(default_out_root()) / scenario_name
                           : fs::path(opt.out_dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

inline int cmd_run(const CommonOptions& opt, std::ostream& out = std::cout) {
  config::ResolvedConfig rc = load_resolved(opt);
  sim::SimLog log = sim::run_scenario(rc.scenario);
  log.metadata["config_hash"] = rc.hash;

  const fs::path dir = ensure_out_dir(opt, rc.scenario.name);
  log_io::write_file((dir / "config.json").string(), rc.canonical.dump(2) + "\n");
  log_io::write_csv(log, (dir / "log.csv").string());
  log_io::write_log_json(log, (dir / "log.json").string());

  const log_io::Metrics metrics = log_io::compute_metrics(log);
  nlohmann::json mj = log_io::metrics_to_json(metrics);

  out << "scenario " << rc.scenario.name << " (config " << rc.hash << ")\n";
  out << "  law " << sim::law_name(rc.scenario.law) << ", " << log.rows()
      << " records at ts " << fmt(rc.scenario.ts) << " s\n";
  for (const auto& c : metrics.channels) {
    out << "  " << c.channel << ": rms_e " << fmt(c.rms_e) << ", peak_e "
        << fmt(c.peak_e) << ", max_tde_eps " << fmt(c.max_tde_eps) << "\n";
  }
  if (metrics.envelope_violations > 0)
    out << "  WARNING: " << metrics.envelope_violations
        << " envelope excursions (first: " << log.metadata["envelope_first"]
        << ")\n";

  if (rc.pi_equivalence) {
    if (rc.scenario.law != sim::ControlLaw::INDI_GBAR)
      throw ConfigError(
          "diagnostics.pi_equivalence needs controller.law = indi_gbar");
    const sim::LawDeviation dev = sim::compare_laws(
        rc.scenario, sim::ControlLaw::INDI_GBAR, sim::ControlLaw::PI);
    mj["pi_equivalence"] = {{"max_cmd_dev", dev.max_cmd_dev},
                            {"max_output_dev", dev.max_output_dev}};
    out << "  pi equivalence: max_cmd_dev " << fmt(dev.max_cmd_dev, "%.3e")
        << ", max_output_dev " << fmt(dev.max_output_dev, "%.3e") << "\n";
  }
  log_io::write_file((dir / "metrics.json").string(), mj.dump(2) + "\n");
  out << "  wrote " << (dir / "log.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareOptions {
  CommonOptions a;
  CommonOptions b;
  double tolerance = 1e-10;
  std::string out_dir;  // empty = <out root>/compare
};

inline int cmd_compare(const CompareOptions& opt, std::ostream& out = std::cout) {
  config::ResolvedConfig ra = load_resolved(opt.a);
  config::ResolvedConfig rb = load_resolved(opt.b);

  // everything but the controller must agree, or the comparison is apples
  // to oranges
  for (const char* block : {"plant", "reference", "sim", "noise", "actuator"}) {
    if (ra.canonical.at(block) != rb.canonical.at(block))
      throw ConfigError(std::string("comparison requires identical '") + block +
                        "' blocks (controllers may differ)");
  }

  sim::SimLog la = sim::run_scenario(ra.scenario);
  sim::SimLog lb = sim::run_scenario(rb.scenario);

  sim::LawDeviation dev;
  for (const auto& cname : la.columns) {
    const bool is_cmd = cname.rfind("cmd_", 0) == 0;
    const bool is_err = cname.rfind("e_", 0) == 0;
    if (!is_cmd && !is_err) continue;
    const auto& ca = la.col(cname);
    const auto& cb = lb.col(cname);
    for (std::size_t i = 0; i < ca.size(); ++i) {
      const double d = std::abs(ca[i] - cb[i]);
      if (is_cmd) dev.max_cmd_dev = std::max(dev.max_cmd_dev, d);
      if (is_err) dev.max_output_dev = std::max(dev.max_output_dev, d);
    }
  }

  const bool pass = dev.max_cmd_dev <= opt.tolerance;
  CommonOptions out_opt;
  out_opt.out_dir = opt.out_dir;
  const fs::path dir = ensure_out_dir(out_opt, "compare");
  nlohmann::json j;
  j["a"] = {{"name", ra.scenario.name},
            {"law", sim::law_name(ra.scenario.law)},
            {"config_hash", ra.hash}};
  j["b"] = {{"name", rb.scenario.name},
            {"law", sim::law_name(rb.scenario.law)},
            {"config_hash", rb.hash}};
  j["max_cmd_dev"] = dev.max_cmd_dev;
  j["max_output_dev"] = dev.max_output_dev;
  j["tolerance"] = opt.tolerance;
  j["pass"] = pass;
  log_io::write_file((dir / "compare.json").string(), j.dump(2) + "\n");

  out << (pass ? "PASS" : "FAIL") << ": " << sim::law_name(ra.scenario.law)
      << " vs " << sim::law_name(rb.scenario.law) << " max_cmd_dev "
      << fmt(dev.max_cmd_dev, "%.3e") << " (tolerance "
      << fmt(opt.tolerance, "%.1e") << "), max_output_dev "
      << fmt(dev.max_output_dev, "%.3e") << "\n";
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gainmap
// ---------------------------------------------------------------------------

inline int cmd_gainmap(const CommonOptions& opt, std::ostream& out = std::cout) {
  config::ResolvedConfig rc = load_resolved(opt);
  const sim::Scenario& sc = rc.scenario;
  const auto plant = sc.plant_factory(sc.scale_f, sc.scale_g);
  const Eigen::VectorXd x0 =
      sc.x0.size() ? sc.x0 : Eigen::VectorXd::Zero(plant->state_dim());
  const Eigen::MatrixXd G0 = sc.gbar_scale * plant->G_nominal_out(x0);
  const control::EffectorBlendingGain gbar =
      control::EffectorBlendingGain::per_axis(G0.diagonal());
  const control::DesiredErrorDynamics dyn =
      sc.kd.size() ? control::DesiredErrorDynamics(sc.kp, sc.kd)
                   : control::DesiredErrorDynamics(sc.kp);
  const control::PidGains gains =
      dyn.second_order() ? control::map_indi_to_pid(dyn, gbar, sc.ts)
                         : control::map_indi_to_pi(dyn, gbar, sc.ts);

  nlohmann::json j;
  j["config_hash"] = rc.hash;
  j["ts"] = sc.ts;
  j["form"] = gains.has_derivative() ? "pid" : "pi";
  j["channels"] = nlohmann::json::array();
  const auto names = plant->output_names();
  out << "incremental-law gains -> velocity-form " << j["form"].get<std::string>()
      << " (ts " << fmt(sc.ts) << " s)\n";
  for (Eigen::Index i = 0; i < gains.channels(); ++i) {
    nlohmann::json jc;
    jc["channel"] = names[static_cast<std::size_t>(i)];
    jc["gbar"] = gbar.diag[i];
    jc["kp"] = dyn.kp[i];
    if (dyn.second_order()) jc["kd"] = dyn.kd[i];
    jc["K"] = gains.K[i];
    jc["Ti"] = gains.Ti[i];
    if (gains.has_derivative()) jc["Td"] = gains.Td[i];
    jc["delta_dc"] = gains.delta_dc[i];
    j["channels"].push_back(jc);
    out << "  " << names[static_cast<std::size_t>(i)] << ": gbar "
        << fmt(gbar.diag[i]) << ", K " << fmt(gains.K[i], "%.12g") << ", Ti "
        << fmt(gains.Ti[i], "%.12g");
    if (gains.has_derivative()) out << ", Td " << fmt(gains.Td[i], "%.12g");
    out << "\n";
  }
  const fs::path dir = ensure_out_dir(opt, rc.scenario.name);
  log_io::write_file((dir / "gains.json").string(), j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepOptions {
  CommonOptions base;
  std::string kind;                    // "tde" or "mismatch"
  std::vector<double> ts_list;         // tde
  std::vector<double> scale_f_list;    // mismatch
  std::vector<std::string> laws;       // mismatch; default ndi,indi_gbar,pi
};

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out = std::cout) {
  config::ResolvedConfig rc = load_resolved(opt.base);
  const fs::path dir = ensure_out_dir(opt.base, rc.scenario.name);

  if (opt.kind == "tde") {
    if (opt.ts_list.empty())
      throw ConfigError("tde sweep needs at least one --ts value");
    const auto pts = sim::tde_error_sweep(rc.scenario, opt.ts_list);
    out << "one-sample drift-estimate error vs sample time\n";
    nlohmann::json rows = nlohmann::json::array();
    std::string csv = "ts,max_eps,ratio_to_prev\n";
    double prev = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double ratio = i ? prev / pts[i].max_eps : 0.0;
      out << "  ts " << fmt(pts[i].ts) << ": max_eps "
          << fmt(pts[i].max_eps, "%.6e");
      if (i) out << " (prev/this " << fmt(ratio, "%.3f") << ")";
      out << "\n";
      nlohmann::json row;
      row["ts"] = pts[i].ts;
      row["max_eps"] = pts[i].max_eps;
      if (i) row["ratio_to_prev"] = ratio;
      rows.push_back(row);
      csv += fmt(pts[i].ts, "%.17g") + "," + fmt(pts[i].max_eps, "%.17g") +
             "," + (i ? fmt(ratio, "%.17g") : std::string("")) + "\n";
      prev = pts[i].max_eps;
    }
    nlohmann::json j;
    j["kind"] = "tde";
    j["config_hash"] = rc.hash;
    j["rows"] = rows;
    log_io::write_file((dir / "sweep.json").string(), j.dump(2) + "\n");
    log_io::write_file((dir / "sweep.csv").string(), csv);
    return 0;
  }

  if (opt.kind == "mismatch") {
    if (opt.scale_f_list.empty())
      throw ConfigError("mismatch sweep needs at least one --scale-f value");
    std::vector<sim::ControlLaw> laws;
    if (opt.laws.empty()) {
      laws = {sim::ControlLaw::NDI, sim::ControlLaw::INDI_GBAR,
              sim::ControlLaw::PI};
    } else {
      for (const auto& name : opt.laws) laws.push_back(sim::law_from_name(name));
    }
    const auto table = sim::mismatch_sweep(rc.scenario, opt.scale_f_list, laws);
    out << "tracking error vs drift distortion\n";
    nlohmann::json rows = nlohmann::json::array();
    std::string csv = "scale_f,law,rms_e,peak_e\n";
    for (const auto& p : table) {
      out << "  scale_f " << fmt(p.scale_f) << " " << sim::law_name(p.law)
          << ": rms_e " << fmt(p.rms_e, "%.6e") << ", peak_e "
          << fmt(p.peak_e, "%.6e") << "\n";
      nlohmann::json row;
      row["scale_f"] = p.scale_f;
      row["law"] = sim::law_name(p.law);
      row["rms_e"] = p.rms_e;
      row["peak_e"] = p.peak_e;
      rows.push_back(row);
      csv += fmt(p.scale_f, "%.17g") + "," + sim::law_name(p.law) + "," +
             fmt(p.rms_e, "%.17g") + "," + fmt(p.peak_e, "%.17g") + "\n";
    }
    nlohmann::json j;
    j["kind"] = "mismatch";
    j["config_hash"] = rc.hash;
    j["rows"] = rows;
    log_io::write_file((dir / "sweep.json").string(), j.dump(2) + "\n");
    log_io::write_file((dir / "sweep.csv").string(), csv);
    return 0;
  }

  throw ConfigError("sweep kind must be tde|mismatch, got '" + opt.kind + "'");
}

}  // namespace indilab::cli
