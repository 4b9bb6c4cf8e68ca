#pragma once

// Closed-loop simulation engine.
//
// Timing model, which everything downstream depends on:
//
//   * The controller runs at a fixed sample time ts. At tick k (t = k*ts) it
//     reads the measurement, differences it against the sample stored at
//     k-1, and issues the command that is applied over [t, t+ts). The
//     previous sample enters only through that finite difference — the
//     command applied over an interval is always built from the measurement
//     taken at the interval's left edge.
//   * When the actuator is enabled, the incremental laws build on the
//     actuator's measured output at the tick instant, not on the previous
//     command. With actuator lag comparable to ts this grounding is what
//     keeps the discrete loop stable; it also matches how an airframe would
//     actually be instrumented (deflection is measurable, the unrealized
//     command is not).
//   * Between ticks the plant is integrated with classical RK4 in `substeps`
//     equal pieces; the actuator output is sampled exactly (it has a closed
//     form under a held command) at each RK4 stage time.
//
// All arithmetic is straight double evaluation in a fixed order, and noise
// comes from the seeded stream in rng.hpp, so a given scenario reproduces
// its log byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indilab/control.hpp"
#include "indilab/errors.hpp"
#include "indilab/plant.hpp"
#include "indilab/reference.hpp"
#include "indilab/rng.hpp"

namespace indilab::sim {

enum class ControlLaw { NDI, INDI_G0, INDI_GBAR, TDC, PI, PID };
enum class AccelSource { ErrorFd, DerivEval };

inline const char* law_name(ControlLaw law) {
  switch (law) {
    case ControlLaw::NDI: return "ndi";
    case ControlLaw::INDI_G0: return "indi_g0";
    case ControlLaw::INDI_GBAR: return "indi_gbar";
    case ControlLaw::TDC: return "tdc";
    case ControlLaw::PI: return "pi";
    case ControlLaw::PID: return "pid";
  }
  return "?";
}

inline ControlLaw law_from_name(const std::string& s) {
  if (s == "ndi") return ControlLaw::NDI;
  if (s == "indi_g0") return ControlLaw::INDI_G0;
  if (s == "indi_gbar") return ControlLaw::INDI_GBAR;
  if (s == "tdc") return ControlLaw::TDC;
  if (s == "pi") return ControlLaw::PI;
  if (s == "pid") return ControlLaw::PID;
  throw ConfigError("unknown control law '" + s +
                    "' (expected ndi|indi_g0|indi_gbar|tdc|pi|pid)");
}

inline const char* accel_name(AccelSource a) {
  return a == AccelSource::ErrorFd ? "error_fd" : "deriv_eval";
}

inline AccelSource accel_from_name(const std::string& s) {
  if (s == "error_fd") return AccelSource::ErrorFd;
  if (s == "deriv_eval") return AccelSource::DerivEval;
  throw ConfigError("unknown acceleration source '" + s +
                    "' (expected error_fd|deriv_eval)");
}

struct ActuatorConfig {
  bool enabled = true;
  double gain = 1.0;  // [-]
  double tau = 0.01;  // [s]
  std::optional<double> position_limit;  // [rad]
  std::optional<double> rate_limit;      // [rad/s]
};

struct NoiseConfig {
  double std = 0.0;          // measurement noise, per output channel
  std::uint64_t seed = 7;
};

using PlantFactory =
    std::function<std::shared_ptr<const Plant>(double scale_f, double scale_g)>;

inline PlantFactory make_rotational_factory(dynamics::RotationalModel model) {
  return [model](double sf, double sg) {
    return std::make_shared<const RotationalPlant>(model, sf, sg);
  };
}

inline PlantFactory make_longitudinal_factory(
    dynamics::LongitudinalModel model,
    dynamics::EnvelopeMode mode = dynamics::EnvelopeMode::Warn) {
  return [model, mode](double sf, double sg) {
    return std::make_shared<const LongitudinalPlant>(model, sf, sg, mode);
  };
}

struct Scenario {
  std::string name = "run";
  PlantFactory plant_factory;
  reference::ReferenceBank reference = reference::ReferenceBank::zeros(1);
  ControlLaw law = ControlLaw::INDI_GBAR;
  AccelSource accel = AccelSource::ErrorFd;

  Eigen::VectorXd kp;  // error-dynamics gains, one per output channel
  Eigen::VectorXd kd;  // empty for first-order error dynamics

  double gbar_scale = 1.0;  // multiplies the nominal effectiveness estimate
  double scale_f = 1.0;     // truth-model drift distortion
  double scale_g = 1.0;     // truth-model effectiveness distortion

  double ts = 0.01;      // [s]
  double duration = 4.0; // [s]
  int substeps = 10;     // RK4 substeps per controller interval

  Eigen::VectorXd x0;          // empty = origin
  Eigen::VectorXd delta_trim;  // empty = zero trim

  ActuatorConfig actuator;
  NoiseConfig noise;
};

/// Column-oriented run log. Columns, in order: t, the plant states, then per
/// output channel yd_* (commanded), ym_* (measured), e_* (true tracking
/// error), then per input channel cmd_* (issued) and applied_* (realized),
/// then per output channel tdeh_* (the drift estimate the time-delay view
/// would reconstruct from perfect signals).
struct SimLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[column][row]
  std::map<std::string, std::string> metadata;

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }

  Eigen::Index column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<Eigen::Index>(i);
    throw ConfigError("log has no column named '" + name + "'");
  }

  const std::vector<double>& col(const std::string& name) const {
    return data[static_cast<std::size_t>(column_index(name))];
  }
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// One classical RK4 step; `stage_delta` maps stage index (0 at the step
/// start, 1 at the midpoint, 2 at the end) to the deflection vector there.
template <typename StageDelta>
VectorXd rk4_step(const Plant& plant, const VectorXd& x, double h,
                  StageDelta&& stage_delta) {
  const VectorXd k1 = plant.deriv_truth(x, stage_delta(0));
  const VectorXd k2 = plant.deriv_truth(x + (0.5 * h) * k1, stage_delta(1));
  const VectorXd k3 = plant.deriv_truth(x + (0.5 * h) * k2, stage_delta(1));
  const VectorXd k4 = plant.deriv_truth(x + h * k3, stage_delta(2));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Fixed-step open-loop RK4 integration with a held deflection — the same
/// integrator the closed-loop driver uses, exposed for convergence studies.
inline VectorXd integrate_open_loop(const Plant& plant, VectorXd x,
                                    const VectorXd& delta, double duration,
                                    int steps) {
  if (!(duration > 0.0) || steps < 1)
    throw ConfigError("open-loop integration needs duration > 0 and steps >= 1");
  const double h = duration / steps;
  for (int i = 0; i < steps; ++i)
    x = detail::rk4_step(plant, x, h, [&](int) -> const VectorXd& { return delta; });
  return x;
}

inline SimLog run_scenario(const Scenario& sc) {
  // ---- validation and setup ------------------------------------------------
  if (!sc.plant_factory) throw ConfigError("scenario has no plant");
  if (!(sc.ts > 0.0) || !std::isfinite(sc.ts))
    throw ConfigError("sample time must be positive");
  if (!(sc.duration >= sc.ts)) throw ConfigError("duration must cover >= 1 sample");
  if (sc.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (!std::isfinite(sc.gbar_scale) || sc.gbar_scale == 0.0)
    throw ConfigError("gbar_scale must be finite and nonzero");
  if (!(sc.noise.std >= 0.0) || !std::isfinite(sc.noise.std))
    throw ConfigError("noise std must be finite and >= 0");
  if (sc.actuator.enabled &&
      (!(sc.actuator.tau > 0.0) || !(sc.actuator.gain > 0.0)))
    throw ConfigError("actuator gain and tau must be positive");

  const std::shared_ptr<const Plant> plant =
      sc.plant_factory(sc.scale_f, sc.scale_g);
  const Eigen::Index nx = plant->state_dim();
  const Eigen::Index nin = plant->input_dim();
  const Eigen::Index ny = plant->output_dim();
  if (nin != ny)
    throw ConfigError("this laboratory pairs one effector channel per output");
  if (sc.reference.channels() != ny)
    throw ConfigError("reference bank must have one signal per output channel");
  if (sc.kp.size() != ny)
    throw ConfigError("kp must have one gain per output channel");
  if (sc.kd.size() != 0 && sc.kd.size() != ny)
    throw ConfigError("kd must be empty or match the output dimension");

  const control::DesiredErrorDynamics dyn =
      sc.kd.size() ? control::DesiredErrorDynamics(sc.kp, sc.kd)
                   : control::DesiredErrorDynamics(sc.kp);
  if (sc.law == ControlLaw::PID && !dyn.second_order())
    throw ConfigError("pid law needs second-order error dynamics (kd)");
  if (sc.law != ControlLaw::PID && dyn.second_order())
    throw ConfigError("kd is only meaningful for the pid law");

  VectorXd x = sc.x0.size() ? sc.x0 : VectorXd::Zero(nx);
  if (x.size() != nx) throw ConfigError("x0 must match the plant state dimension");
  VectorXd trim = sc.delta_trim.size() ? sc.delta_trim : VectorXd::Zero(nin);
  if (trim.size() != nin)
    throw ConfigError("delta_trim must match the plant input dimension");

  // controller-side effectiveness: diagonal estimate at the initial state,
  // optionally mis-scaled to exercise robustness
  const MatrixXd G0 = sc.gbar_scale * plant->G_nominal_out(x);
  const control::EffectorBlendingGain gbar =
      control::EffectorBlendingGain::per_axis(G0.diagonal());

  std::optional<control::PidGains> mapped;
  if (sc.law == ControlLaw::PI)
    mapped = control::map_indi_to_pi(dyn, gbar, sc.ts);
  else if (sc.law == ControlLaw::PID)
    mapped = control::map_indi_to_pid(dyn, gbar, sc.ts);

  control::ControllerMemory mem;
  mem.set_initial(trim);

  std::vector<dynamics::ActuatorState> act(static_cast<std::size_t>(nin));
  for (Eigen::Index i = 0; i < nin; ++i) {
    auto& a = act[static_cast<std::size_t>(i)];
    a.deflection = trim[i];
    a.gain = sc.actuator.gain;
    a.tau = sc.actuator.tau;
    a.position_limit = sc.actuator.position_limit;
    a.rate_limit = sc.actuator.rate_limit;
  }

  rng::GaussianStream noise(sc.noise.seed);

  const long long N = std::llround(sc.duration / sc.ts);
  const double h = sc.ts / sc.substeps;

  // ---- log layout ------------------------------------------------------
  SimLog log;
  log.columns.push_back("t");
  for (const auto& n : plant->state_names()) log.columns.push_back(n);
  const auto out_names = plant->output_names();
  const auto in_names = plant->input_names();
  for (const auto& n : out_names) log.columns.push_back("yd_" + n);
  for (const auto& n : out_names) log.columns.push_back("ym_" + n);
  for (const auto& n : out_names) log.columns.push_back("e_" + n);
  for (const auto& n : in_names) log.columns.push_back("cmd_" + n);
  for (const auto& n : in_names) log.columns.push_back("applied_" + n);
  for (const auto& n : out_names) log.columns.push_back("tdeh_" + n);
  log.data.assign(log.columns.size(), {});
  for (auto& c : log.data) c.reserve(static_cast<std::size_t>(N + 1));

  std::vector<std::string> violations;

  // ---- closed loop -----------------------------------------------------
  VectorXd yd(ny), yddot(ny), delta_cmd = trim;
  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * sc.ts;
    sc.reference.eval(t, yd, yddot);

    const VectorXd y_true = plant->output(x);
    VectorXd ym = y_true;
    if (sc.noise.std > 0.0)
      for (Eigen::Index i = 0; i < ny; ++i) ym[i] += sc.noise.std * noise.next();

    const VectorXd e = yd - ym;
    mem.observe(e, sc.ts);

    // deflection actually applied over the *previous* interval, as measured
    // at this tick
    VectorXd delta_applied(nin);
    if (sc.actuator.enabled) {
      for (Eigen::Index i = 0; i < nin; ++i)
        delta_applied[i] = act[static_cast<std::size_t>(i)].deflection;
      mem.ground_on(delta_applied);
    } else {
      delta_applied = mem.delta0;  // previous command (or trim at k = 0)
    }

    // ---- law dispatch: command applied over [t, t+ts) -------------------
    VectorXd u;
    switch (sc.law) {
      case ControlLaw::NDI: {
        const VectorXd nu_v = control::virtual_control(dyn, e, yddot);
        u = control::detail::solve_checked(plant->G_nominal_out(x),
                                           nu_v - plant->f_nominal_out(x),
                                           "output effectiveness");
        break;
      }
      case ControlLaw::INDI_GBAR: {
        if (sc.accel == AccelSource::ErrorFd) {
          u = control::indi_discrete_step(mem, dyn, gbar);
        } else {
          mem.omega_dot0 = plant->output_deriv_truth(x, delta_applied);
          const VectorXd nu_v = control::virtual_control(dyn, e, yddot);
          u = control::indi_control_gbar(mem, nu_v, gbar);
        }
        break;
      }
      case ControlLaw::INDI_G0: {
        mem.omega_dot0 = sc.accel == AccelSource::ErrorFd
                             ? VectorXd(yddot - mem.edot0)
                             : plant->output_deriv_truth(x, delta_applied);
        const VectorXd nu_v = control::virtual_control(dyn, e, yddot);
        u = control::indi_control_g0(mem, nu_v, G0);
        break;
      }
      case ControlLaw::TDC: {
        mem.omega_dot0 = sc.accel == AccelSource::ErrorFd
                             ? VectorXd(yddot - mem.edot0)
                             : plant->output_deriv_truth(x, delta_applied);
        const VectorXd nu_v = control::virtual_control(dyn, e, yddot);
        u = control::tdc_control(mem, nu_v, gbar);
        break;
      }
      case ControlLaw::PI:
        u = control::incremental_pi_step(mem, *mapped);
        break;
      case ControlLaw::PID:
        u = control::incremental_pid_step(mem, *mapped);
        break;
    }
    mem.delta0 = u;
    delta_cmd = u;
    if (!u.allFinite())
      throw SimulationError("control command diverged", t);

    // with the actuator off the command is realized instantly
    if (!sc.actuator.enabled) delta_applied = u;

    // perfect-signal drift reconstruction for the TDE diagnostics
    const VectorXd hk = plant->output_deriv_truth(x, delta_applied) -
                        gbar.diag.cwiseProduct(delta_applied);

    plant->envelope_violations(x, t, violations);

    // ---- record ----------------------------------------------------------
    {
      std::size_t c = 0;
      auto push = [&](double v) { log.data[c++].push_back(v); };
      push(t);
      for (Eigen::Index i = 0; i < nx; ++i) push(x[i]);
      for (Eigen::Index i = 0; i < ny; ++i) push(yd[i]);
      for (Eigen::Index i = 0; i < ny; ++i) push(ym[i]);
      for (Eigen::Index i = 0; i < ny; ++i) push(yd[i] - y_true[i]);
      for (Eigen::Index i = 0; i < nin; ++i) push(delta_cmd[i]);
      for (Eigen::Index i = 0; i < nin; ++i) push(delta_applied[i]);
      for (Eigen::Index i = 0; i < ny; ++i) push(hk[i]);
    }

    if (k == N) break;

    // ---- integrate one controller interval ------------------------------
    try {
      for (int s = 0; s < sc.substeps; ++s) {
        if (sc.actuator.enabled) {
          VectorXd d0(nin), dm(nin), d1(nin);
          for (Eigen::Index i = 0; i < nin; ++i) {
            const auto& a = act[static_cast<std::size_t>(i)];
            d0[i] = dynamics::actuator_output_at(a, delta_cmd[i], 0.0);
            dm[i] = dynamics::actuator_output_at(a, delta_cmd[i], 0.5 * h);
            d1[i] = dynamics::actuator_output_at(a, delta_cmd[i], h);
          }
          x = detail::rk4_step(*plant, x, h,
                               [&](int stage) -> const VectorXd& {
                                 return stage == 0 ? d0 : (stage == 1 ? dm : d1);
                               });
          for (Eigen::Index i = 0; i < nin; ++i) {
            auto& a = act[static_cast<std::size_t>(i)];
            a = dynamics::actuator_step(a, delta_cmd[i], h);
          }
        } else {
          x = detail::rk4_step(
              *plant, x, h, [&](int) -> const VectorXd& { return delta_cmd; });
        }
        if (!x.allFinite())
          throw SimulationError("plant state diverged", t);
      }
    } catch (const ModelError& err) {
      throw SimulationError(std::string(err.what()), t);
    }
  }

  // ---- metadata ----------------------------------------------------------
  log.metadata["name"] = sc.name;
  log.metadata["law"] = law_name(sc.law);
  log.metadata["accel"] = accel_name(sc.accel);
  log.metadata["ts"] = detail::fmt17(sc.ts);
  log.metadata["duration"] = detail::fmt17(sc.duration);
  log.metadata["substeps"] = std::to_string(sc.substeps);
  log.metadata["noise_std"] = detail::fmt17(sc.noise.std);
  log.metadata["seed"] = std::to_string(sc.noise.seed);
  log.metadata["gbar_scale"] = detail::fmt17(sc.gbar_scale);
  log.metadata["scale_f"] = detail::fmt17(sc.scale_f);
  log.metadata["scale_g"] = detail::fmt17(sc.scale_g);
  log.metadata["actuator"] = sc.actuator.enabled ? "on" : "off";
  {
    std::string g;
    for (Eigen::Index i = 0; i < gbar.diag.size(); ++i) {
      if (i) g += ",";
      g += detail::fmt17(gbar.diag[i]);
    }
    log.metadata["ghat"] = g;
  }
  log.metadata["records"] = std::to_string(log.rows());
  log.metadata["envelope_violation_count"] = std::to_string(violations.size());
  if (!violations.empty()) log.metadata["envelope_first"] = violations.front();
  return log;
}

// ---------------------------------------------------------------------------
// derived studies
// ---------------------------------------------------------------------------

/// Runs the same scenario under two laws and reports the worst command and
/// true-output trajectory deviations. With matched seeds the runs see
/// identical noise, so any difference is the laws themselves.
struct LawDeviation {
  double max_cmd_dev = 0.0;
  double max_output_dev = 0.0;
};

inline LawDeviation compare_laws(const Scenario& base, ControlLaw a,
                                 ControlLaw b) {
  Scenario sa = base, sb = base;
  sa.law = a;
  sb.law = b;
  const SimLog la = run_scenario(sa);
  const SimLog lb = run_scenario(sb);
  LawDeviation dev;
  for (const auto& cname : la.columns) {
    if (cname.rfind("cmd_", 0) == 0) {
      const auto& ca = la.col(cname);
      const auto& cb = lb.col(cname);
      for (std::size_t i = 0; i < ca.size(); ++i)
        dev.max_cmd_dev = std::max(dev.max_cmd_dev, std::abs(ca[i] - cb[i]));
    }
    if (cname.rfind("e_", 0) == 0) {
      const auto& ca = la.col(cname);
      const auto& cb = lb.col(cname);
      for (std::size_t i = 0; i < ca.size(); ++i)
        dev.max_output_dev =
            std::max(dev.max_output_dev, std::abs(ca[i] - cb[i]));
    }
  }
  return dev;
}

/// Largest tick-to-tick jump of the reconstructed drift term, per channel —
/// the quantity the time-delay estimate is in error by exactly one sample of.
inline double max_tde_eps(const SimLog& log) {
  double worst = 0.0;
  for (const auto& cname : log.columns) {
    if (cname.rfind("tdeh_", 0) != 0) continue;
    const auto& c = log.col(cname);
    for (std::size_t i = 1; i < c.size(); ++i)
      worst = std::max(worst, std::abs(c[i] - c[i - 1]));
  }
  return worst;
}

struct TdePoint {
  double ts;
  double max_eps;
};

/// Reruns the scenario over a list of sample times and reports the worst
/// one-sample drift jump for each; halving ts should roughly halve it.
inline std::vector<TdePoint> tde_error_sweep(Scenario base,
                                             const std::vector<double>& ts_list) {
  std::vector<TdePoint> out;
  out.reserve(ts_list.size());
  for (double ts : ts_list) {
    base.ts = ts;
    out.push_back({ts, max_tde_eps(run_scenario(base))});
  }
  return out;
}

struct MismatchPoint {
  double scale_f;
  ControlLaw law;
  double rms_e;
  double peak_e;
};

/// Tracking quality across drift-distortion factors, per law.
inline std::vector<MismatchPoint> mismatch_sweep(
    Scenario base, const std::vector<double>& scale_fs,
    const std::vector<ControlLaw>& laws) {
  std::vector<MismatchPoint> out;
  for (double sf : scale_fs) {
    for (ControlLaw law : laws) {
      base.scale_f = sf;
      base.law = law;
      const SimLog log = run_scenario(base);
      double sumsq = 0.0, peak = 0.0;
      std::size_t n = 0;
      for (const auto& cname : log.columns) {
        if (cname.rfind("e_", 0) != 0) continue;
        for (double v : log.col(cname)) {
          sumsq += v * v;
          peak = std::max(peak, std::abs(v));
          ++n;
        }
      }
      out.push_back({sf, law, n ? std::sqrt(sumsq / n) : 0.0, peak});
    }
  }
  return out;
}

}  // namespace indilab::sim
