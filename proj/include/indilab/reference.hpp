#pragma once

// Reference trajectory generators. Every signal reports both the value and
// its analytic time derivative, because the controllers feed ydot_d forward;
// differentiating the reference numerically inside the loop would smear the
// very timing properties the closed-loop tests pin down.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "indilab/errors.hpp"

namespace indilab::reference {

struct ReferenceSample {
  double y = 0.0;     // commanded output
  double ydot = 0.0;  // its analytic derivative
};

/// One output channel's reference. Construct through the factories.
class ReferenceSignal {
 public:
  ReferenceSignal() = default;  // zero signal

  static ReferenceSignal zero() { return ReferenceSignal(); }

  static ReferenceSignal constant(double level) {
    ReferenceSignal r;
    r.kind_ = Kind::Step;
    r.amplitude_ = level;
    r.start_ = -1.0;  // active from t = 0 onward
    return r;
  }

  static ReferenceSignal step(double amplitude, double start_time) {
    if (!std::isfinite(amplitude) || !std::isfinite(start_time))
      throw ConfigError("step reference parameters must be finite");
    ReferenceSignal r;
    r.kind_ = Kind::Step;
    r.amplitude_ = amplitude;
    r.start_ = start_time;
    return r;
  }

  /// Doublet with raised-cosine transitions: 0 -> +A -> -A -> 0, each edge
  /// taking edge_duration and each extreme held for plateau_duration.
  /// edge_duration = 0 degenerates to hard switching (zero ydot everywhere).
  static ReferenceSignal smooth_doublet(double amplitude, double start_time,
                                        double plateau_duration,
                                        double edge_duration) {
    if (!std::isfinite(amplitude) || !std::isfinite(start_time))
      throw ConfigError("doublet reference parameters must be finite");
    if (!(plateau_duration >= 0.0) || !(edge_duration >= 0.0))
      throw ConfigError("doublet durations must be non-negative");
    ReferenceSignal r;
    r.kind_ = Kind::Doublet;
    r.amplitude_ = amplitude;
    r.start_ = start_time;
    r.plateau_ = plateau_duration;
    r.edge_ = edge_duration;
    return r;
  }

  /// Piecewise-linear interpolation through (t, y) pairs; held flat outside
  /// the table. The derivative is the segment slope (zero beyond the ends).
  static ReferenceSignal table(std::vector<double> times,
                               std::vector<double> values) {
    if (times.size() != values.size())
      throw ConfigError("reference table needs matching time/value lengths");
    if (times.size() < 2)
      throw ConfigError("reference table needs at least two points");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
        throw ConfigError("reference table entries must be finite");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw ConfigError("reference table times must be strictly increasing");
    }
    ReferenceSignal r;
    r.kind_ = Kind::Table;
    r.times_ = std::move(times);
    r.values_ = std::move(values);
    return r;
  }

  ReferenceSample eval(double t) const {
    switch (kind_) {
      case Kind::Zero:
        return {0.0, 0.0};
      case Kind::Step:
        return {t >= start_ ? amplitude_ : 0.0, 0.0};
      case Kind::Doublet:
        return eval_doublet(t);
      case Kind::Table:
        return eval_table(t);
    }
    return {0.0, 0.0};
  }

 private:
  enum class Kind { Zero, Step, Doublet, Table };

  ReferenceSample eval_doublet(double t) const {
    // transition list: (edge start, from level, to level)
    const double a = amplitude_;
    const struct {
      double t0, from, to;
    } edges[3] = {
        {start_, 0.0, a},
        {start_ + edge_ + plateau_, a, -a},
        {start_ + 2.0 * edge_ + 2.0 * plateau_, -a, 0.0},
    };
    double level = 0.0;
    for (const auto& eg : edges) {
      if (t >= eg.t0 + edge_) {
        level = eg.to;  // past this transition entirely
      } else if (t >= eg.t0 && edge_ > 0.0) {
        const double s = (t - eg.t0) / edge_;
        const double y =
            eg.from + (eg.to - eg.from) * 0.5 * (1.0 - std::cos(M_PI * s));
        const double yd =
            (eg.to - eg.from) * M_PI / (2.0 * edge_) * std::sin(M_PI * s);
        return {y, yd};
      } else {
        break;  // before this transition: hold the accumulated level
      }
    }
    return {level, 0.0};
  }

  ReferenceSample eval_table(double t) const {
    if (t <= times_.front()) return {values_.front(), 0.0};
    if (t >= times_.back()) return {values_.back(), 0.0};
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double t0 = times_[i - 1], t1 = times_[i];
    const double y0 = values_[i - 1], y1 = values_[i];
    const double slope = (y1 - y0) / (t1 - t0);
    return {y0 + slope * (t - t0), slope};
  }

  Kind kind_ = Kind::Zero;
  double amplitude_ = 0.0;
  double start_ = 0.0;
  double plateau_ = 0.0;
  double edge_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// One signal per controlled output channel.
class ReferenceBank {
 public:
  explicit ReferenceBank(std::vector<ReferenceSignal> channels)
      : channels_(std::move(channels)) {
    if (channels_.empty()) throw ConfigError("reference bank needs >= 1 channel");
  }

  /// All-zero references for n channels.
  static ReferenceBank zeros(Eigen::Index n) {
    if (n < 1) throw ConfigError("reference bank needs >= 1 channel");
    return ReferenceBank(
        std::vector<ReferenceSignal>(static_cast<std::size_t>(n)));
  }

  /// `signal` on channel `idx`, zero elsewhere.
  static ReferenceBank single(Eigen::Index n, Eigen::Index idx,
                              ReferenceSignal signal) {
    if (idx < 0 || idx >= n)
      throw ConfigError("reference channel index out of range");
    std::vector<ReferenceSignal> ch(static_cast<std::size_t>(n));
    ch[static_cast<std::size_t>(idx)] = std::move(signal);
    return ReferenceBank(std::move(ch));
  }

  Eigen::Index channels() const {
    return static_cast<Eigen::Index>(channels_.size());
  }

  void eval(double t, Eigen::VectorXd& y, Eigen::VectorXd& ydot) const {
    y.resize(channels());
    ydot.resize(channels());
    for (Eigen::Index i = 0; i < channels(); ++i) {
      const ReferenceSample s = channels_[static_cast<std::size_t>(i)].eval(t);
      y[i] = s.y;
      ydot[i] = s.ydot;
    }
  }

 private:
  std::vector<ReferenceSignal> channels_;
};

}  // namespace indilab::reference
