#pragma once

// Log serialization and run metrics.
//
// The CSV writer is the reproducibility surface: every value is rendered
// with %.17g (round-trip exact for doubles), rows are '\n'-terminated, and
// nothing time- or host-dependent is ever written. Two runs of the same
// scenario must produce byte-identical files.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "indilab/sim.hpp"

namespace indilab::log_io {

inline std::string csv_string(const sim::SimLog& log) {
  std::string out;
  out.reserve(log.rows() * log.columns.size() * 12 + 256);
  for (std::size_t c = 0; c < log.columns.size(); ++c) {
    if (c) out += ',';
    out += log.columns[c];
  }
  out += '\n';
  char buf[40];
  for (std::size_t r = 0; r < log.rows(); ++r) {
    for (std::size_t c = 0; c < log.data.size(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", log.data[c][r]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ConfigError("short write to '" + path + "'");
}

inline void write_csv(const sim::SimLog& log, const std::string& path) {
  write_file(path, csv_string(log));
}

/// Run header: metadata and column layout, without the bulk samples.
inline nlohmann::json log_header_json(const sim::SimLog& log) {
  nlohmann::json j;
  j["columns"] = log.columns;
  j["records"] = log.rows();
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& [k, v] : log.metadata) meta[k] = v;
  j["metadata"] = meta;
  return j;
}

inline void write_log_json(const sim::SimLog& log, const std::string& path) {
  write_file(path, log_header_json(log).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct ChannelMetrics {
  std::string channel;
  double rms_e = 0.0;
  double peak_e = 0.0;
  double max_tde_eps = 0.0;
  // first time the tracking error decays to e^-1 of its initial value;
  // NaN when the run does not start from a nonzero error or never settles
  double settle_time_63 = std::numeric_limits<double>::quiet_NaN();
};

struct Metrics {
  std::vector<ChannelMetrics> channels;
  std::size_t records = 0;
  long long envelope_violations = 0;
  std::string config_hash;  // empty when not run from a resolved config
};

/// Interpolated 63.2% settling time of a decaying |e|; NaN if not applicable.
inline double settle_time_63(const std::vector<double>& t,
                             const std::vector<double>& e) {
  if (t.empty() || e.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double e0 = std::abs(e.front());
  if (!(e0 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double target = e0 * std::exp(-1.0);
  for (std::size_t i = 1; i < e.size(); ++i) {
    const double prev = std::abs(e[i - 1]);
    const double cur = std::abs(e[i]);
    if (cur <= target) {
      if (prev <= target || prev == cur) return t[i - 1];
      const double frac = (prev - target) / (prev - cur);
      return t[i - 1] + frac * (t[i] - t[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline Metrics compute_metrics(const sim::SimLog& log) {
  Metrics m;
  m.records = log.rows();
  const auto& t = log.col("t");
  for (const auto& cname : log.columns) {
    if (cname.rfind("e_", 0) != 0) continue;
    const std::string channel = cname.substr(2);
    ChannelMetrics cm;
    cm.channel = channel;
    const auto& e = log.col(cname);
    double sumsq = 0.0;
    for (double v : e) {
      sumsq += v * v;
      cm.peak_e = std::max(cm.peak_e, std::abs(v));
    }
    cm.rms_e = e.empty() ? 0.0 : std::sqrt(sumsq / static_cast<double>(e.size()));
    cm.settle_time_63 = settle_time_63(t, e);
    const auto& hk = log.col("tdeh_" + channel);
    for (std::size_t i = 1; i < hk.size(); ++i)
      cm.max_tde_eps = std::max(cm.max_tde_eps, std::abs(hk[i] - hk[i - 1]));
    m.channels.push_back(std::move(cm));
  }
  if (auto it = log.metadata.find("envelope_violation_count");
      it != log.metadata.end())
    m.envelope_violations = std::stoll(it->second);
  if (auto it = log.metadata.find("config_hash"); it != log.metadata.end())
    m.config_hash = it->second;
  return m;
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["records"] = m.records;
  j["envelope_violations"] = m.envelope_violations;
  if (!m.config_hash.empty()) j["config_hash"] = m.config_hash;
  j["channels"] = nlohmann::json::array();
  for (const auto& c : m.channels) {
    nlohmann::json jc;
    jc["channel"] = c.channel;
    jc["rms_e"] = c.rms_e;
    jc["peak_e"] = c.peak_e;
    jc["max_tde_eps"] = c.max_tde_eps;
    if (std::isfinite(c.settle_time_63))
      jc["settle_time_63"] = c.settle_time_63;
    else
      jc["settle_time_63"] = nullptr;
    j["channels"].push_back(jc);
  }
  return j;
}

inline void write_metrics_json(const Metrics& m, const std::string& path) {
  write_file(path, metrics_to_json(m).dump(2) + "\n");
}

}  // namespace indilab::log_io
