// Config parsing: strictness, defaults, canonicalization, overrides.

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "indilab/config.hpp"

using namespace indilab;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

json minimal_longitudinal() {
  return json::parse(R"({
    "plant": {"kind": "longitudinal"},
    "controller": {"law": "indi_gbar", "kp": [50.0]}
  })");
}

json minimal_rotational() {
  return json::parse(R"({
    "plant": {
      "kind": "rotational",
      "rotational": {
        "inertia": [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 4.0]],
        "control_effectiveness": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
      }
    },
    "controller": {"law": "ndi", "kp": [20.0, 20.0, 20.0]}
  })");
}

}  // namespace

TEST_CASE("a minimal config resolves with documented defaults", "[config]") {
  const config::ResolvedConfig rc = config::parse_config(minimal_longitudinal());
  const sim::Scenario& sc = rc.scenario;
  REQUIRE(sc.name == "run");
  REQUIRE(sc.law == sim::ControlLaw::INDI_GBAR);
  REQUIRE(sc.accel == sim::AccelSource::ErrorFd);
  REQUIRE(sc.kp.size() == 1);
  REQUIRE(sc.kp[0] == 50.0);
  REQUIRE(sc.ts == 0.01);
  REQUIRE(sc.duration == 4.0);
  REQUIRE(sc.substeps == 10);
  REQUIRE(sc.gbar_scale == 1.0);
  REQUIRE(sc.scale_f == 1.0);
  REQUIRE(sc.actuator.enabled);
  REQUIRE(sc.actuator.tau == 0.01);
  REQUIRE(sc.noise.std == 0.0);
  REQUIRE(sc.noise.seed == 7);
  REQUIRE_FALSE(rc.pi_equivalence);
  REQUIRE(rc.hash.size() == 16);
  // the resolved scenario must actually run
  sim::Scenario quick = sc;
  quick.duration = 0.1;
  REQUIRE_NOTHROW(sim::run_scenario(quick));
}

TEST_CASE("rotational configs build a three-channel scenario", "[config]") {
  const config::ResolvedConfig rc = config::parse_config(minimal_rotational());
  REQUIRE(rc.scenario.kp.size() == 3);
  REQUIRE(rc.scenario.reference.channels() == 3);
  sim::Scenario quick = rc.scenario;
  quick.duration = 0.05;
  REQUIRE_NOTHROW(sim::run_scenario(quick));
}

TEST_CASE("unknown keys are rejected with their dotted path", "[config][strict]") {
  {
    json j = minimal_longitudinal();
    j["controller"]["kpp"] = 1.0;
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("controller.kpp"));
  }
  {
    json j = minimal_longitudinal();
    j["plant"]["longitudinal"] = {{"qba", 1.0}};
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("plant.longitudinal.qba"));
  }
  {
    json j = minimal_longitudinal();
    j["simm"] = json::object();
    REQUIRE_THROWS_WITH(config::parse_config(j), ContainsSubstring("simm"));
  }
  {
    json j = minimal_longitudinal();
    j["reference"] = {{"kind", "step"}, {"amplitude", 0.1}, {"plateau", 2.0}};
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("reference.plateau"));
  }
}

TEST_CASE("required keys are enforced", "[config][strict]") {
  {
    json j = minimal_longitudinal();
    j.erase("plant");
    REQUIRE_THROWS_WITH(config::parse_config(j), ContainsSubstring("plant"));
  }
  {
    json j = minimal_longitudinal();
    j["controller"].erase("law");
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("controller.law"));
  }
  {
    json j = minimal_longitudinal();
    j["controller"].erase("kp");
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("controller.kp"));
  }
  {
    json j = minimal_rotational();
    j["plant"].erase("rotational");
    REQUIRE_THROWS_AS(config::parse_config(j), ConfigError);
  }
}

TEST_CASE("plant sub-blocks must match the declared kind", "[config][strict]") {
  json j = minimal_longitudinal();
  j["plant"]["rotational"] = json::object();
  REQUIRE_THROWS_WITH(config::parse_config(j),
                      ContainsSubstring("plant.rotational"));

  json r = minimal_rotational();
  r["plant"]["longitudinal"] = json::object();
  REQUIRE_THROWS_WITH(config::parse_config(r),
                      ContainsSubstring("plant.longitudinal"));
}

TEST_CASE("type errors carry the offending path", "[config][strict]") {
  {
    json j = minimal_longitudinal();
    j["controller"]["kp"] = "fifty";
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("controller.kp"));
  }
  {
    json j = minimal_longitudinal();
    j["sim"] = {{"ts", "fast"}};
    REQUIRE_THROWS_WITH(config::parse_config(j), ContainsSubstring("sim.ts"));
  }
  {
    json j = minimal_longitudinal();
    j["noise"] = {{"seed", 3.5}};
    REQUIRE_THROWS_WITH(config::parse_config(j), ContainsSubstring("noise.seed"));
  }
  {
    json j = minimal_longitudinal();
    j["plant"]["longitudinal"] = {{"envelope", "maybe"}};
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("plant.longitudinal.envelope"));
  }
  {
    json j = minimal_longitudinal();
    j["reference"] = {{"kind", "sawtooth"}};
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("reference.kind"));
  }
  {
    json j = minimal_rotational();
    j["plant"]["rotational"]["inertia"] = {{1.0, 0.0}, {0.0, 1.0}};
    REQUIRE_THROWS_WITH(config::parse_config(j),
                        ContainsSubstring("plant.rotational.inertia"));
  }
}

TEST_CASE("spelling out the defaults does not change the config hash",
          "[config][hash]") {
  const config::ResolvedConfig minimal =
      config::parse_config(minimal_longitudinal());

  json spelled = minimal_longitudinal();
  spelled["name"] = "run";
  spelled["plant"]["scale_f"] = 1.0;
  spelled["plant"]["scale_g"] = 1.0;
  spelled["plant"]["longitudinal"] = {
      {"qbar", 1.318e5}, {"S", 0.0409},  {"d", 0.229},  {"mass", 204.0},
      {"VT", 632.0},     {"Iyy", 247.4}, {"mach", 2.0}, {"envelope", "warn"}};
  spelled["controller"]["accel"] = "error_fd";
  spelled["controller"]["gbar_scale"] = 1.0;
  spelled["sim"] = {{"ts", 0.01}, {"duration", 4.0}, {"substeps", 10}};
  spelled["actuator"] = {{"enabled", true}, {"gain", 1.0}, {"tau", 0.01}};
  spelled["noise"] = {{"std", 0.0}, {"seed", 7}};
  spelled["diagnostics"] = {{"pi_equivalence", false}};
  const config::ResolvedConfig full = config::parse_config(spelled);

  REQUIRE(full.hash == minimal.hash);
  REQUIRE(full.canonical == minimal.canonical);
}

TEST_CASE("meaningful changes do change the hash", "[config][hash]") {
  const std::string base = config::parse_config(minimal_longitudinal()).hash;
  json j = minimal_longitudinal();
  j["noise"] = {{"seed", 8}};
  REQUIRE(config::parse_config(j).hash != base);

  json k = minimal_longitudinal();
  k["controller"]["kp"] = {60.0};
  REQUIRE(config::parse_config(k).hash != base);
}

TEST_CASE("canonicalization is idempotent", "[config][hash]") {
  const config::ResolvedConfig once = config::parse_config(minimal_longitudinal());
  const config::ResolvedConfig twice = config::parse_config(once.canonical);
  REQUIRE(twice.hash == once.hash);
  REQUIRE(twice.canonical == once.canonical);
}

TEST_CASE("overrides patch values through dotted paths", "[config][override]") {
  json j = minimal_longitudinal();
  config::apply_override(j, "sim.ts=0.005");
  config::apply_override(j, "controller.kp=[60.0]");
  config::apply_override(j, "controller.law=tdc");
  config::apply_override(j, "noise.seed=11");
  config::apply_override(j, "name=patched");
  const config::ResolvedConfig rc = config::parse_config(j);
  REQUIRE(rc.scenario.ts == 0.005);
  REQUIRE(rc.scenario.kp[0] == 60.0);
  REQUIRE(rc.scenario.law == sim::ControlLaw::TDC);
  REQUIRE(rc.scenario.noise.seed == 11);
  REQUIRE(rc.scenario.name == "patched");
}

TEST_CASE("overrides cannot smuggle in unknown keys", "[config][override]") {
  json j = minimal_longitudinal();
  config::apply_override(j, "controller.bogus=1");
  REQUIRE_THROWS_WITH(config::parse_config(j),
                      ContainsSubstring("controller.bogus"));
}

TEST_CASE("malformed overrides are rejected", "[config][override]") {
  json j = minimal_longitudinal();
  REQUIRE_THROWS_AS(config::apply_override(j, "no_equals_sign"), ConfigError);
  REQUIRE_THROWS_AS(config::apply_override(j, "=5"), ConfigError);
  REQUIRE_THROWS_AS(config::apply_override(j, "a..b=5"), ConfigError);
}

TEST_CASE("find_config resolves files first, then presets", "[config][lookup]") {
  // a real file path wins
  const std::string tmp = "test_config_tmp.json";
  {
    std::ofstream f(tmp);
    f << minimal_longitudinal().dump();
  }
  REQUIRE(config::find_config(tmp, INDILAB_PRESET_DIR) == tmp);
  std::remove(tmp.c_str());

  // preset names resolve against the preset directory
  const std::string path = config::find_config("fig2_nominal", INDILAB_PRESET_DIR);
  REQUIRE(path.find("fig2_nominal.json") != std::string::npos);
  REQUIRE_NOTHROW(config::parse_config(config::load_json_file(path)));

  REQUIRE_THROWS_WITH(config::find_config("no_such_preset", INDILAB_PRESET_DIR),
                      ContainsSubstring("no_such_preset"));
}

TEST_CASE("the shipped presets parse and describe what they claim", "[config][presets]") {
  const auto load = [](const char* name) {
    return config::parse_config(config::load_json_file(
        config::find_config(name, INDILAB_PRESET_DIR)));
  };

  const config::ResolvedConfig fig2 = load("fig2_nominal");
  REQUIRE(fig2.scenario.law == sim::ControlLaw::INDI_GBAR);
  REQUIRE(fig2.scenario.kp[0] == 50.0);
  REQUIRE(fig2.scenario.ts == 0.01);
  REQUIRE(fig2.scenario.noise.std == 1e-3);
  REQUIRE(fig2.scenario.actuator.enabled);
  REQUIRE(fig2.pi_equivalence);

  const config::ResolvedConfig ndi = load("ndi_baseline");
  REQUIRE(ndi.scenario.law == sim::ControlLaw::NDI);

  const config::ResolvedConfig mm = load("mismatch_study");
  REQUIRE(mm.scenario.noise.std == 0.0);
  REQUIRE(mm.scenario.law == sim::ControlLaw::INDI_GBAR);

  const config::ResolvedConfig tde = load("tde_sweep");
  REQUIRE(tde.scenario.noise.std == 0.0);

  // apart from the controller/diagnostics blocks, fig2 and the ndi baseline
  // are the same experiment — that is what makes them comparable
  for (const char* block : {"plant", "reference", "sim", "actuator"})
    REQUIRE(fig2.canonical.at(block) == ndi.canonical.at(block));
}

TEST_CASE("bad JSON files fail with a config error", "[config][lookup]") {
  const std::string tmp = "test_config_bad_tmp.json";
  {
    std::ofstream f(tmp);
    f << "{ not json";
  }
  REQUIRE_THROWS_AS(config::load_json_file(tmp), ConfigError);
  std::remove(tmp.c_str());
  REQUIRE_THROWS_AS(config::load_json_file("missing_file.json"), ConfigError);
}
