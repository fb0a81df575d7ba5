#include <doctest.h>

#include <filesystem>
#include <string>

#include "stochagg/config.hpp"
#include "stochagg/io.hpp"

using namespace stochagg;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(STOCHAGG_SOURCE_DIR) / "configs";

std::string error_of(const std::string& text) {
  try {
    ConfigStore::parse(text, "t.cfg").resolve();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

}  // namespace

TEST_CASE("figure 1 preset") {
  const SimulationConfig c = ConfigStore::load((kConfigs / "fig1.cfg").string()).resolve();
  CHECK(c.model.alpha == 0.4);
  CHECK(c.model.mu == 0.5);
  CHECK(c.model.ubar == 4.0);
  CHECK(c.model.noise == NoiseKind::Zero);
  CHECK(c.model.init.kind == InitKind::ThreeBumps);
  CHECK(c.model.diffusion == DiffusionKind::DegenerateLogistic);
  CHECK(c.model.kernel == KernelKind::GaussianNormalized);
  CHECK(c.grid == Grid2D::square(64));
  CHECK(c.run.T == 12.0);
  CHECK(c.run.record_times == std::vector<double>{0, 4, 8, 12});
  CHECK(c.run.seed == 1);
  CHECK(c.run.dt <= stability_bound(c.model, c.grid));
  CHECK(c.run.dt > 0.99 * stability_bound(c.model, c.grid));
  CHECK_NOTHROW(c.run.check());
  CHECK(c.model.trunc_M.has_value());
  CHECK(c.output.dir == "out/fig1");
}

TEST_CASE("all presets resolve") {
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    CAPTURE(e.path().string());
    CHECK_NOTHROW(ConfigStore::load(e.path().string()).resolve());
  }
}

TEST_CASE("defaults and required keys") {
  const SimulationConfig c = ConfigStore::parse("[model]\nubar = 4\n").resolve();
  CHECK(c.model.alpha == 0.4);
  CHECK(c.grid.nx == 65);
  CHECK(c.run.backend == ConvBackend::Fft);
  CHECK(c.ensemble.paths == 8);
  CHECK(c.galerkin.modes_per_axis == 16);
  CHECK_FALSE(c.galerkin.epsilon.has_value());

  CHECK(contains(error_of("[model]\nalpha = 0.4\n"), "missing required key model.ubar"));
}

TEST_CASE("parse errors carry line context") {
  CHECK(contains(error_of("[model]\nubar = 4\nubar = 5\n"), "t.cfg:3: duplicate key 'model.ubar' (first set on line 2)"));
  CHECK(contains(error_of("[model]\nubar = 4\nzzz = 1\n"), "t.cfg:3: unknown key 'zzz' in [model]"));
  CHECK(contains(error_of("# c\n[physics]\n"), "t.cfg:2: unknown section [physics]"));
  CHECK(contains(error_of("ubar = 4\n"), "t.cfg:1: key 'ubar' outside of a section"));
  CHECK(contains(error_of("[model\n"), "malformed section header"));
  CHECK(contains(error_of("[model]\nubar\n"), "expected key = value"));
}

TEST_CASE("value errors") {
  CHECK(contains(error_of("[model]\nubar = four\n"), "model.ubar: expected a finite number"));
  CHECK(contains(error_of("[model]\nubar = 4\n[noise]\nkind = loud\n"), "unknown value 'loud'"));
  CHECK(contains(error_of("[model]\nubar = 2\n"), "initial condition exceeds ubar"));
  CHECK(contains(error_of("[model]\nubar = 4\nalpha = -1\n"), "alpha must be nonnegative"));
  CHECK(contains(error_of("[model]\nubar = 4\n[time]\ndt = 0.7\n"), "dt must divide T"));
  CHECK(contains(error_of("[model]\nubar = 4\n[time]\nrecord_times = 0, 13\n"), "record time"));
  CHECK(contains(error_of("[model]\nubar = 4\n[ensemble]\npaths = 0\n"), "ensemble.paths"));

  ConfigStore s = ConfigStore::parse("[model]\nubar = 4\n");
  CHECK_THROWS_AS(s.set("model", "nope", "1"), ConfigError);
  s.set("noise", "kind", "periodic");
  CHECK(s.resolve().model.noise == NoiseKind::Periodic);
  CHECK(s.user_set("noise", "kind"));
  CHECK_FALSE(s.user_set("noise", "seed"));
}

TEST_CASE("canonical form round trip") {
  ConfigStore s = ConfigStore::load((kConfigs / "fig2.cfg").string());
  s.set("noise", "seed", "18446744073709551615");
  const std::string ini = s.to_ini();
  const ConfigStore back = ConfigStore::parse(ini, "canonical");
  CHECK(back.to_ini() == ini);
  const SimulationConfig a = s.resolve(), b = back.resolve();
  CHECK(a.run.dt == b.run.dt);
  CHECK(a.run.seed == 18446744073709551615ull);
  CHECK(b.run.seed == a.run.seed);
  CHECK(*a.model.trunc_M == *b.model.trunc_M);
  CHECK(a.model.noise == b.model.noise);
  CHECK(a.grid == b.grid);
  CHECK(a.run.record_times == b.run.record_times);
  CHECK(back.resolved_values() == s.resolved_values());
}

TEST_CASE("aligned step") {
  const double dt = aligned_dt(12.0, 0.0123, {0, 4, 8, 12});
  CHECK(dt <= 0.0123);
  const double n = 12.0 / dt;
  CHECK(std::abs(n - std::round(n)) < 1e-9 * n);
  CHECK(std::llround(n) % 3 == 0);
  CHECK(aligned_dt(1.0, 5.0, {0, 1}) == 1.0);
}

TEST_CASE("custom table initial condition") {
  const fs::path dir = STOCHAGG_TEST_TMP;
  fs::create_directories(dir);
  const Grid2D g = Grid2D::square(8);
  Field u(g, 1.0);
  u(2, 3) = 2.0;
  write_snapshot(u, 0.0, dir / "init.bin");
  const std::string cfg = "[model]\nubar = 4\ninit = custom_table\ninit_table = init.bin\n[grid]\ncells_x = 8\ncells_y = 8\n";
  write_text(dir / "custom.cfg", cfg);
  const SimulationConfig c = ConfigStore::load((dir / "custom.cfg").string()).resolve();
  REQUIRE(c.model.init.table.has_value());
  CHECK(*c.model.init.table == u);

  write_text(dir / "custom16.cfg", cfg + "[grid]\ncells_x = 8\n");
  CHECK_THROWS_AS(ConfigStore::load((dir / "custom16.cfg").string()), ConfigError);
  std::string wrong = cfg;
  wrong.replace(wrong.find("cells_x = 8"), 11, "cells_x = 9");
  write_text(dir / "custom9.cfg", wrong);
  CHECK_THROWS_AS(ConfigStore::load((dir / "custom9.cfg").string()).resolve(), ConfigError);
}

TEST_CASE("schema") {
  int required = 0;
  for (const auto& k : config_schema()) {
    if (k.required) {
      ++required;
      CHECK(k.section == "model");
      CHECK(k.key == "ubar");
    }
  }
  CHECK(required == 1);
}
