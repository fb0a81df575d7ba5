// Exercises the public C interface and the command-line front end.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stochagg/stochagg.h"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(STOCHAGG_SOURCE_DIR) / "configs";

fs::path tmp(const std::string& name) {
  const fs::path d = fs::path(STOCHAGG_TEST_TMP) / name;
  fs::remove_all(d);
  fs::create_directories(d.parent_path());
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(STOCHAGG_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

sagg_config* small_fig1() {
  sagg_config* cfg = nullptr;
  REQUIRE(sagg_config_load_file((kConfigs / "fig1.cfg").c_str(), &cfg) == SAGG_OK);
  REQUIRE(sagg_config_set(cfg, "grid", "cells_x", "16") == SAGG_OK);
  REQUIRE(sagg_config_set(cfg, "grid", "cells_y", "16") == SAGG_OK);
  return cfg;
}

}  // namespace

TEST_CASE("library identity") {
  CHECK(std::string(sagg_version()).rfind("stochagg ", 0) == 0);
  CHECK(std::string(sagg_generator_version()) == "philox4x32-10/box-muller/v1");
  CHECK(std::string(sagg_status_name(SAGG_ERR_BLOWUP)) != "");
}

TEST_CASE("configuration handles") {
  sagg_config* cfg = nullptr;
  // Loading only parses; required keys are checked on validation so they can still be set.
  CHECK(sagg_config_load_string("[model]\nalpha = 1\n", &cfg) == SAGG_OK);
  CHECK(sagg_config_validate(cfg) == SAGG_ERR_CONFIG);
  CHECK(std::string(sagg_last_error()).find("missing required key model.ubar") != std::string::npos);
  sagg_config_free(cfg);
  CHECK(sagg_config_load_string("[model]\nubar = 4\nubar = 4\n", &cfg) == SAGG_ERR_CONFIG);
  CHECK(cfg == nullptr);

  CHECK(sagg_config_load_string("[model]\nubar = 4\n", &cfg) == SAGG_OK);
  CHECK(std::string(sagg_last_error()).empty());
  CHECK(sagg_config_set(cfg, "model", "bogus", "1") == SAGG_ERR_CONFIG);

  char buf[8];
  std::size_t needed = 0;
  CHECK(sagg_config_get(cfg, "model", "alpha", buf, sizeof buf, &needed) == SAGG_OK);
  CHECK(std::string(buf) == "0.4");
  CHECK(sagg_config_get(cfg, "model", "ubar", nullptr, 0, &needed) == SAGG_OK);
  CHECK(needed == 2);
  char tiny[2];
  CHECK(sagg_config_get(cfg, "time", "record_times", tiny, sizeof tiny, &needed) == SAGG_ERR_ARGUMENT);
  CHECK(needed > sizeof tiny);

  CHECK(sagg_config_to_ini(cfg, nullptr, 0, &needed) == SAGG_OK);
  std::vector<char> ini(needed);
  CHECK(sagg_config_to_ini(cfg, ini.data(), ini.size(), nullptr) == SAGG_OK);
  CHECK(std::string(ini.data()).find("[model]") != std::string::npos);
  CHECK(sagg_config_validate(cfg) == SAGG_OK);
  CHECK(sagg_config_set(cfg, "model", "ubar", "2") == SAGG_OK);
  CHECK(sagg_config_validate(cfg) == SAGG_ERR_CONFIG);
  CHECK(std::string(sagg_last_error()).find("initial condition exceeds ubar") != std::string::npos);

  sagg_config_free(cfg);

  CHECK(sagg_config_load_file("/nonexistent.cfg", &cfg) != SAGG_OK);
  CHECK(sagg_config_validate(nullptr) == SAGG_ERR_ARGUMENT);
}

TEST_CASE("field handles") {
  const double v[9] = {0, 1, 2, 3, 4, 3, 2, 1, 0};
  sagg_field* f = nullptr;
  REQUIRE(sagg_field_new(3, 3, -1, 1, -1, 1, v, &f) == SAGG_OK);
  const fs::path p = tmp("f.bin");
  CHECK(sagg_field_write(f, 2.5, p.c_str()) == SAGG_OK);
  sagg_field* g = nullptr;
  double t = 0;
  REQUIRE(sagg_field_read(p.c_str(), &g, &t) == SAGG_OK);
  CHECK(t == 2.5);
  std::size_t nx = 0, ny = 0;
  CHECK(sagg_field_dims(g, &nx, &ny) == SAGG_OK);
  CHECK(nx == 3);
  CHECK(ny == 3);
  double b[4];
  CHECK(sagg_field_bounds(g, b) == SAGG_OK);
  CHECK(b[0] == -1.0);
  CHECK(std::memcmp(sagg_field_data(g), v, sizeof v) == 0);
  CHECK(sagg_field_write_pgm(g, 4.0, tmp("f.pgm").c_str()) == SAGG_OK);
  sagg_field_free(g);
  sagg_field_free(f);

  std::ofstream(tmp("junk.bin"), std::ios::binary) << "not a snapshot";
  CHECK(sagg_field_read(tmp("junk.bin").c_str(), &g, &t) == SAGG_ERR_FORMAT);
  CHECK(sagg_field_new(1, 3, 0, 1, 0, 1, v, &f) != SAGG_OK);

  sagg_config* cfg = small_fig1();
  REQUIRE(sagg_field_initial(cfg, &f) == SAGG_OK);
  CHECK(sagg_field_dims(f, &nx, &ny) == SAGG_OK);
  CHECK(nx == 17);
  sagg_field_free(f);
  sagg_config_free(cfg);
}

TEST_CASE("run writes records and a manifest that reproduces them") {
  sagg_config* cfg = small_fig1();
  const fs::path out = tmp("run");
  sagg_run_options o;
  sagg_run_options_init(&o);
  o.out_dir = out.c_str();
  sagg_result* r = nullptr;
  REQUIRE(sagg_run(cfg, &o, &r) == SAGG_OK);
  sagg_config_free(cfg);
  for (const char* t : {"0", "4", "8", "12"}) {
    CHECK(fs::exists(out / (std::string("u_t") + t + ".bin")));
    CHECK(fs::exists(out / (std::string("u_t") + t + ".pgm")));
  }
  CHECK(fs::exists(out / "series.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const std::size_t n = sagg_result_output_count(r);
  CHECK(std::string(sagg_result_output(r, n - 1)) == "manifest.json");
  CHECK(sagg_result_output(r, n) == nullptr);
  sagg_result_free(r);

  const fs::path again = tmp("rerun");
  o.out_dir = again.c_str();
  REQUIRE(sagg_rerun_manifest((out / "manifest.json").c_str(), &o, &r) == SAGG_OK);
  sagg_result_free(r);
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().filename() == "manifest.json") continue;
    CAPTURE(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(again / e.path().filename()));
  }
}

TEST_CASE("blow-up is reported with partial outputs") {
  sagg_config* cfg = small_fig1();
  sagg_config_set(cfg, "time", "dt", "0.5");
  sagg_config_set(cfg, "time", "stability", "warn");
  const fs::path out = tmp("blowup");
  sagg_run_options o;
  sagg_run_options_init(&o);
  o.out_dir = out.c_str();
  sagg_result* r = nullptr;
  CHECK(sagg_run(cfg, &o, &r) == SAGG_ERR_BLOWUP);
  REQUIRE(r != nullptr);
  CHECK(fs::exists(out / "blowup.txt"));
  CHECK_FALSE(fs::exists(out / "manifest.json"));
  sagg_result_free(r);
  sagg_config_free(cfg);
}

TEST_CASE("command line") {
  const fs::path cfg = kConfigs / "fig1.cfg";
  CHECK(cli("--version") == 0);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("") == 2);
  CHECK(cli("run") == 2);
  CHECK(cli("run --config " + cfg.string() + " --set model.zzz=1") == 2);
  CHECK(cli("run --config " + cfg.string() + " --set model.ubar=2") == 2);
  CHECK(cli("run --config " + cfg.string() + " --backend gpu") == 2);

  const fs::path out = tmp("cli");
  CHECK(cli("run --config " + cfg.string() + " --set grid.cells_x=16 --set grid.cells_y=16 --out-dir " +
            out.string()) == 0);
  CHECK(fs::exists(out / "u_t12.bin"));
  CHECK(fs::exists(out / "manifest.json"));
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"generator\"") != std::string::npos);

  const fs::path re = tmp("cli_rerun");
  CHECK(cli("run --manifest " + (out / "manifest.json").string() + " --out-dir " + re.string()) == 0);
  CHECK(slurp(out / "u_t12.bin") == slurp(re / "u_t12.bin"));
  CHECK(cli("run --manifest " + (out / "manifest.json").string() + " --seed 3") == 2);

  CHECK(cli("run --config " + cfg.string() +
            " --set grid.cells_x=16 --set grid.cells_y=16 --set time.dt=0.5 --set time.stability=warn --out-dir " +
            tmp("cli_blow").string()) == 3);

  const fs::path ens = tmp("cli_ens");
  CHECK(cli("ensemble --config " + (kConfigs / "ensemble_fig2.cfg").string() +
            " --set grid.cells_x=16 --set grid.cells_y=16 --set time.T=0.5 --set time.record_times=0,0.5 --paths 3 "
            "--workers 2 --out-dir " + ens.string()) == 0);
  CHECK(fs::exists(ens / "stats.csv"));

  const fs::path conv = tmp("cli_conv");
  CHECK(cli("convergence --mode heat --cells 8,16 --T 0.1 --out-dir " + conv.string()) == 0);
  CHECK(fs::exists(conv / "convergence_heat.csv"));
}
