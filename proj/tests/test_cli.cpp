#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "uscqed/scenario.hpp"

#ifdef USCQED_SIMULATE

namespace fs = std::filesystem;

namespace {

int simulate(const std::string& args) {
  const std::string cmd = std::string(USCQED_SIMULATE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "uscqed_cli";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("simulate exit codes") {
  const auto out = fs::temp_directory_path() / "uscqed_cli" / "out";
  CHECK(simulate("list") == 0);
  CHECK(simulate("validate fig7c") == 0);
  CHECK(simulate("") != 0);

  const auto good = write_config("good.json", R"({"scenario_id": "tiny", "mode": "spectrum_sweep",
      "system": {"n_max": 2}, "sweep": {"min": 0.5, "max": 0.6, "points": 3, "n_levels": 3}})");
  CHECK(simulate("validate " + good.string()) == 0);
  CHECK(simulate("run " + good.string() + " --out " + out.string() + " --format json --n-max 3") == 0);
  CHECK(fs::exists(out / "tiny.json"));
  CHECK(fs::exists(out / "tiny.meta.json"));

  const auto negative_j = write_config("neg.json", R"({"scenario_id": "neg", "mode": "spectrum_sweep",
      "system": {"J": -0.05}, "sweep": {"min": 0.5, "max": 0.6, "points": 3}})");
  CHECK(simulate("validate " + negative_j.string()) == 2);
  CHECK(simulate("run " + negative_j.string()) == 2);
  CHECK(simulate("run no_such_scenario") == 4);
  CHECK(simulate("run " + good.string() + " --out /proc/version/x") == 4);

  const auto bracket = write_config("bracket.json", R"({"scenario_id": "bracket", "mode": "gap_search",
      "system": {"n_max": 2}, "gap": {"levels": [3, 4], "min": 0.3, "max": 0.35, "coarse_points": 7}})");
  CHECK(simulate("run " + bracket.string() + " --out " + out.string()) == 3);
  fs::remove_all(fs::temp_directory_path() / "uscqed_cli");
}

TEST_CASE("simulate validate message names the field") {
  const auto path = write_config("neg2.json", R"({"scenario_id": "neg", "mode": "spectrum_sweep",
      "system": {"J": -0.05}, "sweep": {"min": 0.5, "max": 0.6, "points": 3}})");
  const auto log = fs::temp_directory_path() / "uscqed_cli" / "log.txt";
  const std::string cmd = std::string(USCQED_SIMULATE) + " validate " + path.string() + " 2>" + log.string();
  CHECK(std::system(cmd.c_str()) != 0);
  const std::string text = uscqed::read_text_file(log.string());
  CHECK(text.find("system.J") != std::string::npos);
  fs::remove_all(fs::temp_directory_path() / "uscqed_cli");
}

#endif
