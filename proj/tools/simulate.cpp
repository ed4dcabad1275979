// simulate: run, list and validate scenarios.
//
//   simulate run <config.json | canonical id> [--out DIR] [--format csv|json] [--n-max N] [--seedless-deterministic]
//   simulate list
//   simulate validate <config.json>
//
// Exit codes: 0 success, 2 validation, 3 convergence, 4 I/O.

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "uscqed/scenario.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kConvergence = 3, kIo = 4 };

uscqed::ScenarioConfig load(const std::string& source) {
  if (uscqed::is_canonical(source) && !std::filesystem::exists(source)) return uscqed::canonical_scenario(source);
  return uscqed::validate_config(uscqed::read_text_file(source));
}

void print_errors(const uscqed::ValidationError& e) {
  std::cerr << "invalid config:\n";
  for (const auto& line : e.errors()) std::cerr << "  " << line << "\n";
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const uscqed::ValidationError& e) {
    print_errors(e);
    return kValidation;
  } catch (const uscqed::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  } catch (const uscqed::ModeTypeError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  } catch (const uscqed::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const uscqed::StepSizeError& e) {
    std::cerr << "step-size failure: " << e.what() << "\nhint: set time.dt to half the value in the metadata\n";
    return kConvergence;
  } catch (const uscqed::BracketError& e) {
    std::cerr << "gap search failed: " << e.what() << "\nhint: narrow gap.min/gap.max around one minimum\n";
    return kConvergence;
  } catch (const uscqed::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\nhint: raise --n-max or set system.n_max explicitly\n";
    return kConvergence;
  } catch (const std::out_of_range& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled-cavity ultrastrong-coupling simulator"};
  app.require_subcommand(1);

  std::string source;
  std::string out_dir;
  std::string format;
  int n_max = 0;
  bool deterministic = false;
  auto* run = app.add_subcommand("run", "Run a config file or a canonical scenario id");
  run->add_option("config", source, "Config file or canonical id")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--n-max", n_max, "Fock truncation per mode")->check(CLI::PositiveNumber);
  run->add_flag("--seedless-deterministic", deterministic, "Omit wall time so reruns are byte-identical");

  auto* list = app.add_subcommand("list", "List canonical scenarios");

  std::string to_check;
  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled");
  validate->add_option("config", to_check, "Config file or canonical id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (list->parsed()) {
    for (const auto& e : uscqed::list_scenarios()) std::cout << e.id << "\t" << e.figure << "\t" << e.description << "\n";
    return kOk;
  }
  if (validate->parsed()) {
    return guarded([&] {
      std::cout << uscqed::config_to_json(load(to_check)) << "\n";
      return kOk;
    });
  }
  return guarded([&] {
    uscqed::RunOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (!format.empty()) options.format = uscqed::parse_output_format(format);
    if (n_max > 0) options.n_max = n_max;
    options.deterministic = deterministic;
    const auto out = uscqed::run_scenario(load(source), options);
    std::cout << out.data_path << "\n" << out.metadata_path << "\n";
    return kOk;
  });
}
