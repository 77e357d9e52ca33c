// Command-line front end. Talks to the library only through the C API.
//
//   bundlesim steady -c run.cfg delta_a=25 chi=4.5
//   bundlesim sweep -c sweep.cfg output=out.csv
//
// Exit status: 0 success, 1 configuration or I/O error, 2 numerical or
// validation failure.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bundlesim/bundlesim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

using Runner = bsim_status_t (*)(const bsim_config_t*, bsim_result_t**);

struct Invocation {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string unit_khz;
};

int exit_code(bsim_status_t status) {
  switch (status) {
    case BSIM_OK:
      return kExitOk;
    case BSIM_INVALID_ARGUMENT:
    case BSIM_IO:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

int report(bsim_status_t status) {
  std::fprintf(stderr, "error (%s): %s\n", bsim_status_name(status), bsim_last_error());
  return exit_code(status);
}

int execute(const Invocation& inv, Runner runner) {
  bsim_config_t* config = nullptr;
  if (bsim_status_t s = bsim_config_new(&config); s != BSIM_OK) return report(s);
  std::unique_ptr<bsim_config_t, void (*)(bsim_config_t*)> guard(config, bsim_config_free);

  if (!inv.config_file.empty()) {
    if (bsim_status_t s = bsim_config_load_file(config, inv.config_file.c_str()); s != BSIM_OK) {
      return report(s);
    }
  }
  for (const std::string& kv : inv.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error (invalid_argument): override '%s' is not key=value\n",
                   kv.c_str());
      return kExitConfig;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (bsim_status_t s = bsim_config_set(config, key.c_str(), value.c_str()); s != BSIM_OK) {
      return report(s);
    }
  }
  if (!inv.unit_khz.empty()) {
    if (bsim_status_t s = bsim_config_set(config, "unit_khz", inv.unit_khz.c_str()); s != BSIM_OK) {
      return report(s);
    }
  }

  bsim_result_t* result = nullptr;
  const bsim_status_t status = runner(config, &result);
  std::unique_ptr<bsim_result_t, void (*)(bsim_result_t*)> result_guard(result, bsim_result_free);
  if (result) {
    std::fputs(bsim_result_text(result), stdout);
    std::fflush(stdout);
    for (size_t i = 0; i < bsim_result_warning_count(result); ++i) {
      std::fprintf(stderr, "%s\n", bsim_result_warning(result, i));
    }
  }
  if (status == BSIM_VALIDATION_FAILED) return kExitNumerical;
  if (status != BSIM_OK) return report(status);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven three-atom cavity QED: steady states, correlations and resonances"};
  app.set_version_flag("--version", std::string(bsim_version()));
  app.require_subcommand(1);

  Invocation inv;
  struct Sub {
    const char* name;
    const char* help;
    Runner runner;
  };
  const Sub subs[] = {
      {"steady", "Steady-state observables at one point (JSON)", bsim_run_steady},
      {"sweep", "Observables over a one- or two-axis grid (CSV)", bsim_run_sweep},
      {"gtau", "Delayed correlations g_n^(2)(tau) and the emission class", bsim_run_gtau},
      {"resonance", "Multiphoton resonance curves against chi (CSV)", bsim_run_resonance},
      {"validate", "Run the invariant and oracle suites", bsim_run_validate},
      {"fullmodel", "Two-mode model against the eliminated one", bsim_run_fullmodel},
  };
  Runner chosen = nullptr;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    cmd->add_option("-c,--config", inv.config_file, "Configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--unit-khz", inv.unit_khz,
                    "Report frequencies in kHz, with kappa_a = 2pi x this value")
        ->check(CLI::PositiveNumber);
    cmd->add_option("overrides", inv.overrides, "key=value assignments applied after the file");
    cmd->callback([&chosen, r = s.runner] { chosen = r; });
  }
  app.add_subcommand("keys", "List the recognised configuration keys")->callback([&chosen] {
    chosen = nullptr;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (!chosen) {
    std::fputs(bsim_config_keys(), stdout);
    return kExitOk;
  }
  return execute(inv, chosen);
}
