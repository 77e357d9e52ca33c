#include <cmath>
#include <new>
#include <string>

#include "bundlesim/bundlesim.h"
#include "bundlesim/commands.hpp"
#include "bundlesim/config.hpp"
#include "bundlesim/error.hpp"

struct bsim_config {
  bundlesim::Config config;
};

struct bsim_result {
  bundlesim::CommandOutput output;
};

namespace {

thread_local std::string last_error;

bsim_status_t status_of(bundlesim::ErrorCode code) {
  switch (code) {
    case bundlesim::ErrorCode::invalid_argument:
      return BSIM_INVALID_ARGUMENT;
    case bundlesim::ErrorCode::numerical_failure:
      return BSIM_NUMERICAL_FAILURE;
    case bundlesim::ErrorCode::undefined_correlation:
      return BSIM_UNDEFINED_CORRELATION;
    case bundlesim::ErrorCode::incomplete_record:
      return BSIM_INCOMPLETE_RECORD;
    case bundlesim::ErrorCode::io:
      return BSIM_IO;
  }
  return BSIM_INTERNAL;
}

bsim_status_t fail(bsim_status_t status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs f, translating exceptions into status codes and the thread's message.
template <class F>
bsim_status_t guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const bundlesim::Error& e) {
    std::string message = e.what();
    if (!e.detail().empty()) message += "\n" + e.detail();
    return fail(status_of(e.code()), std::move(message));
  } catch (const std::bad_alloc&) {
    return fail(BSIM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BSIM_INTERNAL, e.what());
  }
}

using Command = bundlesim::CommandOutput (*)(const bundlesim::Config&);

bsim_status_t run(Command command, const bsim_config_t* config, bsim_result_t** out) {
  if (!config || !out) return fail(BSIM_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* result = new bsim_result{command(config->config)};
    *out = result;
    if (!result->output.passed) {
      last_error = "validation failed";
      return BSIM_VALIDATION_FAILED;
    }
    return BSIM_OK;
  });
}

}  // namespace

extern "C" {

const char* bsim_version(void) { return "0.1.0"; }

const char* bsim_last_error(void) { return last_error.c_str(); }

const char* bsim_status_name(bsim_status_t status) {
  switch (status) {
    case BSIM_OK:
      return "ok";
    case BSIM_INVALID_ARGUMENT:
      return "invalid_argument";
    case BSIM_IO:
      return "io";
    case BSIM_NUMERICAL_FAILURE:
      return "numerical_failure";
    case BSIM_UNDEFINED_CORRELATION:
      return "undefined_correlation";
    case BSIM_INCOMPLETE_RECORD:
      return "incomplete_record";
    case BSIM_VALIDATION_FAILED:
      return "validation_failed";
    case BSIM_INTERNAL:
      return "internal";
  }
  return "unknown";
}

bsim_status_t bsim_config_new(bsim_config_t** out) {
  if (!out) return fail(BSIM_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new bsim_config{};
    return BSIM_OK;
  });
}

void bsim_config_free(bsim_config_t* config) { delete config; }

bsim_status_t bsim_config_load_file(bsim_config_t* config, const char* path) {
  if (!config || !path) return fail(BSIM_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    config->config.load_file(path);
    return BSIM_OK;
  });
}

bsim_status_t bsim_config_set(bsim_config_t* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(BSIM_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    config->config.set(key, value);
    return BSIM_OK;
  });
}

const char* bsim_config_keys(void) {
  static const std::string keys = [] {
    std::string s;
    for (const auto& k : bundlesim::config_keys()) s += k + "\n";
    return s;
  }();
  return keys.c_str();
}

bsim_status_t bsim_run_steady(const bsim_config_t* c, bsim_result_t** out) {
  return run(bundlesim::run_steady, c, out);
}
bsim_status_t bsim_run_sweep(const bsim_config_t* c, bsim_result_t** out) {
  return run(bundlesim::run_sweep_command, c, out);
}
bsim_status_t bsim_run_gtau(const bsim_config_t* c, bsim_result_t** out) {
  return run(bundlesim::run_gtau, c, out);
}
bsim_status_t bsim_run_resonance(const bsim_config_t* c, bsim_result_t** out) {
  return run(bundlesim::run_resonance, c, out);
}
bsim_status_t bsim_run_validate(const bsim_config_t* c, bsim_result_t** out) {
  return run(bundlesim::run_validate, c, out);
}
bsim_status_t bsim_run_fullmodel(const bsim_config_t* c, bsim_result_t** out) {
  return run(bundlesim::run_fullmodel, c, out);
}

void bsim_result_free(bsim_result_t* result) { delete result; }

const char* bsim_result_text(const bsim_result_t* result) {
  return result ? result->output.text.c_str() : "";
}

size_t bsim_result_warning_count(const bsim_result_t* result) {
  return result ? result->output.warnings.size() : 0;
}

const char* bsim_result_warning(const bsim_result_t* result, size_t index) {
  if (!result || index >= result->output.warnings.size()) return nullptr;
  return result->output.warnings[index].c_str();
}

int bsim_result_passed(const bsim_result_t* result) {
  return result && result->output.passed ? 1 : 0;
}

bsim_status_t bsim_result_value(const bsim_result_t* result, const char* name, double* value) {
  if (!result || !name || !value) return fail(BSIM_INVALID_ARGUMENT, "null argument");
  const auto& record = result->output.record;
  if (!record) return fail(BSIM_INVALID_ARGUMENT, "result carries no observable record");
  const std::string key = name;
  const auto correlation = [&](const std::optional<double>& g) {
    if (!g) return fail(BSIM_UNDEFINED_CORRELATION, key + " is undefined for a vacuum state");
    *value = *g;
    return BSIM_OK;
  };
  if (key == "g2_0") return correlation(record->g2_0);
  if (key == "g3_0") return correlation(record->g3_0);
  if (key == "g4_0") return correlation(record->g4_0);
  if (key == "n_s")
    *value = record->n_s;
  else if (key == "residual")
    *value = record->residual;
  else if (key == "min_eigenvalue")
    *value = record->min_eigenvalue;
  else if (key == "cutoff")
    *value = record->cutoff;
  else
    return fail(BSIM_INVALID_ARGUMENT, "unknown observable '" + key + "'");
  return BSIM_OK;
}

}  // extern "C"
