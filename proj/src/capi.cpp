#include "pdm/pdm_c.h"

#include <string>

#include "pdm/config.hpp"
#include "pdm/errors.hpp"
#include "pdm/experiments.hpp"
#include "pdm/version.hpp"

struct pdm_experiment {
  pdm::ExperimentConfig config;
  pdm::ReportBundle bundle;
  std::string summary_text;
  bool ran = false;
};

namespace {

thread_local std::string g_last_error;

pdm_status capture(const std::exception& e, pdm_status code) {
  g_last_error = e.what();
  return code;
}

template <typename Fn>
pdm_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const pdm::ConfigError& e) {
    return capture(e, PDM_ERROR_CONFIG);
  } catch (const pdm::InfeasibleError& e) {
    return capture(e, PDM_ERROR_INFEASIBLE);
  } catch (const std::invalid_argument& e) {
    return capture(e, PDM_ERROR_CONFIG);
  } catch (const std::exception& e) {
    return capture(e, PDM_ERROR_INTERNAL);
  } catch (...) {
    g_last_error = "unknown error";
    return PDM_ERROR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* pdm_version(void) { return pdm::kVersion; }

const char* pdm_config_schema(void) { return pdm::config_schema_text(); }

const char* pdm_last_error(void) { return g_last_error.c_str(); }

pdm_status pdm_experiment_create_from_file(const char* path, pdm_experiment** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return PDM_ERROR_INVALID;
  }
  return guarded([&]() {
    auto* exp = new pdm_experiment{};
    exp->config = pdm::load_config_file(path);
    *out = exp;
    return PDM_OK;
  });
}

pdm_status pdm_experiment_create_from_json(const char* json_text, pdm_experiment** out) {
  if (!json_text || !out) {
    g_last_error = "null argument";
    return PDM_ERROR_INVALID;
  }
  return guarded([&]() {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw pdm::ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    auto* exp = new pdm_experiment{};
    exp->config = pdm::parse_config(doc);
    *out = exp;
    return PDM_OK;
  });
}

pdm_status pdm_experiment_require_kind(pdm_experiment* exp, const char* kind) {
  if (!exp || !kind) {
    g_last_error = "null argument";
    return PDM_ERROR_INVALID;
  }
  if (pdm::to_string(exp->config.kind) != kind) {
    g_last_error = "config declares experiment \"" + pdm::to_string(exp->config.kind) +
                   "\" but \"" + kind + "\" was requested";
    return PDM_ERROR_CONFIG;
  }
  return PDM_OK;
}

pdm_status pdm_experiment_set_workers(pdm_experiment* exp, int workers) {
  if (!exp || workers < 0) {
    g_last_error = "invalid handle or worker count";
    return PDM_ERROR_INVALID;
  }
  exp->config.workers = workers;
  return PDM_OK;
}

pdm_status pdm_experiment_set_output_dir(pdm_experiment* exp, const char* dir) {
  if (!exp || !dir) {
    g_last_error = "null argument";
    return PDM_ERROR_INVALID;
  }
  exp->config.output_dir = dir;
  return PDM_OK;
}

pdm_status pdm_experiment_set_check(pdm_experiment* exp, int enabled) {
  if (!exp) {
    g_last_error = "null handle";
    return PDM_ERROR_INVALID;
  }
  exp->config.check_mode = enabled != 0;
  return PDM_OK;
}

pdm_status pdm_experiment_run(pdm_experiment* exp) {
  if (!exp) {
    g_last_error = "null handle";
    return PDM_ERROR_INVALID;
  }
  return guarded([&]() {
    exp->bundle = pdm::run_experiment(exp->config);
    exp->summary_text = exp->bundle.summary.dump(2);
    exp->ran = true;
    if (exp->config.check_mode && !exp->bundle.check_passed) {
      g_last_error = "acceptance thresholds not met (see summary.json)";
      return PDM_ERROR_CHECK_FAILED;
    }
    return PDM_OK;
  });
}

const char* pdm_experiment_summary_json(const pdm_experiment* exp) {
  return exp && exp->ran ? exp->summary_text.c_str() : nullptr;
}

int pdm_experiment_output_count(const pdm_experiment* exp) {
  return exp && exp->ran ? static_cast<int>(exp->bundle.csv_paths.size()) : 0;
}

const char* pdm_experiment_output_path(const pdm_experiment* exp, int index) {
  if (!exp || !exp->ran || index < 0 ||
      index >= static_cast<int>(exp->bundle.csv_paths.size()))
    return nullptr;
  return exp->bundle.csv_paths[static_cast<std::size_t>(index)].c_str();
}

void pdm_experiment_destroy(pdm_experiment** exp) {
  if (exp && *exp) {
    delete *exp;
    *exp = nullptr;
  }
}

}  // extern "C"
