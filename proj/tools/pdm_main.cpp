// Benchmark CLI. Links the C API only; all numerics live in the shared
// library behind the opaque experiment handle.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pdm/pdm_c.h"

namespace {

struct SubArgs {
  std::string config;
  std::string out;
  int workers = -1;
  bool check = false;
};

int run_kind(const char* kind, const SubArgs& args) {
  pdm_experiment* exp = nullptr;
  pdm_status st = pdm_experiment_create_from_file(args.config.c_str(), &exp);
  if (st != PDM_OK) {
    std::fprintf(stderr, "error: %s\n", pdm_last_error());
    return static_cast<int>(st);
  }
  st = pdm_experiment_require_kind(exp, kind);
  if (st == PDM_OK && args.workers >= 0) st = pdm_experiment_set_workers(exp, args.workers);
  if (st == PDM_OK && !args.out.empty()) st = pdm_experiment_set_output_dir(exp, args.out.c_str());
  if (st == PDM_OK) st = pdm_experiment_set_check(exp, args.check ? 1 : 0);
  if (st == PDM_OK) st = pdm_experiment_run(exp);

  if (st == PDM_OK || st == PDM_ERROR_CHECK_FAILED) {
    const int count = pdm_experiment_output_count(exp);
    for (int i = 0; i < count; ++i)
      std::printf("wrote %s\n", pdm_experiment_output_path(exp, i));
    const char* summary = pdm_experiment_summary_json(exp);
    if (summary) std::printf("%s\n", summary);
    if (st == PDM_ERROR_CHECK_FAILED) std::fprintf(stderr, "check failed: %s\n", pdm_last_error());
  } else {
    std::fprintf(stderr, "error: %s\n", pdm_last_error());
  }
  pdm_experiment_destroy(&exp);
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("pdm ") + pdm_version() +
               " - Euler schemes and Malliavin estimators for path-dependent SDEs"};
  app.require_subcommand(1);

  static const char* kinds[] = {"strong-rate", "derivative-rate", "ibp-check",
                                "density-rate", "holder-norm", "ellipticity-check"};
  static const char* blurbs[] = {
      "pathwise convergence ladder against a fine reference",
      "convergence ladder including the Malliavin derivative distance",
      "integration-by-parts duality against the quadrature oracle",
      "density convergence ladder in Holder norms",
      "Holder norm of tabulated grid values",
      "empirical ellipticity floor of a coefficient model",
  };

  SubArgs args[6];
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], blurbs[i]);
    sub->add_option("--config", args[i].config, "JSON experiment configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--workers", args[i].workers, "worker threads (0 = hardware)");
    sub->add_option("--out", args[i].out, "output directory override");
    sub->add_flag("--check", args[i].check, "evaluate acceptance thresholds; exit 4 on failure");
  }

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 6; ++i)
    if (app.got_subcommand(kinds[i])) return run_kind(kinds[i], args[i]);
  return 1;
}
