// Batch front end: one subcommand per pipeline, each reading a scenario file.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shearfree/acceptance.hpp"
#include "shearfree/kernels.hpp"
#include "shearfree/scenario.hpp"

namespace sc = shearfree::scenario;

namespace {

struct Common {
  std::string scenario;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool needs_scenario) {
  auto* opt = sub->add_option("--scenario", c.scenario, "scenario file");
  if (needs_scenario) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory for summary.json and CSV dumps");
  sub->add_option("--threads", c.threads, "OpenMP threads (default: SHEARFREE_THREADS or runtime)");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SHEARFREE_THREADS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "ignoring SHEARFREE_THREADS=" << env << '\n';
    }
  }
  return 0;
}

int run(const Common& c, std::vector<sc::Kind> kinds) {
  sc::RunOptions opts;
  if (!c.out.empty()) opts.out_dir = std::filesystem::path(c.out);
  opts.threads = resolve_threads(c.threads);
  opts.allowed_kinds = std::move(kinds);
  const sc::Outcome outcome = sc::run_file(c.scenario, opts);
  (outcome.exit_code == sc::kPass ? std::cout : std::cerr) << outcome.message << '\n';
  if (!c.out.empty()) std::cout << "wrote " << (std::filesystem::path(c.out) / "summary.json").string() << '\n';
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shearfree: shearfree null congruences from Burgers' equations"};
  app.require_subcommand(1);

  Common solve, congruence, caustic, dual, circle, selftest;
  auto* s_solve = app.add_subcommand("solve", "burgers-flat or burgers-forced scenario");
  add_common(s_solve, solve, true);
  auto* s_cong = app.add_subcommand("congruence", "scattering data to congruence with shear report");
  add_common(s_cong, congruence, true);
  auto* s_caustic = app.add_subcommand("caustic", "first caustic of a Burgers solution");
  add_common(s_caustic, caustic, true);
  auto* s_dual = app.add_subcommand("dual", "numeric dual ODE");
  add_common(s_dual, dual, true);
  auto* s_circle = app.add_subcommand("example-circle", "Burgers surface over the dual circle");
  add_common(s_circle, circle, true);
  auto* s_self = app.add_subcommand("selftest", "run the acceptance suite");
  s_self->add_option("--threads", selftest.threads, "OpenMP threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s_solve) return run(solve, {sc::Kind::BurgersFlat, sc::Kind::BurgersForced});
    if (*s_cong) return run(congruence, {sc::Kind::Congruence});
    if (*s_caustic) return run(caustic, {sc::Kind::Caustic});
    if (*s_dual) return run(dual, {sc::Kind::DualOde});
    if (*s_circle) return run(circle, {sc::Kind::CircleExample});
    if (*s_self) {
      shearfree::kernels::configure_threads(resolve_threads(selftest.threads));
      const auto verdicts = shearfree::acceptance::run_all();
      shearfree::acceptance::print(std::cout, verdicts);
      return shearfree::acceptance::acceptable(verdicts) ? sc::kPass : sc::kChecksFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return sc::kNumericFailure;
  }
  return sc::kParseError;
}
