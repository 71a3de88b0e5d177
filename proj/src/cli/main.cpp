#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "fractalwalk/experiments.hpp"
#include "fractalwalk/report.hpp"

namespace {

int emit_error(const std::string& experiment, const std::string& what,
               int code) {
  fw::JsonObject o;
  o.set("tool", "fractalwalk");
  if (!experiment.empty()) o.set("experiment", experiment);
  o.set("error", what);
  o.set("exit_code", code);
  std::cout << fw::dump_json(fw::JsonValue(std::move(o))) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fractalwalk: certified experiments for random matrix walks, twisted "
      "lattices, and continued-fraction statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fw::kToolVersion));

  fw::RunConfig flags;
  std::string config_path;
  bool assert_mode = false;

  const std::map<std::string, std::string> descriptions = {
      {"cf-stats",
       "pooled digit statistics over certified coded points of a "
       "one-dimensional system"},
      {"lyapunov",
       "Lyapunov spectrum of a matrix walk, with a closed-form oracle "
       "comparison for synthetic block walks"},
      {"positivity",
       "minimum growth rate over probe vectors of the wedge-power walk"},
      {"attraction",
       "projective attraction of the adjoint walk toward the expanding "
       "weight space"},
      {"flow", "systole of the twisted lattice along the diagonal flow"},
      {"ba-test",
       "exhaustive scan of small-denominator approximation quality"},
      {"di-test",
       "per-Q improvable-approximation verdicts at a fixed factor"},
      {"walk-equidist",
       "systole series along the random walk plus split-half diagnostics"},
      {"fn-check",
       "certified digit extraction for sampled words of the inversion "
       "family"},
      {"ur-probe", "exact height probe of coded orbits in the half-plane"},
      {"identity-check",
       "consistency of the walk product with its predicted block "
       "factorization"},
  };

  // Per-flag copy rules, keyed by canonical option name.  Only options the
  // user actually passed are applied, so config-file values survive unless a
  // flag overrides them.
  using Apply = std::function<void(fw::RunConfig&, const fw::RunConfig&)>;
  const std::map<std::string, Apply> appliers = {
      {"--system", [](auto& c, const auto& f) { c.system = f.system; }},
      {"--alpha", [](auto& c, const auto& f) { c.alpha = f.alpha; }},
      {"--blocks", [](auto& c, const auto& f) { c.blocks = f.blocks; }},
      {"--block-weights",
       [](auto& c, const auto& f) { c.block_weights = f.block_weights; }},
      {"--q-list", [](auto& c, const auto& f) { c.q_list = f.q_list; }},
      {"--conj-offset",
       [](auto& c, const auto& f) { c.conj_offset = f.conj_offset; }},
      {"--lambda", [](auto& c, const auto& f) { c.lambda = f.lambda; }},
      {"--n", [](auto& c, const auto& f) { c.n = f.n; }},
      {"--points", [](auto& c, const auto& f) { c.points = f.points; }},
      {"--depth", [](auto& c, const auto& f) { c.depth = f.depth; }},
      {"--digits", [](auto& c, const auto& f) { c.digits = f.digits; }},
      {"--trials", [](auto& c, const auto& f) { c.trials = f.trials; }},
      {"--level", [](auto& c, const auto& f) { c.level = f.level; }},
      {"--M", [](auto& c, const auto& f) { c.M = f.M; }},
      {"--N", [](auto& c, const auto& f) { c.N = f.N; }},
      {"--branches", [](auto& c, const auto& f) { c.branches = f.branches; }},
      {"--words", [](auto& c, const auto& f) { c.words = f.words; }},
      {"--k-max", [](auto& c, const auto& f) { c.k_max = f.k_max; }},
      {"--q-max", [](auto& c, const auto& f) { c.q_max = f.q_max; }},
      {"--t-max", [](auto& c, const auto& f) { c.t_max = f.t_max; }},
      {"--dt", [](auto& c, const auto& f) { c.dt = f.dt; }},
      {"--tol", [](auto& c, const auto& f) { c.tol = f.tol; }},
      {"--seed",
       [](auto& c, const auto& f) {
         c.seed = f.seed;
         c.seed_set = true;
       }},
      {"--out-json", [](auto& c, const auto& f) { c.out_json = f.out_json; }},
      {"--out-csv", [](auto& c, const auto& f) { c.out_csv = f.out_csv; }},
  };

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON config file; explicit flags override its values");
    sub->add_option("--seed", flags.seed,
                    "random seed (required, here or in the config file)");
    sub->add_option("--out-json", flags.out_json,
                    "also write the JSON report to this path");
    sub->add_option("--out-csv", flags.out_csv,
                    "write the tabular series to this path");
    sub->add_flag("--assert", assert_mode,
                  "exit 4 when the experiment's pass check fails");
  };

  for (const auto& name : fw::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    add_common(sub);
    if (name == "cf-stats") {
      sub->add_option("--system", flags.system, "system preset or file");
      sub->add_option("--points", flags.points, "number of coded points");
      sub->add_option("--depth", flags.depth,
                      "initial word depth (0 = derived from --digits)");
      sub->add_option("--digits", flags.digits,
                      "certified digits requested per point");
      sub->add_option("--k-max", flags.k_max,
                      "digit bins before the tail bucket");
    } else if (name == "lyapunov") {
      sub->add_option("--system", flags.system, "system preset or file");
      sub->add_option("--level", flags.level, "wedge power level");
      sub->add_option("--M", flags.M, "rows of the block split");
      sub->add_option("--N", flags.N, "columns of the block split");
      sub->add_option("--blocks", flags.blocks,
                      "synthetic block walk: dim@f1,f2,...;dim@...");
      sub->add_option("--block-weights", flags.block_weights,
                      "generator weights for the synthetic walk");
      sub->add_option("--n", flags.n, "steps per seed stream");
      sub->add_option("--trials", flags.trials, "independent seed streams");
    } else if (name == "positivity") {
      sub->add_option("--system", flags.system, "system preset or file");
      sub->add_option("--level", flags.level, "wedge power level");
      sub->add_option("--M", flags.M, "rows of the block split");
      sub->add_option("--N", flags.N, "columns of the block split");
      sub->add_option("--n", flags.n, "steps per trial");
      sub->add_option("--trials", flags.trials, "sampled words per probe");
    } else if (name == "attraction") {
      sub->add_option("--system", flags.system, "system preset or file");
      sub->add_option("--M", flags.M, "rows of the block split");
      sub->add_option("--N", flags.N, "columns of the block split");
      sub->add_option("--n", flags.n, "walk length");
      sub->add_option("--trials", flags.trials, "random start vectors");
    } else if (name == "flow") {
      sub->add_option("--alpha", flags.alpha,
                      "target number (golden, sqrt2, p/q, cf:a1,a2,...)");
      sub->add_option("--t-max", flags.t_max, "flow time horizon");
      sub->add_option("--dt", flags.dt, "sampling step");
    } else if (name == "ba-test") {
      sub->add_option("--alpha", flags.alpha, "target number");
      sub->add_option("--q-max", flags.q_max, "denominator bound");
    } else if (name == "di-test") {
      sub->add_option("--alpha", flags.alpha, "target number");
      sub->add_option("--lambda", flags.lambda,
                      "improvement factor in (0,1], as a rational");
      sub->add_option("--q-list", flags.q_list,
                      "Q values: a..b range or comma list");
    } else if (name == "walk-equidist") {
      sub->add_option("--system", flags.system, "system preset or file");
      sub->add_option("--M", flags.M, "rows of the block split");
      sub->add_option("--N", flags.N, "columns of the block split");
      sub->add_option("--n", flags.n, "walk length");
    } else if (name == "fn-check") {
      sub->add_option("--branches", flags.branches, "branch count");
      sub->add_option("--words", flags.words, "sampled words");
      sub->add_option("--depth", flags.depth, "word length (0 = 40)");
    } else if (name == "ur-probe") {
      sub->add_option("--branches", flags.branches, "branch count");
      sub->add_option("--words", flags.words, "sampled words");
      sub->add_option("--depth", flags.depth, "word length (0 = 30)");
      sub->add_option("--conj-offset", flags.conj_offset,
                      "rational conjugation offset");
      sub->add_option("--tol", flags.tol, "height bound (0 = 1e-9)");
    } else if (name == "identity-check") {
      sub->add_option("--system", flags.system, "system preset or file");
      sub->add_option("--M", flags.M, "rows of the block split");
      sub->add_option("--N", flags.N, "columns of the block split");
      sub->add_option("--n", flags.n, "largest prefix length checked");
      sub->add_option("--depth", flags.depth, "coding tail length (0 = 80)");
      sub->add_option("--tol", flags.tol,
                      "relative certification tolerance (0 = 1e-9)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    fw::RunConfig cfg;
    if (!config_path.empty()) fw::load_config_file(config_path, cfg);
    cfg.experiment = name;
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() == 0) continue;
      auto it = appliers.find(opt->get_name());
      if (it != appliers.end()) it->second(cfg, flags);
    }
    fw::RunReport report = fw::run_experiment(cfg);
    std::cout << fw::emit_report(cfg, report);
    if (report.exit_code != 0) return report.exit_code;
    if (assert_mode && !report.pass) return 4;
    return 0;
  } catch (const fw::ConfigError& e) {
    return emit_error(name, e.what(), 2);
  } catch (const std::domain_error& e) {
    return emit_error(name, e.what(), 3);
  } catch (const std::exception& e) {
    return emit_error(name, e.what(), 2);
  }
}
