// fortinet command-line front end.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fortinet/commands.hpp"

namespace {

using namespace fortinet;

struct Common {
  std::string file;
  std::string out;
  std::string manifest;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("file", common.file, "Problem file (JSON)")->required();
  cmd->add_option("--out", common.out, "Write the table here instead of stdout");
  cmd->add_option("--manifest", common.manifest, "Run manifest path (default <out>.manifest.json when --out is set)");
}

void add_frontier_flags(CLI::App* cmd, FrontierArgs& args, std::optional<std::string>& bound) {
  cmd->add_flag_callback("--no-alpha", [&args] { args.use_requirements = false; },
                         "Ignore minimum reliability requirements");
  cmd->add_flag_callback("--alpha-from-file", [&args] { args.use_requirements = true; },
                         "Apply minimum reliability requirements from the file (default)");
  cmd->add_option("--bound", bound, "Extension bound for discarded portfolios")
      ->check(CLI::IsMember({"qa", "b1"}));
}

std::optional<std::vector<double>> list_option(const std::optional<std::string>& raw, const std::string& name) {
  if (!raw) return std::nullopt;
  return parse_number_list(*raw, name);
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-efficient fortification portfolios for failure-prone networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  Common common;
  ReliabilityArgs rel;
  std::optional<std::string> rel_method;
  FrontierArgs fr;
  std::optional<std::string> fr_bound;
  std::optional<double> fr_budget;
  CoreIndexArgs ci;
  std::optional<std::string> ci_bound, ci_costs;
  std::string opt_weights;
  std::optional<double> opt_budget;
  SensitivityArgs sens;
  std::optional<std::string> sens_bound, sens_p, sens_div;
  ValidateArgs val;
  std::optional<std::string> importance;
  CurvesArgs curves;
  std::optional<std::string> curves_bound, curves_budgets;
  std::optional<std::string> count_budgets;

  std::function<CommandOutput(const LoadedProblem&, std::size_t)> run;

  auto* c_rel = app.add_subcommand("reliability", "Reliability of each objective in the unfortified network");
  add_common(c_rel, common);
  c_rel->add_option("--method", rel_method, "exact, mcub, mc or auto")
      ->check(CLI::IsMember({"exact", "mcub", "mc", "monte_carlo", "auto"}));
  c_rel->add_option("--samples", rel.samples, "Monte Carlo sample count");
  c_rel->add_option("--seed", rel.seed, "Monte Carlo seed");
  c_rel->callback([&] {
    rel.method = rel_method;
    run = [&](const LoadedProblem& p, std::size_t w) { return run_reliability(p, rel, w); };
  });

  auto* c_fr = app.add_subcommand("frontier", "Cost-efficient portfolios");
  add_common(c_fr, common);
  add_frontier_flags(c_fr, fr, fr_bound);
  c_fr->add_option("--budget", fr_budget, "Override the problem budget");
  c_fr->callback([&] {
    fr.bound = fr_bound;
    fr.budget = fr_budget;
    run = [&](const LoadedProblem& p, std::size_t w) { return run_frontier(p, fr, w); };
  });

  auto* c_ci = app.add_subcommand("core-index", "Core index of each action per cost level");
  add_common(c_ci, common);
  add_frontier_flags(c_ci, ci.frontier, ci_bound);
  c_ci->add_option("--costs", ci_costs, "Comma-separated cost levels (default: all frontier costs)");
  c_ci->add_flag("--cumulative", ci.cumulative, "Use portfolios of cost <= c instead of cost == c");
  c_ci->callback([&] {
    ci.frontier.bound = ci_bound;
    ci.costs = list_option(ci_costs, "--costs");
    run = [&](const LoadedProblem& p, std::size_t w) { return run_core_index(p, ci, w); };
  });

  auto* c_opt = app.add_subcommand("optimize", "Best portfolio for one weight vector");
  add_common(c_opt, common);
  c_opt->add_option("--weights", opt_weights, "Comma-separated weights, one per objective")->required();
  c_opt->add_option("--budget", opt_budget, "Override the problem budget");
  c_opt->callback([&] {
    OptimizeArgs args{parse_number_list(opt_weights, "--weights"), opt_budget};
    run = [args](const LoadedProblem& p, std::size_t w) { return run_optimize(p, args, w); };
  });

  auto* c_sens = app.add_subcommand("sensitivity", "Frontier composition across failure-probability grids");
  add_common(c_sens, common);
  add_frontier_flags(c_sens, sens.frontier, sens_bound);
  c_sens->add_option("--p-grid", sens_p, "Baseline probabilities (default 0.01,0.02,0.03,0.04,0.05)");
  c_sens->add_option("--divisor-grid", sens_div, "Reduction divisors, inf for perfect fortification (default 2,3,4,5)");
  c_sens->callback([&] {
    sens.frontier.bound = sens_bound;
    if (sens_p) sens.p_grid = parse_number_list(*sens_p, "--p-grid");
    if (sens_div) sens.divisor_grid = parse_number_list(*sens_div, "--divisor-grid");
    run = [&](const LoadedProblem& p, std::size_t w) { return run_sensitivity(p, sens, w); };
  });

  auto* c_val = app.add_subcommand("validate", "Exact, cut-set bound and Monte Carlo side by side");
  add_common(c_val, common);
  c_val->add_option("--samples", val.samples, "Monte Carlo sample count");
  c_val->add_option("--seed", val.seed, "Monte Carlo seed");
  c_val->callback([&] { run = [&](const LoadedProblem& p, std::size_t w) { return run_validate(p, val, w); }; });

  auto* c_cen = app.add_subcommand("centrality", "Degree, closeness and betweenness per node");
  add_common(c_cen, common);
  c_cen->add_option("--importance", importance, "Comma-separated importance per node for rank correlation");
  c_cen->callback([&] {
    CentralityArgs args{list_option(importance, "--importance")};
    run = [args](const LoadedProblem& p, std::size_t w) { return run_centrality(p, args, w); };
  });

  auto* c_cur = app.add_subcommand("curves", "Best frontier reliability per objective and budget");
  add_common(c_cur, common);
  add_frontier_flags(c_cur, curves.frontier, curves_bound);
  c_cur->add_option("--budgets", curves_budgets, "Ascending budgets (default 0,1,...,budget)");
  c_cur->callback([&] {
    curves.frontier.bound = curves_bound;
    curves.budgets = list_option(curves_budgets, "--budgets");
    run = [&](const LoadedProblem& p, std::size_t w) { return run_curves(p, curves, w); };
  });

  auto* c_cnt = app.add_subcommand("count", "Number of feasible portfolios");
  add_common(c_cnt, common);
  c_cnt->add_option("--budgets", count_budgets, "Budgets (default: the problem budget)");
  c_cnt->callback([&] {
    CountArgs args{list_option(count_budgets, "--budgets")};
    run = [args](const LoadedProblem& p, std::size_t w) { return run_count(p, args, w); };
  });

  auto* c_ext = app.add_subcommand("extreme-points", "Extreme points of the weight set");
  add_common(c_ext, common);
  c_ext->callback([&] { run = [](const LoadedProblem& p, std::size_t w) { return run_extreme_points(p, w); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto started = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.command = command;
  CommandOutput out;
  try {
    auto text = read_file(common.file);
    manifest.input_digest = input_digest(text);
    LoadedProblem problem(parse_problem_text(text));
    out = run(problem, workers_from_environment());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    out.exit_code = exit_code_for(e);
    out.table.clear();
  }

  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& line : out.summary) std::cerr << line << "\n";

  if (out.exit_code == 0) {
    if (common.out.empty()) {
      std::fwrite(out.table.data(), 1, out.table.size(), stdout);
    } else if (!write_text(common.out, out.table)) {
      std::cerr << "error: cannot write '" << common.out << "'\n";
      return 1;
    }
  }

  std::string manifest_path = common.manifest;
  if (manifest_path.empty() && !common.out.empty()) manifest_path = common.out + ".manifest.json";
  if (!manifest_path.empty()) {
    manifest.options = out.options;
    manifest.warnings = out.warnings;
    manifest.exit_code = out.exit_code;
    manifest.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (!write_text(manifest_path, manifest.to_json().dump(2) + "\n")) {
      std::cerr << "error: cannot write '" << manifest_path << "'\n";
      return 1;
    }
  }
  return out.exit_code;
}
