#ifndef FORTINET_COMMANDS_HPP
#define FORTINET_COMMANDS_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analytics.hpp"
#include "error.hpp"
#include "frontier.hpp"
#include "problem_io.hpp"

namespace fortinet {

inline constexpr const char* tool_version = "1.0.0";

/// Result of one command: the table for stdout or --out, a human summary for
/// stderr, and warnings. `options` records the effective settings for the
/// run manifest.
struct CommandOutput {
  std::string table;
  std::vector<std::string> summary;
  std::vector<std::string> warnings;
  nlohmann::json options = nlohmann::json::object();
  int exit_code = 0;
};

/// Exit code for an error: 2 for an exceeded cap, 1 otherwise.
inline int exit_code_for(const Error& e) { return e.kind() == ErrorKind::cap_exceeded ? 2 : 1; }

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) text_ += ',';
      text_ += csv_field(fields[i]);
    }
    text_ += '\n';
  }
  [[nodiscard]] std::string str() const { return text_; }

 private:
  std::string text_;
};

/// Comma-separated numbers; "inf" is accepted.
inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    char* stop = nullptr;
    double v = std::strtod(item.c_str(), &stop);
    if (item.empty() || stop == item.c_str() || *stop != '\0' || std::isnan(v)) {
      fail(what + ": '" + item + "' is not a number");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

/// FNV-1a of the raw input bytes, as 16 hex digits.
inline std::string input_digest(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string input_digest;
  std::string command;
  nlohmann::json options;
  double wall_time_seconds = 0.0;
  std::vector<std::string> warnings;
  int exit_code = 0;

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"tool", "fortinet"},          {"tool_version", tool_version},
            {"command", command},          {"input_digest", input_digest},
            {"options", options},          {"wall_time_seconds", wall_time_seconds},
            {"warnings", warnings},        {"exit_code", exit_code}};
  }
};

/// A parsed problem plus everything derived from it that commands share.
struct LoadedProblem {
  ProblemDocument doc;
  ProblemSpec spec;
  ExtremePointSet basis;

  explicit LoadedProblem(ProblemDocument d) : doc(std::move(d)), spec(to_spec(doc)), basis(extreme_points(spec.weight_set)) {}
};

namespace detail {

inline FrontierOptions frontier_options(const ProblemDocument& doc, std::size_t workers) {
  FrontierOptions options;
  options.bound = parse_bound_mode(doc.options.bound);
  options.reliability = reliability_options(doc.options, 1);
  options.workers = workers;
  return options;
}

inline std::string action_list(const Portfolio& q, const ProblemSpec& spec) {
  std::string out;
  for (std::size_t l = 0; l < q.size(); ++l) {
    if (!q[l]) continue;
    if (!out.empty()) out += ';';
    out += spec.actions[l].id;
  }
  return out;
}

inline void note_truncation(const ReliabilityEngine& engine, CommandOutput& out) {
  for (std::size_t j = 0; j < engine.objectives().size(); ++j) {
    if (engine.resolved_method() == Method::mcub && engine.cuts(j).truncated) {
      out.warnings.push_back("objective '" + engine.objectives()[j].name +
                             "': cut collection truncated by max_cut_size; mcub bound direction is unspecified");
    }
  }
}

}  // namespace detail

struct ReliabilityArgs {
  std::optional<std::string> method;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
};

/// Per-objective reliability of the unfortified network.
inline CommandOutput run_reliability(const LoadedProblem& problem, const ReliabilityArgs& args, std::size_t workers) {
  auto doc_options = problem.doc.options;
  if (args.method) doc_options.method = *args.method;
  if (args.samples) doc_options.samples = *args.samples;
  if (args.seed) doc_options.seed = *args.seed;
  auto options = reliability_options(doc_options, workers);
  ReliabilityEngine engine(problem.spec.network, problem.spec.objectives, options);

  CommandOutput out;
  out.options = {{"method", doc_options.method}, {"samples", doc_options.samples}, {"seed", doc_options.seed}};
  CsvWriter csv;
  csv.row({"objective", "value", "method", "bound_direction", "std_error"});
  auto estimates = engine.estimates(problem.spec.network.baseline());
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    const auto& e = estimates[j];
    csv.row({problem.spec.objectives[j].name, format_number(e.value), std::string(to_string(e.method)),
             std::string(to_string(e.bound)), e.method == Method::monte_carlo ? format_number(e.std_error) : ""});
  }
  detail::note_truncation(engine, out);
  out.table = csv.str();
  return out;
}

struct FrontierArgs {
  bool use_requirements = true;
  std::optional<std::string> bound;
  std::optional<double> budget;
};

inline std::string frontier_csv(const Frontier& frontier, const ProblemSpec& spec) {
  CsvWriter csv;
  std::vector<std::string> header{"portfolio", "actions", "cost"};
  for (const auto& obj : spec.objectives) header.push_back("R_" + obj.name);
  for (std::size_t e = 0; e < frontier.basis.size(); ++e) header.push_back("U_e" + std::to_string(e + 1));
  csv.row(header);
  for (const auto& entry : frontier.entries) {
    std::vector<std::string> row{entry.portfolio.to_string(), detail::action_list(entry.portfolio, spec),
                                 format_number(entry.cost)};
    for (double r : entry.reliabilities) row.push_back(format_number(r));
    for (double u : entry.utilities) row.push_back(format_number(u));
    csv.row(row);
  }
  return csv.str();
}

inline std::vector<std::string> frontier_summary(const Frontier& frontier) {
  std::vector<std::string> lines;
  lines.push_back("frontier size: " + std::to_string(frontier.size()));
  for (double c : cost_levels(frontier)) {
    std::size_t n = 0;
    for (const auto& e : frontier.entries) n += at_level(e.cost, c, CostLevel::exact) ? 1 : 0;
    lines.push_back("cost " + format_number(c) + ": " + std::to_string(n) + " portfolio(s)");
  }
  return lines;
}

inline Frontier frontier_for(const LoadedProblem& problem, const FrontierArgs& args, std::size_t workers,
                             CommandOutput& out) {
  auto doc = problem.doc;
  if (args.bound) doc.options.bound = *args.bound;
  auto options = detail::frontier_options(doc, workers);
  ProblemSpec spec = problem.spec;
  if (args.budget) {
    spec.budget = *args.budget;
    spec.validate();
  }
  out.options = {{"bound", doc.options.bound}, {"requirements", args.use_requirements},
                 {"budget", spec.budget},      {"method", doc.options.method}};
  auto frontier = compute_frontier(spec, problem.basis, options, args.use_requirements);
  if (frontier.entries.empty()) {
    out.warnings.push_back("no feasible portfolio meets the minimum reliability requirements");
  }
  return frontier;
}

/// Cost-efficient portfolios as CSV, sorted by cost then earlier actions.
inline CommandOutput run_frontier(const LoadedProblem& problem, const FrontierArgs& args, std::size_t workers) {
  CommandOutput out;
  auto frontier = frontier_for(problem, args, workers, out);
  out.table = frontier_csv(frontier, problem.spec);
  out.summary = frontier_summary(frontier);
  return out;
}

struct CoreIndexArgs {
  FrontierArgs frontier;
  std::optional<std::vector<double>> costs;
  bool cumulative = false;
};

/// Core index of every action at each requested cost level (all frontier
/// cost levels by default). A level with no frontier portfolio yields one
/// row per action with an empty value and status empty_level.
inline CommandOutput run_core_index(const LoadedProblem& problem, const CoreIndexArgs& args, std::size_t workers) {
  CommandOutput out;
  auto frontier = frontier_for(problem, args.frontier, workers, out);
  const auto mode = args.cumulative ? CostLevel::up_to : CostLevel::exact;
  out.options["cumulative"] = args.cumulative;
  auto levels = args.costs ? *args.costs : cost_levels(frontier);
  if (args.costs) out.options["costs"] = *args.costs;

  CsvWriter csv;
  csv.row({"action", "cost", "core_index", "status"});
  for (double c : levels) {
    bool any = std::any_of(frontier.entries.begin(), frontier.entries.end(),
                           [&](const EvaluatedPortfolio& e) { return at_level(e.cost, c, mode); });
    if (!any) out.warnings.push_back("no frontier portfolio at cost level " + format_number(c));
    for (std::size_t l = 0; l < problem.spec.actions.size(); ++l) {
      const auto& id = problem.spec.actions[l].id;
      if (any) {
        csv.row({id, format_number(c), format_number(core_index(frontier, l, c, mode)), "ok"});
      } else {
        csv.row({id, format_number(c), "", "empty_level"});
      }
    }
  }
  out.table = csv.str();
  out.summary = frontier_summary(frontier);
  return out;
}

struct OptimizeArgs {
  std::vector<double> weights;
  std::optional<double> budget;
};

/// Best feasible portfolio for one weight vector. Weights that do not sum to
/// one are rescaled with a warning.
inline CommandOutput run_optimize(const LoadedProblem& problem, const OptimizeArgs& args, std::size_t) {
  CommandOutput out;
  const auto m = problem.spec.objectives.size();
  require(args.weights.size() == m, "--weights needs " + std::to_string(m) + " value(s)");
  double sum = 0.0;
  for (double w : args.weights) {
    require(w >= 0.0 && std::isfinite(w), "--weights must be nonnegative");
    sum += w;
  }
  require(sum > 0.0, "--weights must not all be zero");
  auto w = args.weights;
  if (std::abs(sum - 1.0) > weight_tolerance) {
    for (auto& wi : w) wi /= sum;
    out.warnings.push_back("weights summed to " + format_number(sum) + "; renormalized to the simplex");
  }
  ProblemSpec spec = problem.spec;
  if (args.budget) spec.budget = *args.budget;
  out.options = {{"weights", w}, {"budget", spec.budget}, {"method", problem.doc.options.method}};

  auto best = solve_exact_weights(spec, w, reliability_options(problem.doc.options, 1));
  CsvWriter csv;
  std::vector<std::string> header{"portfolio", "actions", "cost", "utility"};
  for (const auto& obj : spec.objectives) header.push_back("R_" + obj.name);
  csv.row(header);
  std::vector<std::string> row{best.portfolio.to_string(), detail::action_list(best.portfolio, spec),
                               format_number(best.cost), format_number(best.utilities[0])};
  for (double r : best.reliabilities) row.push_back(format_number(r));
  csv.row(row);
  out.table = csv.str();
  return out;
}

struct SensitivityArgs {
  std::vector<double> p_grid{0.01, 0.02, 0.03, 0.04, 0.05};
  std::vector<double> divisor_grid{2, 3, 4, 5};
  FrontierArgs frontier;
};

/// Frontier composition over a grid of uniform baseline probabilities and
/// reduction divisors.
inline CommandOutput run_sensitivity(const LoadedProblem& problem, const SensitivityArgs& args, std::size_t workers) {
  CommandOutput out;
  auto doc = problem.doc;
  if (args.frontier.bound) doc.options.bound = *args.frontier.bound;
  auto options = detail::frontier_options(doc, workers);
  std::vector<std::string> divisors;
  for (double d : args.divisor_grid) divisors.push_back(format_number(d));
  out.options = {{"p_grid", args.p_grid}, {"divisor_grid", divisors}, {"bound", doc.options.bound},
                 {"requirements", args.frontier.use_requirements}};
  auto report = sensitivity_sweep(problem.spec, problem.basis, args.p_grid, args.divisor_grid, options,
                                  args.frontier.use_requirements);
  CsvWriter csv;
  csv.row({"p", "divisor", "p_after", "frontier_size", "fingerprint", "matches_first"});
  for (const auto& cell : report.cells) {
    csv.row({format_number(cell.p), format_number(cell.divisor), format_number(cell.p_after),
             std::to_string(cell.frontier_size), cell.fingerprint,
             cell.fingerprint == report.cells.front().fingerprint ? "true" : "false"});
  }
  out.table = csv.str();
  out.summary.push_back(std::string("composition_invariant: ") + (report.composition_invariant ? "true" : "false"));
  return out;
}

struct ValidateArgs {
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
};

/// Exact, cut-set bound and Monte Carlo reliability side by side.
inline CommandOutput run_validate(const LoadedProblem& problem, const ValidateArgs& args, std::size_t workers) {
  auto doc_options = problem.doc.options;
  if (args.samples) doc_options.samples = *args.samples;
  if (args.seed) doc_options.seed = *args.seed;
  auto options = reliability_options(doc_options, workers);
  ReliabilityEngine engine(problem.spec.network, problem.spec.objectives, options);
  const auto p = problem.spec.network.baseline();

  CommandOutput out;
  out.options = {{"samples", doc_options.samples}, {"seed", doc_options.seed},
                 {"enumeration_cap", doc_options.enumeration_cap}};
  CsvWriter csv;
  csv.row({"objective", "exact", "mcub", "mcub_bound_direction", "mc", "mc_std_error", "exact_minus_mcub",
           "mc_minus_exact"});
  for (std::size_t j = 0; j < problem.spec.objectives.size(); ++j) {
    auto exact = engine.estimate(j, p, Method::exact);
    auto mcub = engine.estimate(j, p, Method::mcub);
    auto mc = engine.estimate(j, p, Method::monte_carlo);
    csv.row({problem.spec.objectives[j].name, format_number(exact.value), format_number(mcub.value),
             std::string(to_string(mcub.bound)), format_number(mc.value), format_number(mc.std_error),
             format_number(exact.value - mcub.value), format_number(mc.value - exact.value)});
    if (std::abs(mc.value - exact.value) > 4.0 * mc.std_error + 1e-12) {
      out.warnings.push_back("objective '" + problem.spec.objectives[j].name +
                             "': monte carlo differs from exact by more than 4 standard errors");
    }
  }
  out.table = csv.str();
  return out;
}

struct CentralityArgs {
  std::optional<std::vector<double>> importance;
};

inline CommandOutput run_centrality(const LoadedProblem& problem, const CentralityArgs& args, std::size_t) {
  CommandOutput out;
  const auto& net = problem.spec.network;
  if (args.importance) out.options["importance"] = *args.importance;
  auto report = centrality(net, args.importance ? &*args.importance : nullptr);
  out.warnings = report.warnings;
  CsvWriter csv;
  csv.row({"node", "degree", "closeness", "betweenness"});
  for (std::size_t v = 0; v < net.size(); ++v) {
    csv.row({net.node(v).id, format_number(report.degree[v]), format_number(report.closeness[v]),
             format_number(report.betweenness[v])});
  }
  out.table = csv.str();
  if (report.spearman_degree) {
    out.summary.push_back("spearman degree: " + format_number(*report.spearman_degree));
    out.summary.push_back("spearman closeness: " + format_number(*report.spearman_closeness));
    out.summary.push_back("spearman betweenness: " + format_number(*report.spearman_betweenness));
  }
  return out;
}

struct CurvesArgs {
  std::optional<std::vector<double>> budgets;
  FrontierArgs frontier;
};

/// Best reliability per objective over the frontier at each budget (every
/// integer budget from 0 to the problem budget by default).
inline CommandOutput run_curves(const LoadedProblem& problem, const CurvesArgs& args, std::size_t workers) {
  CommandOutput out;
  auto doc = problem.doc;
  if (args.frontier.bound) doc.options.bound = *args.frontier.bound;
  std::vector<double> budgets;
  if (args.budgets) {
    budgets = *args.budgets;
  } else {
    for (double b = 0; b <= problem.spec.budget + tolerance; b += 1.0) budgets.push_back(b);
  }
  out.options = {{"budgets", budgets}, {"bound", doc.options.bound}, {"requirements", args.frontier.use_requirements}};
  auto points = reliability_curves(problem.spec, problem.basis, budgets, detail::frontier_options(doc, workers),
                                   args.frontier.use_requirements);
  CsvWriter csv;
  csv.row({"budget", "objective", "reliability"});
  for (const auto& pt : points) {
    csv.row({format_number(pt.budget), problem.spec.objectives[pt.objective].name, format_number(pt.reliability)});
  }
  out.table = csv.str();
  return out;
}

struct CountArgs {
  std::optional<std::vector<double>> budgets;
};

/// Number of feasible portfolios at each budget.
inline CommandOutput run_count(const LoadedProblem& problem, const CountArgs& args, std::size_t) {
  CommandOutput out;
  auto budgets = args.budgets ? *args.budgets : std::vector<double>{problem.spec.budget};
  out.options = {{"budgets", budgets}};
  CsvWriter csv;
  csv.row({"budget", "feasible_portfolios"});
  for (double b : budgets) {
    ProblemSpec spec = problem.spec;
    spec.budget = b;
    spec.validate();
    csv.row({format_number(b), std::to_string(count_feasible_portfolios(spec))});
  }
  out.table = csv.str();
  return out;
}

/// Extreme points of the problem's weight set.
inline CommandOutput run_extreme_points(const LoadedProblem& problem, std::size_t) {
  CommandOutput out;
  CsvWriter csv;
  std::vector<std::string> header{"point"};
  for (const auto& obj : problem.spec.objectives) header.push_back("w_" + obj.name);
  csv.row(header);
  for (std::size_t e = 0; e < problem.basis.size(); ++e) {
    std::vector<std::string> row{"e" + std::to_string(e + 1)};
    for (double w : problem.basis.points[e]) row.push_back(format_number(w));
    csv.row(row);
  }
  out.table = csv.str();
  return out;
}

}  // namespace fortinet

#endif
