#ifndef FORTINET_PROBLEM_IO_HPP
#define FORTINET_PROBLEM_IO_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "network.hpp"
#include "portfolio.hpp"
#include "reliability.hpp"
#include "weights.hpp"

namespace fortinet {

inline constexpr const char* schema_version = "1";

struct ObjectiveDoc {
  std::string name;
  std::string from;
  std::string to;
  double min_reliability = 0.0;
  std::optional<double> volume;
};

struct ActionDoc {
  std::string id;
  std::string node;
  double cost = 0.0;
  double p_after = 0.0;
};

struct LogicalDoc {
  std::string kind;
  std::vector<std::string> actions;
  std::optional<std::size_t> k;
};

struct WeightRowDoc {
  std::vector<double> coefficients;
  std::string sense = "<=";
  double bound = 0.0;
};

struct DocumentOptions {
  std::string method = "auto";
  std::size_t enumeration_cap = default_enumeration_cap;
  std::optional<std::size_t> max_cut_size;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::string bound = "qa";
  bool round_ratios = true;
};

/// In-memory form of a problem file.
struct ProblemDocument {
  std::string schema = schema_version;
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::vector<std::string> border;
  std::vector<ObjectiveDoc> objectives;
  std::vector<ActionDoc> actions;
  double budget = 0.0;
  std::vector<LogicalDoc> logical;
  std::vector<WeightRowDoc> weight_rows;
  DocumentOptions options;
};

namespace detail {

using json = nlohmann::json;

/// Typed access to a JSON object with path-qualified errors and rejection
/// of unknown keys.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_ + ": expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.contains(key)) fail(path_ + ": unknown field '" + key + "'");
    }
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  [[nodiscard]] const json& at(const char* key) const {
    if (!j_.contains(key)) fail(path_ + ": missing field '" + key + "'");
    return j_.at(key);
  }

  [[nodiscard]] std::string sub(const char* key) const { return path_ + "." + key; }

  [[nodiscard]] double number(const char* key) const { return as_number(at(key), sub(key)); }
  [[nodiscard]] std::string string(const char* key) const { return as_string(at(key), sub(key)); }
  [[nodiscard]] std::uint64_t count(const char* key) const { return as_count(at(key), sub(key)); }

  [[nodiscard]] bool boolean(const char* key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) fail(sub(key) + ": expected true or false");
    return v.get<bool>();
  }

  [[nodiscard]] const json& array(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) fail(sub(key) + ": expected an array");
    return v;
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path + ": expected a number");
    return v.get<double>();
  }

  static std::uint64_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(path + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  /// Identifiers may be written as strings or integers.
  static std::string as_id(const json& v, const std::string& path) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    fail(path + ": expected an identifier (string or integer)");
  }

  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path + ": expected a string");
    return v.get<std::string>();
  }

  static double probability(const json& v, const std::string& path) {
    double p = as_number(v, path);
    if (p < 0.0 || p > 1.0) fail(path + ": probability outside [0,1]");
    return p;
  }

 private:
  const json& j_;
  std::string path_;
};

inline std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

}  // namespace detail

inline ProblemDocument parse_problem(const nlohmann::json& root) {
  using detail::Fields;
  Fields top(root, "$");
  top.allow_only({"schema_version", "nodes", "edges", "border_nodes", "objectives", "actions", "budget",
                  "logical_constraints", "weight_constraints", "options"});
  ProblemDocument doc;
  doc.schema = top.string("schema_version");
  if (doc.schema != schema_version) fail("$.schema_version: unsupported version '" + doc.schema + "'");

  const auto& border = top.array("border_nodes");
  for (std::size_t i = 0; i < border.size(); ++i) {
    doc.border.push_back(Fields::as_id(border[i], detail::item("$.border_nodes", i)));
  }
  std::set<std::string> border_ids(doc.border.begin(), doc.border.end());

  const auto& nodes = top.array("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto path = detail::item("$.nodes", i);
    Fields f(nodes[i], path);
    f.allow_only({"id", "p_fail", "fallible"});
    NodeSpec node;
    node.id = Fields::as_id(f.at("id"), f.sub("id"));
    if (f.has("p_fail")) {
      node.p_fail = Fields::probability(f.at("p_fail"), f.sub("p_fail"));
    } else if (!border_ids.contains(node.id)) {
      fail(path + ": missing field 'p_fail' (only border nodes default to 0)");
    }
    if (f.has("fallible")) node.fallible = f.boolean("fallible");
    doc.nodes.push_back(std::move(node));
  }

  const auto& edges = top.array("edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto path = detail::item("$.edges", i);
    if (!edges[i].is_array() || edges[i].size() != 2) fail(path + ": expected a pair of node ids");
    doc.edges.emplace_back(Fields::as_id(edges[i][0], path + "[0]"), Fields::as_id(edges[i][1], path + "[1]"));
  }

  const auto& objectives = top.array("objectives");
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    const auto path = detail::item("$.objectives", i);
    Fields f(objectives[i], path);
    f.allow_only({"name", "pair", "min_reliability", "volume"});
    ObjectiveDoc obj;
    obj.name = f.string("name");
    const auto& pair = f.array("pair");
    if (pair.size() != 2) fail(f.sub("pair") + ": expected two border node ids");
    obj.from = Fields::as_id(pair[0], f.sub("pair") + "[0]");
    obj.to = Fields::as_id(pair[1], f.sub("pair") + "[1]");
    if (f.has("min_reliability")) obj.min_reliability = Fields::probability(f.at("min_reliability"), f.sub("min_reliability"));
    if (f.has("volume")) obj.volume = f.number("volume");
    doc.objectives.push_back(std::move(obj));
  }

  if (root.contains("actions")) {
    const auto& actions = top.array("actions");
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const auto path = detail::item("$.actions", i);
      Fields f(actions[i], path);
      f.allow_only({"id", "node", "cost", "p_after"});
      ActionDoc act;
      act.id = Fields::as_id(f.at("id"), f.sub("id"));
      act.node = Fields::as_id(f.at("node"), f.sub("node"));
      act.cost = f.number("cost");
      act.p_after = Fields::probability(f.at("p_after"), f.sub("p_after"));
      doc.actions.push_back(std::move(act));
    }
  }

  doc.budget = top.has("budget") ? top.number("budget") : 0.0;

  if (root.contains("logical_constraints")) {
    const auto& logical = top.array("logical_constraints");
    for (std::size_t i = 0; i < logical.size(); ++i) {
      Fields f(logical[i], detail::item("$.logical_constraints", i));
      f.allow_only({"kind", "actions", "k"});
      LogicalDoc c;
      c.kind = f.string("kind");
      const auto& ids = f.array("actions");
      for (std::size_t a = 0; a < ids.size(); ++a) c.actions.push_back(Fields::as_id(ids[a], detail::item(f.sub("actions"), a)));
      if (f.has("k")) c.k = f.count("k");
      doc.logical.push_back(std::move(c));
    }
  }

  if (root.contains("weight_constraints")) {
    const auto& rows = top.array("weight_constraints");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Fields f(rows[i], detail::item("$.weight_constraints", i));
      f.allow_only({"coefficients", "sense", "bound"});
      WeightRowDoc row;
      const auto& coeffs = f.array("coefficients");
      for (std::size_t c = 0; c < coeffs.size(); ++c) {
        row.coefficients.push_back(Fields::as_number(coeffs[c], detail::item(f.sub("coefficients"), c)));
      }
      row.sense = f.string("sense");
      if (row.sense != "<=" && row.sense != ">=") fail(f.sub("sense") + ": expected \"<=\" or \">=\"");
      row.bound = f.has("bound") ? f.number("bound") : 0.0;
      doc.weight_rows.push_back(std::move(row));
    }
  }

  if (root.contains("options")) {
    Fields f(top.at("options"), "$.options");
    f.allow_only({"method", "enumeration_cap", "max_cut_size", "samples", "seed", "bound", "round_ratios"});
    auto& o = doc.options;
    if (f.has("method")) o.method = f.string("method");
    if (f.has("enumeration_cap")) o.enumeration_cap = f.count("enumeration_cap");
    if (f.has("max_cut_size")) o.max_cut_size = f.count("max_cut_size");
    if (f.has("samples")) o.samples = f.count("samples");
    if (f.has("seed")) o.seed = f.count("seed");
    if (f.has("bound")) o.bound = f.string("bound");
    if (f.has("round_ratios")) o.round_ratios = f.boolean("round_ratios");
    (void)parse_method(o.method);
  }
  return doc;
}

inline ProblemDocument parse_problem_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("problem file is not valid JSON: ") + e.what());
  }
  return parse_problem(root);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemDocument load_problem(const std::string& path) { return parse_problem_text(read_file(path)); }

inline nlohmann::json to_json(const ProblemDocument& doc) {
  using json = nlohmann::json;
  json root = json::object();
  root["schema_version"] = doc.schema;
  json nodes = json::array();
  for (const auto& n : doc.nodes) {
    json node = {{"id", n.id}, {"p_fail", n.p_fail}};
    if (n.fallible) node["fallible"] = *n.fallible;
    nodes.push_back(std::move(node));
  }
  root["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& [a, b] : doc.edges) edges.push_back({a, b});
  root["edges"] = std::move(edges);
  root["border_nodes"] = doc.border;
  json objectives = json::array();
  for (const auto& o : doc.objectives) {
    json obj = {{"name", o.name}, {"pair", {o.from, o.to}}, {"min_reliability", o.min_reliability}};
    if (o.volume) obj["volume"] = *o.volume;
    objectives.push_back(std::move(obj));
  }
  root["objectives"] = std::move(objectives);
  json actions = json::array();
  for (const auto& a : doc.actions) {
    actions.push_back({{"id", a.id}, {"node", a.node}, {"cost", a.cost}, {"p_after", a.p_after}});
  }
  root["actions"] = std::move(actions);
  root["budget"] = doc.budget;
  json logical = json::array();
  for (const auto& c : doc.logical) {
    json row = {{"kind", c.kind}, {"actions", c.actions}};
    if (c.k) row["k"] = *c.k;
    logical.push_back(std::move(row));
  }
  root["logical_constraints"] = std::move(logical);
  json rows = json::array();
  for (const auto& r : doc.weight_rows) rows.push_back({{"coefficients", r.coefficients}, {"sense", r.sense}, {"bound", r.bound}});
  root["weight_constraints"] = std::move(rows);
  const auto& o = doc.options;
  json options = {{"method", o.method},       {"enumeration_cap", o.enumeration_cap}, {"samples", o.samples},
                  {"seed", o.seed},           {"bound", o.bound},                     {"round_ratios", o.round_ratios}};
  if (o.max_cut_size) options["max_cut_size"] = *o.max_cut_size;
  root["options"] = std::move(options);
  return root;
}

/// Builds the validated model. Objective volumes, when given for every
/// objective, add least-volume ratio constraints to the weight set.
inline ProblemSpec to_spec(const ProblemDocument& doc) {
  Network net(doc.nodes, doc.edges, doc.border);

  std::vector<Objective> objectives;
  for (const auto& o : doc.objectives) {
    objectives.push_back(make_objective(net, o.name, o.from, o.to, o.min_reliability));
  }
  require(!objectives.empty(), "at least one objective is required");

  std::vector<FortificationAction> actions;
  std::unordered_map<std::string, std::size_t> action_index;
  for (const auto& a : doc.actions) {
    if (!action_index.emplace(a.id, actions.size()).second) fail("duplicate action id '" + a.id + "'");
    auto node = net.find(a.node);
    if (!node) fail("action '" + a.id + "': unknown node '" + a.node + "'");
    actions.push_back({a.id, *node, a.cost, a.p_after});
  }

  std::vector<LogicalConstraint> logical;
  for (const auto& c : doc.logical) {
    LogicalConstraint lc;
    lc.kind = parse_logical_kind(c.kind);
    for (const auto& id : c.actions) {
      auto it = action_index.find(id);
      if (it == action_index.end()) fail("logical constraint references unknown action '" + id + "'");
      lc.actions.push_back(it->second);
    }
    if (lc.kind == LogicalKind::at_most_k) {
      if (!c.k) fail("at_most_k constraint needs 'k'");
      lc.k = *c.k;
    } else if (c.k) {
      fail(std::string(to_string(lc.kind)) + " constraint does not take 'k'");
    }
    logical.push_back(std::move(lc));
  }

  WeightSet weights = noninformative_set(objectives.size());
  for (const auto& r : doc.weight_rows) {
    WeightConstraint row{r.coefficients, r.bound};
    if (r.sense == ">=") {
      for (auto& c : row.coefficients) c = -c;
      row.bound = -row.bound;
    }
    add_constraint(weights, std::move(row));
  }
  std::size_t with_volume = 0;
  for (const auto& o : doc.objectives) with_volume += o.volume ? 1 : 0;
  if (with_volume > 0) {
    require(with_volume == doc.objectives.size(), "volumes must be given for every objective or none");
    std::vector<double> volumes;
    for (const auto& o : doc.objectives) volumes.push_back(*o.volume);
    if (volumes.size() > 1) {
      for (auto& row : ratio_constraints_from_volumes(volumes, doc.options.round_ratios)) {
        add_constraint(weights, std::move(row));
      }
    }
  }

  ProblemSpec spec{std::move(net), std::move(objectives), std::move(actions), doc.budget, std::move(logical),
                   std::move(weights)};
  spec.validate();
  return spec;
}

inline ReliabilityOptions reliability_options(const DocumentOptions& o, std::size_t workers = 1) {
  ReliabilityOptions r;
  r.method = parse_method(o.method);
  r.enumeration_cap = o.enumeration_cap;
  r.max_cut_size = o.max_cut_size;
  r.samples = o.samples;
  r.seed = o.seed;
  r.workers = workers;
  return r;
}

}  // namespace fortinet

#endif
