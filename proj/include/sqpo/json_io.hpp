#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sqpo/attr_graph.hpp"
#include "sqpo/hierarchy.hpp"
#include "sqpo/propagation.hpp"
#include "sqpo/rules.hpp"

namespace sqpo::json_io {

using Json = nlohmann::json;

// Every writer emits elements in lexicographic order, so that saving a
// loaded file reproduces it byte for byte. Readers throw Error(Parse).

Json attrs_to_json(const AttrSet& a);
AttrSet attrs_from_json(const Json& j);

/// {"nodes": [{"id", "attrs"}], "edges": [{"from", "to", "attrs"}]}
Json graph_to_json(const Graph& g);
Graph graph_from_json(const Json& j);

/// {"source node": "target node", ...}
Json map_to_json(const NodeMap& m);
NodeMap map_from_json(const Json& j);

/// {"lhs", "interface", "rhs", "left", "right"}, or {"pattern", "edits"}
/// which is expanded with `build_rule`.
Json rule_to_json(const Rule& r);
Rule rule_from_json(const Json& j);
Edit edit_from_json(const Json& j);

/// {"graphs": {name: graph}, "typings": [{"from", "to", "map"}],
///  "skeleton": {"nodes", "edges", "assignment"}}
Json hierarchy_to_json(const Hierarchy& h);
/// With `checked`, typings are added one by one and the first invalid one
/// throws. Without it, the file is loaded as is for validation.
Hierarchy hierarchy_from_json(const Json& j, bool checked = true);

/// {"direction", "origin", "rule", "match", "factorizations", "connectors"}.
/// Factorization maps are resolved against `h`. `rule` and `match` given
/// here replace the ones in the file.
Json plan_to_json(const PropagationPlan& p);
PropagationPlan plan_from_json(const Json& j, const Hierarchy& h, const std::optional<Rule>& rule = std::nullopt,
                               const std::optional<NodeMap>& match = std::nullopt);

/// {"relations": {object: {element: element}}, "same_type": {object: [[...]]}}
RelationSpec relation_from_json(const Json& j);
Json relation_to_json(const RelationSpec& r);

Json report_to_json(const RewriteReport& r);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

/// Throws Error(Io) when the file cannot be read, Error(Parse) on bad JSON.
Json read_file(const std::filesystem::path& path);
/// Throws Error(Io) when the file cannot be written.
void write_file(const std::filesystem::path& path, const Json& j);

} // namespace sqpo::json_io
