#include "fixtures.hpp"

#include "sqpo/error.hpp"
#include "sqpo/json_io.hpp"

#ifndef SQPO_FIXTURE_DIR
#error "SQPO_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace sqpo::fixtures {

std::filesystem::path path(const std::string& relative) { return std::filesystem::path(SQPO_FIXTURE_DIR) / relative; }

Hierarchy hierarchy(const std::string& relative) { return json_io::hierarchy_from_json(json_io::read_file(path(relative))); }

Rule rule(const std::string& relative) { return json_io::rule_from_json(json_io::read_file(path(relative))); }

RelationSpec relation(const std::string& relative) {
    return json_io::relation_from_json(json_io::read_file(path(relative)));
}

Graph graph(const std::string& relative) { return json_io::graph_from_json(json_io::read_file(path(relative))); }

Homomorphism first_match(const Rule& rule, const Hierarchy& h, const ObjectName& object) {
    auto matches = find_monomorphisms(rule.lhs, h.object(object));
    if (matches.empty()) throw Error(ErrorKind::UnknownElement, "the rule has no match in " + object);
    return matches.front();
}

} // namespace sqpo::fixtures
