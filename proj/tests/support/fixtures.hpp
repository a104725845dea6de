#pragma once

// Loading of the JSON fixtures under tests/fixtures.

#include <filesystem>
#include <string>

#include "sqpo/hierarchy.hpp"
#include "sqpo/propagation.hpp"
#include "sqpo/rules.hpp"

namespace sqpo::fixtures {

std::filesystem::path path(const std::string& relative);

Hierarchy hierarchy(const std::string& relative);
Rule rule(const std::string& relative);
RelationSpec relation(const std::string& relative);
Graph graph(const std::string& relative);

/// First monomorphism of the rule's lhs into `object` (lexicographic order).
Homomorphism first_match(const Rule& rule, const Hierarchy& h, const ObjectName& object);

} // namespace sqpo::fixtures
