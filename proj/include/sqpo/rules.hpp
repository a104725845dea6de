#pragma once

#include <map>
#include <set>
#include <vector>

#include "sqpo/attr_graph.hpp"
#include "sqpo/category.hpp"

namespace sqpo {

/// Span rule L <- P -> R. The left leg is the restrictive part (clones and
/// deletions), the right leg the expansive part (additions and merges).
struct Rule {
    Graph lhs;
    Graph interface;
    Graph rhs;
    NodeMap left;  // P -> L
    NodeMap right; // P -> R

    Homomorphism left_leg() const { return {interface, lhs, left}; }
    Homomorphism right_leg() const { return {interface, rhs, right}; }

    static Rule identity(const Graph& g);
    /// Rule with only an expansive part: L = P, left leg the identity.
    static Rule expansive(const Homomorphism& r);
    /// Rule with only a restrictive part r: P -> L, right leg the identity.
    static Rule restrictive(const Homomorphism& r);
};

/// Throws InvalidHomomorphism if either leg is not a homomorphism.
void validate_rule(const Rule& rule);

/// Builds a rule whose lhs is `pattern` and whose effect is the given
/// sequence of primitive edits. Edits refer to nodes of the graph obtained
/// so far.
Rule build_rule(const Graph& pattern, const std::vector<Edit>& edits);

enum class MatchKind { Restrictive, Expansive };

struct Match {
    Homomorphism instance;
    MatchKind kind;
};

/// All monomorphisms from `pattern` into `target`, in lexicographic order of
/// (pattern node, candidate id). `anchors` pre-assigns pattern nodes.
std::vector<Homomorphism> find_monomorphisms(const Graph& pattern, const Graph& target,
                                             const NodeMap& anchors = {});

/// Homomorphisms from `pattern` into `target` in the same order. Nodes listed
/// in `allowed` may only be sent to the given candidates. A `limit` of zero
/// means no limit.
std::vector<Homomorphism> find_homomorphisms(const Graph& pattern, const Graph& target,
                                             const std::map<NodeId, std::set<NodeId>>& allowed = {},
                                             bool injective = false, std::size_t limit = 0);

/// Matches of the rule's lhs (restrictive) or interface (expansive).
std::vector<Match> find_matches(const Rule& rule, const Graph& g, MatchKind kind, const NodeMap& anchors = {});

struct RewriteResult {
    Graph mid;                // G^-
    Homomorphism mid_to_input; // G^- -> G
    Homomorphism mid_match;    // P >-> G^-
    Graph output;             // G^+
    Homomorphism mid_to_output; // G^- -> G^+
    Homomorphism output_match;  // R >-> G^+
};

/// One sesqui-pushout step: final pullback complement of the left leg over
/// the match, then pushout along the right leg.
RewriteResult sqpo_rewrite(const Rule& rule, const Homomorphism& match);

} // namespace sqpo
