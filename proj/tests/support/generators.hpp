#pragma once

// Seeded random instances for property tests and the acceptance run.

#include <random>
#include <string>

#include "sqpo/attr_graph.hpp"
#include "sqpo/hierarchy.hpp"
#include "sqpo/propagation.hpp"
#include "sqpo/rules.hpp"

namespace sqpo::gen {

using Rng = std::mt19937_64;

struct Shape {
    std::size_t min_nodes = 1;
    std::size_t max_nodes = 4;
    double edge_prob = 0.3;
    double attr_prob = 0.4;
    int keys = 2;
    int values = 2;
};

bool coin(Rng& rng, double p);
std::size_t pick(Rng& rng, std::size_t n);

AttrSet random_attrs(Rng& rng, const Shape& shape);
AttrSet random_subset(Rng& rng, const AttrSet& a);
Graph random_graph(Rng& rng, const Shape& shape, const std::string& prefix = "n");

/// Random graph X with a homomorphism X -> target.
Homomorphism random_graph_over(Rng& rng, const Graph& target, const Shape& shape, const std::string& prefix = "x");
/// Random homomorphism out of `source` that may merge nodes and add nodes,
/// edges and attributes.
Homomorphism random_extension(Rng& rng, const Graph& source, const Shape& shape, const std::string& prefix = "e");
/// Random subgraph of `target` with its inclusion.
Homomorphism random_subgraph(Rng& rng, const Graph& target, std::size_t max_nodes);
/// Random restrictive rule arrow P -> lhs made of clones and node deletions.
Homomorphism random_clone_delete(Rng& rng, const Graph& lhs);

/// Two arrows sharing an endpoint.
struct ArrowPair {
    Homomorphism f;
    Homomorphism g;
};

/// f: A -> C, g: B -> C with every graph within `shape`.
ArrowPair random_cospan(Rng& rng, const Shape& shape);
/// f: A -> B, g: A -> C; B and C extend A by at most two nodes.
ArrowPair random_span(Rng& rng, const Shape& shape);
/// f: K -> L and a mono g: L >-> G.
ArrowPair random_pbc_instance(Rng& rng, const Shape& shape);
/// Arbitrary f: A -> B.
Homomorphism random_arrow(Rng& rng, const Shape& shape);

/// G typed by T, an expansive rule matched in G and a random factorization
/// derived from a random relation.
struct ForwardInstance {
    Homomorphism typing; // h: G -> T
    Homomorphism match;  // m: L >-> G
    Homomorphism rule;   // r: L -> L+
    ForwardDerivation derivation;
};
ForwardInstance random_forward_instance(Rng& rng, const Shape& shape);

/// G typed by T, a restrictive rule matched in T and a random factorization
/// derived from a random relation.
struct BackwardInstance {
    Homomorphism typing; // h: G -> T
    Homomorphism match;  // m: L >-> T
    Homomorphism rule;   // r: L- -> L
    Restriction restriction;
    BackwardDerivation derivation;
};
BackwardInstance random_backward_instance(Rng& rng, const Shape& shape);

/// Random valid hierarchy with objects o0 .. o{n-1}; arrows go from higher
/// to lower indices.
Hierarchy random_hierarchy(Rng& rng, std::size_t objects, const Shape& shape);

/// Random object of `h` with at least `min_reach` objects below (forward) or
/// above (backward) it, if any.
std::optional<ObjectName> random_origin(Rng& rng, const Hierarchy& h, Direction direction, std::size_t min_reach);

/// Forward plan in which randomly chosen added nodes are typed strictly from
/// some object downwards, consistently across the sub-hierarchy.
PropagationPlan random_forward_plan(Rng& rng, const Hierarchy& h, const ObjectName& origin, const Shape& shape);
/// Backward plan in which randomly chosen clones are split strictly from
/// some object upwards, consistently across the sub-hierarchy.
PropagationPlan random_backward_plan(Rng& rng, const Hierarchy& h, const ObjectName& origin);

} // namespace sqpo::gen
