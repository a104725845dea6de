#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sqpo/attr_graph.hpp"

namespace sqpo {

using ObjectName = std::string;
using ShapeEdge = std::pair<ObjectName, ObjectName>;

/// Directed acyclic simple graph of object kinds.
struct Skeleton {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;

    friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

/// Two path composites between the same pair of objects that disagree.
struct CommutativityViolation {
    ObjectName from;
    ObjectName to;
    std::vector<ObjectName> path1;
    std::vector<ObjectName> path2;
    NodeId node; // first source node on which the composites differ

    /// `PAIR a b: a>x>b != a>y>b at node n`
    std::string describe() const;
};

/// Sub-DAG of a hierarchy used to scope propagation.
struct SubHierarchy {
    ObjectName root;
    std::set<ObjectName> nodes;
    std::set<ShapeEdge> edges;

    bool contains(const ObjectName& n) const { return nodes.count(n) != 0; }
    std::set<ObjectName> sources() const;
    std::set<ObjectName> sinks() const;
};

/// DAG of graphs and typing homomorphisms in which all parallel path
/// composites agree. The invariant is enforced on every mutation.
class Hierarchy {
public:
    /// Unchecked construction, for loaders that report problems with
    /// `validate_structure` and `validate_commutativity` instead of throwing.
    static Hierarchy from_parts(std::map<ObjectName, Graph> objects, std::map<ShapeEdge, NodeMap> typings);

    void add_object(const ObjectName& name, Graph g);
    /// Adds the typing a -> b. Rejects cycles, invalid maps and any
    /// commutativity violation the new arrow would introduce.
    void add_typing(const ObjectName& a, const ObjectName& b, NodeMap map);

    /// Attaches a skeleton; `assignment` sends every object to a skeleton node.
    void set_skeleton(Skeleton skeleton, std::map<ObjectName, std::string> assignment);
    const std::optional<Skeleton>& skeleton() const { return skeleton_; }
    const std::map<ObjectName, std::string>& skeleton_assignment() const { return skeleton_assignment_; }

    bool has_object(const ObjectName& n) const { return objects_.count(n) != 0; }
    bool has_typing(const ObjectName& a, const ObjectName& b) const { return typings_.count({a, b}) != 0; }
    const Graph& object(const ObjectName& n) const;
    const NodeMap& typing_map(const ObjectName& a, const ObjectName& b) const;
    Homomorphism typing(const ObjectName& a, const ObjectName& b) const;

    const std::map<ObjectName, Graph>& objects() const { return objects_; }
    const std::map<ShapeEdge, NodeMap>& typings() const { return typings_; }

    std::vector<ObjectName> successors(const ObjectName& n) const;
    std::vector<ObjectName> predecessors(const ObjectName& n) const;

    /// Replaces one object together with all arrows incident to it, without
    /// checking commutativity. Callers re-validate.
    void replace_object(const ObjectName& name, Graph g, const std::map<ShapeEdge, NodeMap>& incident);

    friend bool operator==(const Hierarchy&, const Hierarchy&) = default;

private:
    bool reachable(const ObjectName& from, const ObjectName& to) const;

    std::map<ObjectName, Graph> objects_;
    std::map<ShapeEdge, NodeMap> typings_;
    std::optional<Skeleton> skeleton_;
    std::map<ObjectName, std::string> skeleton_assignment_;
};

/// Checks every arrow and every pair of parallel paths. Empty iff valid.
std::vector<CommutativityViolation> validate_commutativity(const Hierarchy& h);

/// Problems with objects, arrows (dangling, cyclic or not homomorphisms) and
/// the skeleton typing. `validate_commutativity` needs an empty result.
std::vector<std::string> validate_structure(const Hierarchy& h);

/// Descendants of s with the arrows among them; s is the unique source.
SubHierarchy forward_subgraph(const Hierarchy& h, const ObjectName& s);
/// Ancestors of s with the arrows among them; s is the unique sink.
SubHierarchy backward_subgraph(const Hierarchy& h, const ObjectName& s);

/// Composite typing along any path from a to b (identity when a == b).
Homomorphism composed_typing(const Hierarchy& h, const ObjectName& a, const ObjectName& b);

/// Objects of `sub` in waves: each wave contains the nodes whose
/// predecessors (or successors, when `sinks_first`) inside `sub` all lie in
/// earlier waves. Each wave is sorted by name.
std::vector<std::vector<ObjectName>> waves(const SubHierarchy& sub, bool sinks_first);

} // namespace sqpo
