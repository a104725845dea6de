#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqpo/error.hpp"

namespace sqpo {

using NodeId = std::string;
using Edge = std::pair<NodeId, NodeId>;

// Alternative order (bool < int < string) gives the total order used when serializing.
using AttrValue = std::variant<bool, std::int64_t, std::string>;

// Key -> non-empty set of values. An empty value set is never stored.
using AttrSet = std::map<std::string, std::set<AttrValue>>;

std::string to_string(const AttrValue& value);

namespace attrs {

bool subset(const AttrSet& a, const AttrSet& b);
AttrSet unite(const AttrSet& a, const AttrSet& b);
AttrSet intersect(const AttrSet& a, const AttrSet& b);
AttrSet subtract(const AttrSet& a, const AttrSet& b);
AttrSet normalized(AttrSet a);

} // namespace attrs

/// Finite attributed simple directed graph. Self-loops are allowed,
/// parallel edges are not.
///
/// The mutating members keep the invariants; `from_parts` builds an
/// unchecked graph so that loaders can report violations instead of throwing.
class Graph {
public:
    Graph() = default;

    static Graph from_parts(std::map<NodeId, AttrSet> nodes, std::map<Edge, AttrSet> edges);

    bool has_node(const NodeId& n) const { return nodes_.count(n) != 0; }
    bool has_edge(const NodeId& u, const NodeId& v) const { return edges_.count({u, v}) != 0; }
    bool has_edge(const Edge& e) const { return edges_.count(e) != 0; }

    void add_node(const NodeId& n, AttrSet a = {});
    void add_edge(const NodeId& u, const NodeId& v, AttrSet a = {});
    void remove_node(const NodeId& n);
    void remove_edge(const NodeId& u, const NodeId& v);

    void add_node_attrs(const NodeId& n, const AttrSet& a);
    void add_edge_attrs(const NodeId& u, const NodeId& v, const AttrSet& a);
    void set_node_attrs(const NodeId& n, AttrSet a);
    void set_edge_attrs(const NodeId& u, const NodeId& v, AttrSet a);

    const AttrSet& node_attrs(const NodeId& n) const;
    const AttrSet& edge_attrs(const NodeId& u, const NodeId& v) const;
    const AttrSet& edge_attrs(const Edge& e) const { return edge_attrs(e.first, e.second); }

    const std::map<NodeId, AttrSet>& nodes() const { return nodes_; }
    const std::map<Edge, AttrSet>& edges() const { return edges_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return nodes_.empty(); }

    std::vector<NodeId> node_ids() const;
    std::vector<NodeId> successors(const NodeId& n) const;
    std::vector<NodeId> predecessors(const NodeId& n) const;

    /// Returns `base` if unused, otherwise `base#1`, `base#2`, ...
    NodeId fresh_id(const NodeId& base) const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::map<NodeId, AttrSet> nodes_;
    std::map<Edge, AttrSet> edges_;
};

struct Violation {
    std::string element;
    std::string message;
};

std::vector<Violation> validate_graph(const Graph& g);

using NodeMap = std::map<NodeId, NodeId>;

/// Node map between two graphs. Edge images are determined by the node map
/// since graphs are simple.
struct Homomorphism {
    Graph source;
    Graph target;
    NodeMap map;

    const NodeId& operator()(const NodeId& n) const;
    Edge operator()(const Edge& e) const { return {(*this)(e.first), (*this)(e.second)}; }
};

Homomorphism identity(const Graph& g);

/// Checks totality, edge preservation and attribute containment.
bool is_homomorphism(const Homomorphism& h);
bool is_mono(const Homomorphism& h);
bool is_epi(const Homomorphism& h);
/// Homomorphism that is bijective on nodes and edges with equal attributes.
bool is_iso(const Homomorphism& h);

/// Reason the map fails to be a homomorphism, or nullopt.
std::optional<std::string> homomorphism_defect(const Homomorphism& h);

/// Throws InvalidHomomorphism when `h` is not a homomorphism.
void require_homomorphism(const Homomorphism& h, std::string_view what);

/// g ∘ f. Requires f.target == g.source.
Homomorphism compose(const Homomorphism& g, const Homomorphism& f);

/// Extensional equality; requires identical endpoints.
bool hom_equal(const Homomorphism& f, const Homomorphism& g);

// Primitive edits.

struct AddNode {
    NodeId node;
    AttrSet attrs;
};
struct AddEdge {
    NodeId from;
    NodeId to;
    AttrSet attrs;
};
struct DeleteNode {
    NodeId node;
};
struct DeleteEdge {
    NodeId from;
    NodeId to;
};
/// `node` stays, `clone` is the new copy.
struct CloneNode {
    NodeId node;
    NodeId clone;
};
/// `merged` may reuse one of the merged ids.
struct MergeNodes {
    std::vector<NodeId> nodes;
    NodeId merged;
};
/// Targets the node `node`, or the edge (node, edge_to) when `edge_to` is set.
struct AddAttrs {
    NodeId node;
    std::optional<NodeId> edge_to;
    AttrSet attrs;
};
struct RemoveAttrs {
    NodeId node;
    std::optional<NodeId> edge_to;
    AttrSet attrs;
};

using Edit = std::variant<AddNode, AddEdge, DeleteNode, DeleteEdge, CloneNode, MergeNodes, AddAttrs, RemoveAttrs>;

Graph apply_edit(const Graph& g, const Edit& edit);
Graph apply_edits(Graph g, const std::vector<Edit>& edits);

} // namespace sqpo
