#include "sqpo/attr_graph.hpp"

#include <algorithm>
#include <sstream>

namespace sqpo {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::UnknownElement: return "unknown-element";
    case ErrorKind::IdCollision: return "id-collision";
    case ErrorKind::MismatchedEndpoints: return "mismatched-endpoints";
    case ErrorKind::InvalidHomomorphism: return "invalid-homomorphism";
    case ErrorKind::NotMono: return "not-a-mono";
    case ErrorKind::NotEpi: return "not-an-epi";
    case ErrorKind::ContradictoryEdits: return "contradictory-edits";
    case ErrorKind::CycleIntroduced: return "cycle-introduced";
    case ErrorKind::CommutativityViolated: return "commutativity-violated";
    case ErrorKind::NoPath: return "no-path";
    case ErrorKind::FactorizationViolated: return "factorization-condition-violated";
    case ErrorKind::InstanceOfDeletedElement: return "instance-of-deleted-element";
    case ErrorKind::ComposabilityViolated: return "composability-violated";
    case ErrorKind::RelationInconsistent: return "relation-inconsistent";
    case ErrorKind::ResourceBoundExceeded: return "resource-bound-exceeded";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Io: return "io-error";
    }
    return "error";
}

std::string to_string(const AttrValue& value) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(v);
            } else {
                return '"' + v + '"';
            }
        },
        value);
}

namespace attrs {

bool subset(const AttrSet& a, const AttrSet& b) {
    for (const auto& [key, values] : a) {
        auto it = b.find(key);
        if (it == b.end()) {
            if (!values.empty()) return false;
            continue;
        }
        if (!std::includes(it->second.begin(), it->second.end(), values.begin(), values.end())) return false;
    }
    return true;
}

AttrSet unite(const AttrSet& a, const AttrSet& b) {
    AttrSet out = a;
    for (const auto& [key, values] : b) out[key].insert(values.begin(), values.end());
    return normalized(std::move(out));
}

AttrSet intersect(const AttrSet& a, const AttrSet& b) {
    AttrSet out;
    for (const auto& [key, values] : a) {
        auto it = b.find(key);
        if (it == b.end()) continue;
        std::set<AttrValue> both;
        std::set_intersection(values.begin(), values.end(), it->second.begin(), it->second.end(),
                              std::inserter(both, both.end()));
        if (!both.empty()) out.emplace(key, std::move(both));
    }
    return out;
}

AttrSet subtract(const AttrSet& a, const AttrSet& b) {
    AttrSet out;
    for (const auto& [key, values] : a) {
        auto it = b.find(key);
        if (it == b.end()) {
            if (!values.empty()) out.emplace(key, values);
            continue;
        }
        std::set<AttrValue> rest;
        std::set_difference(values.begin(), values.end(), it->second.begin(), it->second.end(),
                            std::inserter(rest, rest.end()));
        if (!rest.empty()) out.emplace(key, std::move(rest));
    }
    return out;
}

AttrSet normalized(AttrSet a) {
    std::erase_if(a, [](const auto& kv) { return kv.second.empty(); });
    return a;
}

} // namespace attrs

Graph Graph::from_parts(std::map<NodeId, AttrSet> nodes, std::map<Edge, AttrSet> edges) {
    Graph g;
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    return g;
}

void Graph::add_node(const NodeId& n, AttrSet a) {
    if (has_node(n)) throw Error(ErrorKind::IdCollision, "node '" + n + "' already exists");
    nodes_.emplace(n, attrs::normalized(std::move(a)));
}

void Graph::add_edge(const NodeId& u, const NodeId& v, AttrSet a) {
    if (!has_node(u)) throw Error(ErrorKind::UnknownElement, "edge source '" + u + "'");
    if (!has_node(v)) throw Error(ErrorKind::UnknownElement, "edge target '" + v + "'");
    auto& slot = edges_[{u, v}];
    slot = attrs::unite(slot, a);
}

void Graph::remove_node(const NodeId& n) {
    if (!has_node(n)) throw Error(ErrorKind::UnknownElement, "node '" + n + "'");
    nodes_.erase(n);
    std::erase_if(edges_, [&](const auto& kv) { return kv.first.first == n || kv.first.second == n; });
}

void Graph::remove_edge(const NodeId& u, const NodeId& v) {
    if (edges_.erase({u, v}) == 0) throw Error(ErrorKind::UnknownElement, "edge '" + u + "'->'" + v + "'");
}

void Graph::add_node_attrs(const NodeId& n, const AttrSet& a) {
    auto it = nodes_.find(n);
    if (it == nodes_.end()) throw Error(ErrorKind::UnknownElement, "node '" + n + "'");
    it->second = attrs::unite(it->second, a);
}

void Graph::add_edge_attrs(const NodeId& u, const NodeId& v, const AttrSet& a) {
    auto it = edges_.find({u, v});
    if (it == edges_.end()) throw Error(ErrorKind::UnknownElement, "edge '" + u + "'->'" + v + "'");
    it->second = attrs::unite(it->second, a);
}

void Graph::set_node_attrs(const NodeId& n, AttrSet a) {
    auto it = nodes_.find(n);
    if (it == nodes_.end()) throw Error(ErrorKind::UnknownElement, "node '" + n + "'");
    it->second = attrs::normalized(std::move(a));
}

void Graph::set_edge_attrs(const NodeId& u, const NodeId& v, AttrSet a) {
    auto it = edges_.find({u, v});
    if (it == edges_.end()) throw Error(ErrorKind::UnknownElement, "edge '" + u + "'->'" + v + "'");
    it->second = attrs::normalized(std::move(a));
}

const AttrSet& Graph::node_attrs(const NodeId& n) const {
    auto it = nodes_.find(n);
    if (it == nodes_.end()) throw Error(ErrorKind::UnknownElement, "node '" + n + "'");
    return it->second;
}

const AttrSet& Graph::edge_attrs(const NodeId& u, const NodeId& v) const {
    auto it = edges_.find({u, v});
    if (it == edges_.end()) throw Error(ErrorKind::UnknownElement, "edge '" + u + "'->'" + v + "'");
    return it->second;
}

std::vector<NodeId> Graph::node_ids() const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    for (const auto& [n, _] : nodes_) out.push_back(n);
    return out;
}

std::vector<NodeId> Graph::successors(const NodeId& n) const {
    std::vector<NodeId> out;
    for (auto it = edges_.lower_bound({n, NodeId{}}); it != edges_.end() && it->first.first == n; ++it)
        out.push_back(it->first.second);
    return out;
}

std::vector<NodeId> Graph::predecessors(const NodeId& n) const {
    std::vector<NodeId> out;
    for (const auto& [e, _] : edges_)
        if (e.second == n) out.push_back(e.first);
    return out;
}

NodeId Graph::fresh_id(const NodeId& base) const {
    if (!has_node(base)) return base;
    for (std::size_t i = 1;; ++i) {
        NodeId candidate = base + "#" + std::to_string(i);
        if (!has_node(candidate)) return candidate;
    }
}

std::vector<Violation> validate_graph(const Graph& g) {
    std::vector<Violation> out;
    for (const auto& [n, a] : g.nodes())
        for (const auto& [key, values] : a)
            if (values.empty()) out.push_back({n, "empty value set for key '" + key + "'"});
    for (const auto& [e, a] : g.edges()) {
        std::string name = e.first + "->" + e.second;
        if (!g.has_node(e.first)) out.push_back({name, "dangling edge: missing source '" + e.first + "'"});
        if (!g.has_node(e.second)) out.push_back({name, "dangling edge: missing target '" + e.second + "'"});
        for (const auto& [key, values] : a)
            if (values.empty()) out.push_back({name, "empty value set for key '" + key + "'"});
    }
    return out;
}

const NodeId& Homomorphism::operator()(const NodeId& n) const {
    auto it = map.find(n);
    if (it == map.end()) throw Error(ErrorKind::UnknownElement, "node '" + n + "' not in domain of map");
    return it->second;
}

Homomorphism identity(const Graph& g) {
    Homomorphism h{g, g, {}};
    for (const auto& [n, _] : g.nodes()) h.map.emplace(n, n);
    return h;
}

std::optional<std::string> homomorphism_defect(const Homomorphism& h) {
    for (const auto& [n, a] : h.source.nodes()) {
        auto it = h.map.find(n);
        if (it == h.map.end()) return "node '" + n + "' is unmapped";
        if (!h.target.has_node(it->second)) return "node '" + n + "' maps to missing '" + it->second + "'";
        if (!attrs::subset(a, h.target.node_attrs(it->second)))
            return "attributes of '" + n + "' not contained in '" + it->second + "'";
    }
    for (const auto& [k, _] : h.map)
        if (!h.source.has_node(k)) return "map mentions unknown source node '" + k + "'";
    for (const auto& [e, a] : h.source.edges()) {
        Edge img{h.map.at(e.first), h.map.at(e.second)};
        if (!h.target.has_edge(img))
            return "edge " + e.first + "->" + e.second + " has no image " + img.first + "->" + img.second;
        if (!attrs::subset(a, h.target.edge_attrs(img)))
            return "attributes of edge " + e.first + "->" + e.second + " not contained in image";
    }
    return std::nullopt;
}

bool is_homomorphism(const Homomorphism& h) { return !homomorphism_defect(h).has_value(); }

void require_homomorphism(const Homomorphism& h, std::string_view what) {
    if (auto defect = homomorphism_defect(h))
        throw Error(ErrorKind::InvalidHomomorphism, std::string(what) + ": " + *defect);
}

bool is_mono(const Homomorphism& h) {
    if (!is_homomorphism(h)) return false;
    std::set<NodeId> seen;
    for (const auto& [_, v] : h.map)
        if (!seen.insert(v).second) return false;
    return true;
}

bool is_epi(const Homomorphism& h) {
    if (!is_homomorphism(h)) return false;
    std::map<NodeId, AttrSet> node_cover;
    for (const auto& [n, a] : h.source.nodes()) {
        auto& c = node_cover[h.map.at(n)];
        c = attrs::unite(c, a);
    }
    for (const auto& [n, a] : h.target.nodes()) {
        auto it = node_cover.find(n);
        if (it == node_cover.end() || !attrs::subset(a, it->second)) return false;
    }
    std::map<Edge, AttrSet> edge_cover;
    for (const auto& [e, a] : h.source.edges()) {
        auto& c = edge_cover[h(e)];
        c = attrs::unite(c, a);
    }
    for (const auto& [e, a] : h.target.edges()) {
        auto it = edge_cover.find(e);
        if (it == edge_cover.end() || !attrs::subset(a, it->second)) return false;
    }
    return true;
}

bool is_iso(const Homomorphism& h) {
    if (!is_mono(h) || !is_epi(h)) return false;
    if (h.source.edge_count() != h.target.edge_count()) return false;
    for (const auto& [n, a] : h.source.nodes())
        if (a != h.target.node_attrs(h.map.at(n))) return false;
    for (const auto& [e, a] : h.source.edges())
        if (a != h.target.edge_attrs(h(e))) return false;
    return true;
}

Homomorphism compose(const Homomorphism& g, const Homomorphism& f) {
    if (!(f.target == g.source))
        throw Error(ErrorKind::MismatchedEndpoints, "compose: target of first arrow differs from source of second");
    Homomorphism out{f.source, g.target, {}};
    for (const auto& [k, v] : f.map) out.map.emplace(k, g(v));
    return out;
}

bool hom_equal(const Homomorphism& f, const Homomorphism& g) {
    if (!(f.source == g.source) || !(f.target == g.target))
        throw Error(ErrorKind::MismatchedEndpoints, "hom_equal: arrows have different endpoints");
    return f.map == g.map;
}

namespace {

void require_node(const Graph& g, const NodeId& n) {
    if (!g.has_node(n)) throw Error(ErrorKind::UnknownElement, "node '" + n + "'");
}

struct EditApplier {
    Graph& g;

    void operator()(const AddNode& e) { g.add_node(e.node, e.attrs); }
    void operator()(const AddEdge& e) {
        if (g.has_edge(e.from, e.to))
            throw Error(ErrorKind::IdCollision, "edge '" + e.from + "'->'" + e.to + "' already exists");
        g.add_edge(e.from, e.to, e.attrs);
    }
    void operator()(const DeleteNode& e) { g.remove_node(e.node); }
    void operator()(const DeleteEdge& e) { g.remove_edge(e.from, e.to); }

    void operator()(const CloneNode& e) {
        require_node(g, e.node);
        g.add_node(e.clone, g.node_attrs(e.node));
        const auto edges = g.edges();
        for (const auto& [edge, a] : edges) {
            const auto& [u, v] = edge;
            if (u == e.node && v == e.node) {
                g.add_edge(e.node, e.clone, a);
                g.add_edge(e.clone, e.node, a);
                g.add_edge(e.clone, e.clone, a);
            } else if (u == e.node) {
                g.add_edge(e.clone, v, a);
            } else if (v == e.node) {
                g.add_edge(u, e.clone, a);
            }
        }
    }

    void operator()(const MergeNodes& e) {
        std::set<NodeId> group(e.nodes.begin(), e.nodes.end());
        for (const auto& n : group) require_node(g, n);
        if (g.has_node(e.merged) && !group.count(e.merged))
            throw Error(ErrorKind::IdCollision, "merge target '" + e.merged + "' already exists");
        AttrSet merged_attrs;
        for (const auto& n : group) merged_attrs = attrs::unite(merged_attrs, g.node_attrs(n));
        std::map<Edge, AttrSet> redirected;
        for (const auto& [edge, a] : g.edges()) {
            if (!group.count(edge.first) && !group.count(edge.second)) continue;
            Edge img{group.count(edge.first) ? e.merged : edge.first,
                     group.count(edge.second) ? e.merged : edge.second};
            auto& slot = redirected[img];
            slot = attrs::unite(slot, a);
        }
        for (const auto& n : group) g.remove_node(n);
        g.add_node(e.merged, merged_attrs);
        for (const auto& [edge, a] : redirected) g.add_edge(edge.first, edge.second, a);
    }

    void operator()(const AddAttrs& e) {
        if (e.edge_to)
            g.add_edge_attrs(e.node, *e.edge_to, e.attrs);
        else
            g.add_node_attrs(e.node, e.attrs);
    }

    void operator()(const RemoveAttrs& e) {
        if (e.edge_to)
            g.set_edge_attrs(e.node, *e.edge_to, attrs::subtract(g.edge_attrs(e.node, *e.edge_to), e.attrs));
        else
            g.set_node_attrs(e.node, attrs::subtract(g.node_attrs(e.node), e.attrs));
    }
};

} // namespace

Graph apply_edit(const Graph& g, const Edit& edit) {
    Graph out = g;
    std::visit(EditApplier{out}, edit);
    return out;
}

Graph apply_edits(Graph g, const std::vector<Edit>& edits) {
    for (const auto& e : edits) std::visit(EditApplier{g}, e);
    return g;
}

} // namespace sqpo
