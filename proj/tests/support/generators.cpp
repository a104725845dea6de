#include "generators.hpp"

#include <algorithm>
#include <numeric>

namespace sqpo::gen {

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

namespace {

AttrValue random_value(Rng& rng, const Shape& shape) {
    int v = static_cast<int>(pick(rng, static_cast<std::size_t>(shape.values) + 1));
    if (v == shape.values) return true;
    if (v % 2) return "v" + std::to_string(v);
    return std::int64_t{v};
}

template <class T>
const T& pick_from(Rng& rng, const std::vector<T>& items) {
    return items[pick(rng, items.size())];
}

} // namespace

AttrSet random_attrs(Rng& rng, const Shape& shape) {
    AttrSet out;
    for (int k = 0; k < shape.keys; ++k) {
        if (!coin(rng, shape.attr_prob)) continue;
        auto& vs = out["k" + std::to_string(k)];
        vs.insert(random_value(rng, shape));
        if (coin(rng, 0.3)) vs.insert(random_value(rng, shape));
    }
    return out;
}

AttrSet random_subset(Rng& rng, const AttrSet& a) {
    AttrSet out;
    for (const auto& [k, vs] : a)
        for (const auto& v : vs)
            if (coin(rng, 0.6)) out[k].insert(v);
    return out;
}

Graph random_graph(Rng& rng, const Shape& shape, const std::string& prefix) {
    Graph g;
    std::size_t n = shape.min_nodes + pick(rng, shape.max_nodes - shape.min_nodes + 1);
    for (std::size_t i = 0; i < n; ++i) g.add_node(prefix + std::to_string(i), random_attrs(rng, shape));
    for (const auto& u : g.node_ids())
        for (const auto& v : g.node_ids())
            if (coin(rng, shape.edge_prob)) g.add_edge(u, v, random_attrs(rng, shape));
    return g;
}

Homomorphism random_graph_over(Rng& rng, const Graph& target, const Shape& shape, const std::string& prefix) {
    Graph x;
    NodeMap map;
    if (target.empty()) return {x, target, map};
    const auto targets = target.node_ids();
    std::size_t n = shape.min_nodes + pick(rng, shape.max_nodes - shape.min_nodes + 1);
    for (std::size_t i = 0; i < n; ++i) {
        NodeId id = prefix + std::to_string(i);
        const NodeId& t = pick_from(rng, targets);
        x.add_node(id, random_subset(rng, target.node_attrs(t)));
        map.emplace(id, t);
    }
    for (const auto& [u, tu] : map)
        for (const auto& [v, tv] : map)
            if (target.has_edge(tu, tv) && coin(rng, 0.6)) x.add_edge(u, v, random_subset(rng, target.edge_attrs(tu, tv)));
    return {x, target, map};
}

Homomorphism random_extension(Rng& rng, const Graph& source, const Shape& shape, const std::string& prefix) {
    const auto ids = source.node_ids();
    std::vector<std::size_t> cls(ids.size());
    std::iota(cls.begin(), cls.end(), 0);
    for (std::size_t i = 1; i < ids.size(); ++i)
        if (coin(rng, 0.2)) cls[i] = cls[pick(rng, i)];
    Graph b;
    NodeMap map;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const NodeId& name = ids[cls[i]];
        if (!b.has_node(name)) b.add_node(name);
        b.add_node_attrs(name, source.node_attrs(ids[i]));
        map.emplace(ids[i], name);
    }
    for (const auto& n : b.node_ids())
        if (coin(rng, 0.2)) b.add_node_attrs(n, random_attrs(rng, shape));
    std::size_t added = pick(rng, 3);
    for (std::size_t i = 0; i < added; ++i) b.add_node(prefix + std::to_string(i), random_attrs(rng, shape));
    for (const auto& [e, a] : source.edges()) b.add_edge(map.at(e.first), map.at(e.second), a);
    for (const auto& u : b.node_ids())
        for (const auto& v : b.node_ids())
            if (coin(rng, shape.edge_prob / 2)) b.add_edge(u, v, random_attrs(rng, shape));
    return {source, b, map};
}

Homomorphism random_subgraph(Rng& rng, const Graph& target, std::size_t max_nodes) {
    auto ids = target.node_ids();
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t n = ids.empty() ? 0 : 1 + pick(rng, std::min(max_nodes, ids.size()));
    Graph s;
    NodeMap map;
    for (std::size_t i = 0; i < n; ++i) {
        s.add_node(ids[i], random_subset(rng, target.node_attrs(ids[i])));
        map.emplace(ids[i], ids[i]);
    }
    for (const auto& [e, a] : target.edges())
        if (s.has_node(e.first) && s.has_node(e.second) && coin(rng, 0.7))
            s.add_edge(e.first, e.second, random_subset(rng, a));
    return {s, target, map};
}

Homomorphism random_clone_delete(Rng& rng, const Graph& lhs) {
    std::vector<Edit> edits;
    Graph names = lhs;
    for (const auto& n : lhs.node_ids()) {
        double r = std::uniform_real_distribution<double>(0, 1)(rng);
        if (r < 0.2) {
            edits.push_back(DeleteNode{n});
        } else if (r < 0.6) {
            NodeId clone = names.fresh_id(n + "_c");
            names.add_node(clone);
            edits.push_back(CloneNode{n, clone});
        }
    }
    return build_rule(lhs, edits).left_leg();
}

ArrowPair random_cospan(Rng& rng, const Shape& shape) {
    Graph c = random_graph(rng, shape, "c");
    return {random_graph_over(rng, c, shape, "a"), random_graph_over(rng, c, shape, "b")};
}

ArrowPair random_span(Rng& rng, const Shape& shape) {
    Shape small = shape;
    small.max_nodes = std::max<std::size_t>(shape.min_nodes, shape.max_nodes > 2 ? shape.max_nodes - 2 : 1);
    Graph a = random_graph(rng, small, "a");
    return {random_extension(rng, a, shape, "b"), random_extension(rng, a, shape, "c")};
}

ArrowPair random_pbc_instance(Rng& rng, const Shape& shape) {
    Graph g = random_graph(rng, shape, "g");
    Homomorphism m = random_subgraph(rng, g, coin(rng, 0.5) ? 2 : 3);
    Homomorphism f;
    if (m.source.node_count() <= shape.max_nodes / 2 && coin(rng, 0.5)) {
        f = random_clone_delete(rng, m.source);
    } else {
        Shape k = shape;
        k.min_nodes = 0;
        f = random_graph_over(rng, m.source, k, "k");
    }
    return {f, m};
}

Homomorphism random_arrow(Rng& rng, const Shape& shape) {
    if (coin(rng, 0.5)) return random_graph_over(rng, random_graph(rng, shape, "b"), shape, "a");
    Shape small = shape;
    small.max_nodes = std::max<std::size_t>(shape.min_nodes, shape.max_nodes > 2 ? shape.max_nodes - 2 : 1);
    return random_extension(rng, random_graph(rng, small, "a"), shape, "b");
}

ForwardInstance random_forward_instance(Rng& rng, const Shape& shape) {
    Shape small = shape;
    small.max_nodes = std::max<std::size_t>(1, shape.max_nodes - 1);
    Graph t = random_graph(rng, small, "t");
    Homomorphism h = random_graph_over(rng, t, shape, "g");
    Homomorphism m = random_subgraph(rng, h.source, 3);
    Homomorphism r = random_extension(rng, m.source, shape, "new");
    std::set<NodeId> old;
    for (const auto& [_, y] : r.map) old.insert(y);
    std::vector<NodeId> added;
    for (const auto& n : r.target.node_ids())
        if (!old.count(n)) added.push_back(n);
    ForwardRelation relation;
    const auto types = t.node_ids();
    for (const auto& n : added)
        if (coin(rng, 0.5)) relation.typing[n] = pick_from(rng, types);
    if (added.size() >= 2 && coin(rng, 0.4)) relation.same_type.push_back({added[0], added[1]});
    ForwardDerivation d = derive_forward_factorization(r, compose(h, m), relation);
    return {h, m, r, d};
}

BackwardInstance random_backward_instance(Rng& rng, const Shape& shape) {
    Graph t = random_graph(rng, shape, "t");
    Homomorphism h = random_graph_over(rng, t, shape, "g");
    Homomorphism m = random_subgraph(rng, t, 3);
    Homomorphism r = random_clone_delete(rng, m.source);
    Restriction restriction = restriction_pullback(h, m);
    NodeMap relation;
    for (const auto& [y, l] : restriction.typing.map) {
        std::vector<NodeId> copies;
        for (const auto& [c, img] : r.map)
            if (img == l) copies.push_back(c);
        if (copies.size() >= 2 && coin(rng, 0.6)) relation[restriction.instance(y)] = pick_from(rng, copies);
    }
    BackwardDerivation d = derive_backward_factorization(r, restriction, relation);
    return {h, m, r, restriction, d};
}

Hierarchy random_hierarchy(Rng& rng, std::size_t objects, const Shape& shape) {
    Hierarchy h;
    for (std::size_t i = 0; i < objects; ++i) {
        const ObjectName name = "o" + std::to_string(i);
        const std::string prefix = name + "_";
        if (i == 0) {
            h.add_object(name, random_graph(rng, shape, prefix));
            continue;
        }
        std::vector<ObjectName> succ;
        for (std::size_t j = 0; j < i; ++j)
            if (coin(rng, 0.5)) succ.push_back("o" + std::to_string(j));
        if (succ.empty()) succ.push_back("o" + std::to_string(pick(rng, i)));
        std::shuffle(succ.begin(), succ.end(), rng);

        Homomorphism first = random_graph_over(rng, h.object(succ.front()), shape, prefix);
        h.add_object(name, first.source);
        std::vector<std::pair<ObjectName, NodeMap>> chosen{{succ.front(), first.map}};
        for (std::size_t s = 1; s < succ.size(); ++s) {
            const ObjectName& target = succ[s];
            std::set<ObjectName> below = forward_subgraph(h, target).nodes;
            std::map<NodeId, std::set<NodeId>> allowed;
            const Graph& g = h.object(name);
            for (const auto& x : g.node_ids()) {
                std::set<NodeId> ok;
                for (const auto& y : h.object(target).node_ids()) {
                    bool good = true;
                    for (const auto& [other, map] : chosen) {
                        std::set<ObjectName> below_other = forward_subgraph(h, other).nodes;
                        for (const auto& d : below) {
                            if (!below_other.count(d)) continue;
                            NodeId via_target = composed_typing(h, target, d)(y);
                            NodeId via_other = composed_typing(h, other, d)(map.at(x));
                            if (via_target != via_other) good = false;
                        }
                    }
                    if (good) ok.insert(y);
                }
                allowed[x] = ok;
            }
            auto homs = find_homomorphisms(g, h.object(target), allowed, false, 16);
            if (homs.empty()) continue;
            chosen.emplace_back(target, homs[pick(rng, homs.size())].map);
        }
        for (const auto& [target, map] : chosen) h.add_typing(name, target, map);
    }
    return h;
}

std::optional<ObjectName> random_origin(Rng& rng, const Hierarchy& h, Direction direction, std::size_t min_reach) {
    std::vector<ObjectName> ok;
    for (const auto& [n, _] : h.objects()) {
        SubHierarchy sub = direction == Direction::Forward ? forward_subgraph(h, n) : backward_subgraph(h, n);
        if (sub.nodes.size() > min_reach && !h.object(n).empty()) ok.push_back(n);
    }
    if (ok.empty()) return std::nullopt;
    return pick_from(rng, ok);
}

PropagationPlan random_forward_plan(Rng& rng, const Hierarchy& h, const ObjectName& origin, const Shape& shape) {
    Homomorphism m = random_subgraph(rng, h.object(origin), 3);
    Homomorphism r = random_extension(rng, m.source, shape, "new");
    Rule rule = Rule::expansive(r);

    SubHierarchy sub = forward_subgraph(h, origin);
    std::vector<ObjectName> others;
    for (const auto& n : sub.nodes)
        if (n != origin) others.push_back(n);
    std::set<NodeId> existing;
    for (const auto& [_, y] : r.map) existing.insert(y);

    RelationSpec relation;
    for (const auto& e : r.target.node_ids()) {
        if (existing.count(e) || others.empty() || !coin(rng, 0.5)) continue;
        const ObjectName& top = pick_from(rng, others);
        if (h.object(top).empty()) continue;
        const NodeId type = pick_from(rng, h.object(top).node_ids());
        for (const auto& j : forward_subgraph(h, top).nodes) relation.typing[j][e] = composed_typing(h, top, j)(type);
    }
    return plan_from_relation(h, Direction::Forward, origin, rule, m, relation).plan;
}

PropagationPlan random_backward_plan(Rng& rng, const Hierarchy& h, const ObjectName& origin) {
    Homomorphism m = random_subgraph(rng, h.object(origin), 3);
    Homomorphism r = random_clone_delete(rng, m.source);
    Rule rule = Rule::restrictive(r);

    SubHierarchy sub = backward_subgraph(h, origin);
    std::vector<ObjectName> others;
    for (const auto& n : sub.nodes)
        if (n != origin) others.push_back(n);

    RelationSpec relation;
    for (const auto& l : m.source.node_ids()) {
        std::vector<NodeId> copies;
        for (const auto& [c, img] : r.map)
            if (img == l) copies.push_back(c);
        if (copies.size() < 2 || others.empty() || !coin(rng, 0.6)) continue;
        const ObjectName& bottom = pick_from(rng, others);
        const Homomorphism down = composed_typing(h, bottom, origin);
        NodeMap chosen;
        for (const auto& [g, t] : down.map)
            if (t == m(l)) chosen[g] = pick_from(rng, copies);
        for (const auto& i : backward_subgraph(h, bottom).nodes) {
            const Homomorphism to_bottom = composed_typing(h, i, bottom);
            for (const auto& [g, gb] : to_bottom.map)
                if (auto it = chosen.find(gb); it != chosen.end()) relation.typing[i][g] = it->second;
        }
    }
    return plan_from_relation(h, Direction::Backward, origin, rule, m, relation).plan;
}

} // namespace sqpo::gen
