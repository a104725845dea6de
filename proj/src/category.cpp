#include "sqpo/category.hpp"

#include <algorithm>
#include <numeric>

namespace sqpo {

namespace {

void check_valid(const Homomorphism& h, std::string_view what) { require_homomorphism(h, what); }

std::string join(const std::vector<NodeId>& ids, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

SquareResult pullback(const Homomorphism& f, const Homomorphism& g) {
    check_valid(f, "pullback: first leg");
    check_valid(g, "pullback: second leg");
    if (!(f.target == g.target)) throw Error(ErrorKind::MismatchedEndpoints, "pullback: legs have different targets");

    Graph p;
    Homomorphism p_a{{}, f.source, {}};
    Homomorphism p_b{{}, g.source, {}};
    std::map<std::pair<NodeId, NodeId>, NodeId> pair_id;

    for (const auto& [a, a_attrs] : f.source.nodes()) {
        for (const auto& [b, b_attrs] : g.source.nodes()) {
            if (f.map.at(a) != g.map.at(b)) continue;
            NodeId id = p.fresh_id(a + "⋈" + b);
            p.add_node(id, attrs::intersect(a_attrs, b_attrs));
            pair_id.emplace(std::pair{a, b}, id);
            p_a.map.emplace(id, a);
            p_b.map.emplace(id, b);
        }
    }
    for (const auto& [from, from_id] : pair_id) {
        for (const auto& [to, to_id] : pair_id) {
            Edge ea{from.first, to.first};
            Edge eb{from.second, to.second};
            if (!f.source.has_edge(ea) || !g.source.has_edge(eb)) continue;
            p.add_edge(from_id, to_id, attrs::intersect(f.source.edge_attrs(ea), g.source.edge_attrs(eb)));
        }
    }
    p_a.source = p;
    p_b.source = p;
    return {std::move(p), std::move(p_a), std::move(p_b)};
}

SquareResult pushout(const Homomorphism& f, const Homomorphism& g) {
    check_valid(f, "pushout: first leg");
    check_valid(g, "pushout: second leg");
    if (!(f.source == g.source)) throw Error(ErrorKind::MismatchedEndpoints, "pushout: legs have different sources");

    const Graph& b = f.target;
    const Graph& c = g.target;
    const std::vector<NodeId> b_ids = b.node_ids();
    const std::vector<NodeId> c_ids = c.node_ids();
    std::map<NodeId, std::size_t> b_index, c_index;
    for (std::size_t i = 0; i < b_ids.size(); ++i) b_index.emplace(b_ids[i], i);
    for (std::size_t i = 0; i < c_ids.size(); ++i) c_index.emplace(c_ids[i], b_ids.size() + i);

    UnionFind uf(b_ids.size() + c_ids.size());
    for (const auto& [a, _] : f.source.nodes()) uf.unite(b_index.at(f.map.at(a)), c_index.at(g.map.at(a)));

    struct Class {
        std::vector<NodeId> b_members;
        std::vector<NodeId> c_members;
    };
    std::map<std::size_t, Class> classes;
    for (const auto& id : b_ids) classes[uf.find(b_index.at(id))].b_members.push_back(id);
    for (const auto& id : c_ids) classes[uf.find(c_index.at(id))].c_members.push_back(id);

    // Classes touching B are named first so that untouched B nodes keep their names.
    std::vector<const Class*> order;
    for (const auto& [_, cls] : classes)
        if (!cls.b_members.empty()) order.push_back(&cls);
    for (const auto& [_, cls] : classes)
        if (cls.b_members.empty()) order.push_back(&cls);

    Graph q;
    Homomorphism q_b{b, {}, {}};
    Homomorphism q_c{c, {}, {}};
    for (const Class* cls : order) {
        NodeId id = q.fresh_id(cls->b_members.empty() ? join(cls->c_members, "+") : join(cls->b_members, "+"));
        AttrSet a;
        for (const auto& n : cls->b_members) a = attrs::unite(a, b.node_attrs(n));
        for (const auto& n : cls->c_members) a = attrs::unite(a, c.node_attrs(n));
        q.add_node(id, std::move(a));
        for (const auto& n : cls->b_members) q_b.map.emplace(n, id);
        for (const auto& n : cls->c_members) q_c.map.emplace(n, id);
    }
    for (const auto& [e, a] : b.edges()) q.add_edge(q_b.map.at(e.first), q_b.map.at(e.second), a);
    for (const auto& [e, a] : c.edges()) q.add_edge(q_c.map.at(e.first), q_c.map.at(e.second), a);
    q_b.target = q;
    q_c.target = q;
    return {std::move(q), std::move(q_b), std::move(q_c)};
}

SquareResult final_pbc(const Homomorphism& f, const Homomorphism& m) {
    check_valid(f, "final_pbc: rule arrow");
    if (!is_mono(m)) throw Error(ErrorKind::NotMono, "final_pbc: instance is not a mono");
    if (!(f.target == m.source))
        throw Error(ErrorKind::MismatchedEndpoints, "final_pbc: rule arrow does not end at the instance's source");

    const Graph& k_graph = f.source;
    const Graph& l_graph = f.target;
    const Graph& g_graph = m.target;

    std::map<NodeId, NodeId> m_inverse;
    for (const auto& [l, g] : m.map) m_inverse.emplace(g, l);
    std::map<NodeId, std::vector<NodeId>> f_preimage;
    for (const auto& [k, l] : f.map) f_preimage[l].push_back(k);

    Graph d;
    Homomorphism k_arrow{k_graph, {}, {}};
    Homomorphism d_arrow{{}, g_graph, {}};
    // Lifts of each G node into D.
    std::map<NodeId, std::vector<NodeId>> lifts;

    for (const auto& [g, g_attrs] : g_graph.nodes()) {
        auto inv = m_inverse.find(g);
        if (inv == m_inverse.end()) {
            NodeId id = d.fresh_id(g);
            d.add_node(id, g_attrs);
            d_arrow.map.emplace(id, g);
            lifts[g].push_back(id);
            continue;
        }
        const NodeId& l = inv->second;
        auto pre = f_preimage.find(l);
        if (pre == f_preimage.end()) continue;
        const AttrSet& l_attrs = l_graph.node_attrs(l);
        for (const auto& k : pre->second) {
            NodeId id = d.fresh_id(pre->second.size() == 1 ? g : g + "∥" + k);
            AttrSet a = attrs::subtract(g_attrs, attrs::subtract(l_attrs, k_graph.node_attrs(k)));
            d.add_node(id, std::move(a));
            d_arrow.map.emplace(id, g);
            k_arrow.map.emplace(k, id);
            lifts[g].push_back(id);
        }
    }

    std::map<NodeId, NodeId> k_of_copy;
    for (const auto& [k, id] : k_arrow.map) k_of_copy.emplace(id, k);

    for (const auto& [e, e_attrs] : g_graph.edges()) {
        auto src_l = m_inverse.find(e.first);
        auto tgt_l = m_inverse.find(e.second);
        const bool in_image = src_l != m_inverse.end() && tgt_l != m_inverse.end() &&
                              l_graph.has_edge(src_l->second, tgt_l->second);
        for (const auto& u : lifts[e.first]) {
            for (const auto& v : lifts[e.second]) {
                if (!in_image) {
                    d.add_edge(u, v, e_attrs);
                    continue;
                }
                // Both endpoints are copies of matched nodes: the edge survives iff K has it.
                Edge k_edge{k_of_copy.at(u), k_of_copy.at(v)};
                if (!k_graph.has_edge(k_edge)) continue;
                const AttrSet& l_attrs = l_graph.edge_attrs(src_l->second, tgt_l->second);
                d.add_edge(u, v, attrs::subtract(e_attrs, attrs::subtract(l_attrs, k_graph.edge_attrs(k_edge))));
            }
        }
    }
    k_arrow.target = d;
    d_arrow.source = d;
    return {std::move(d), std::move(k_arrow), std::move(d_arrow)};
}

ImageFactorization image_factorization(const Homomorphism& f) {
    check_valid(f, "image_factorization");
    Graph img;
    std::map<NodeId, AttrSet> node_attrs;
    for (const auto& [a, a_attrs] : f.source.nodes()) {
        auto& slot = node_attrs[f.map.at(a)];
        slot = attrs::unite(slot, a_attrs);
    }
    for (auto& [n, a] : node_attrs) img.add_node(n, std::move(a));
    for (const auto& [e, a] : f.source.edges()) img.add_edge(f.map.at(e.first), f.map.at(e.second), a);

    Homomorphism epi{f.source, img, f.map};
    Homomorphism mono{img, f.target, {}};
    for (const auto& [n, _] : img.nodes()) mono.map.emplace(n, n);
    return {std::move(epi), std::move(mono)};
}

Homomorphism pullback_pair(const SquareResult& pb, const Homomorphism& x_a, const Homomorphism& x_b) {
    std::map<std::pair<NodeId, NodeId>, NodeId> by_pair;
    for (const auto& [p, a] : pb.first.map) by_pair.emplace(std::pair{a, pb.second.map.at(p)}, p);
    Homomorphism out{x_a.source, pb.object, {}};
    for (const auto& [x, _] : x_a.source.nodes()) {
        auto it = by_pair.find({x_a(x), x_b(x)});
        if (it == by_pair.end())
            throw Error(ErrorKind::MismatchedEndpoints, "pullback_pair: cone does not commute at '" + x + "'");
        out.map.emplace(x, it->second);
    }
    require_homomorphism(out, "pullback_pair");
    return out;
}

Homomorphism pushout_copair(const SquareResult& po, const Homomorphism& y_b, const Homomorphism& y_c) {
    Homomorphism out{po.object, y_b.target, {}};
    auto assign = [&](const NodeId& q, const NodeId& x) {
        auto [it, inserted] = out.map.emplace(q, x);
        if (!inserted && it->second != x)
            throw Error(ErrorKind::MismatchedEndpoints, "pushout_copair: cocone does not commute at '" + q + "'");
    };
    for (const auto& [b, q] : po.first.map) assign(q, y_b(b));
    for (const auto& [c, q] : po.second.map) assign(q, y_c(c));
    require_homomorphism(out, "pushout_copair");
    return out;
}

Homomorphism final_pbc_mediator(const SquareResult& pbc, const Homomorphism& m, const Homomorphism& c_to_g,
                                const Homomorphism& a_to_c, const Homomorphism& a_to_k) {
    std::set<NodeId> matched;
    for (const auto& [_, g] : m.map) matched.insert(g);
    std::set<NodeId> copies;
    for (const auto& [_, id] : pbc.first.map) copies.insert(id);
    std::map<NodeId, NodeId> kept;
    for (const auto& [id, g] : pbc.second.map)
        if (!copies.count(id)) kept.emplace(g, id);
    std::map<NodeId, NodeId> apex_of;
    for (const auto& [a, c] : a_to_c.map) apex_of.emplace(c, a);

    Homomorphism out{c_to_g.source, pbc.object, {}};
    for (const auto& [c, _] : c_to_g.source.nodes()) {
        const NodeId& g = c_to_g(c);
        if (!matched.count(g)) {
            out.map.emplace(c, kept.at(g));
            continue;
        }
        auto it = apex_of.find(c);
        if (it == apex_of.end())
            throw Error(ErrorKind::MismatchedEndpoints,
                        "final_pbc_mediator: '" + c + "' lies over the match but has no preimage in the apex");
        out.map.emplace(c, pbc.first(a_to_k(it->second)));
    }
    require_homomorphism(out, "final_pbc_mediator");
    return out;
}

} // namespace sqpo
