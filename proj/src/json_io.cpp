#include "sqpo/json_io.hpp"

#include <fstream>
#include <sstream>

namespace sqpo::json_io {

namespace {

[[noreturn]] void parse_error(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) parse_error(std::string("expected an object with '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) parse_error(std::string("missing field '") + key + "'");
    return *it;
}

std::string text(const Json& j, const char* what) {
    if (!j.is_string()) parse_error(std::string(what) + " must be a string");
    return j.get<std::string>();
}

std::string text_field(const Json& j, const char* key) { return text(field(j, key), key); }

Json attr_value(const AttrValue& v) {
    return std::visit([](const auto& x) { return Json(x); }, v);
}

AttrValue attr_value_from(const Json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_string()) return j.get<std::string>();
    parse_error("attribute values must be booleans, integers or strings");
}

Json attrs_field(const Json& j) {
    auto it = j.find("attrs");
    return it == j.end() ? Json::object() : *it;
}

/// The mid typing may also be stored under the direction-neutral key.
const Json& mid_typing(const Json& f, const char* key) {
    if (f.is_object() && !f.contains(key) && f.contains("typing_or_retyping")) return f.at("typing_or_retyping");
    return field(f, key);
}

Json arrows_to_json(const std::map<ShapeEdge, NodeMap>& arrows) {
    Json out = Json::array();
    for (const auto& [e, m] : arrows) out.push_back({{"from", e.first}, {"to", e.second}, {"map", map_to_json(m)}});
    return out;
}

} // namespace

Json attrs_to_json(const AttrSet& a) {
    Json out = Json::object();
    for (const auto& [k, values] : a) {
        Json arr = Json::array();
        for (const auto& v : values) arr.push_back(attr_value(v));
        out[k] = std::move(arr);
    }
    return out;
}

AttrSet attrs_from_json(const Json& j) {
    if (!j.is_object()) parse_error("attributes must be an object");
    AttrSet out;
    for (const auto& [k, values] : j.items()) {
        if (!values.is_array()) parse_error("attribute '" + k + "' must be a list of values");
        if (values.empty()) parse_error("attribute '" + k + "' has no values");
        for (const auto& v : values) out[k].insert(attr_value_from(v));
    }
    return out;
}

Json graph_to_json(const Graph& g) {
    Json nodes = Json::array();
    for (const auto& [n, a] : g.nodes()) nodes.push_back({{"id", n}, {"attrs", attrs_to_json(a)}});
    Json edges = Json::array();
    for (const auto& [e, a] : g.edges())
        edges.push_back({{"from", e.first}, {"to", e.second}, {"attrs", attrs_to_json(a)}});
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

Graph graph_from_json(const Json& j) {
    const Json& nodes = field(j, "nodes");
    if (!nodes.is_array()) parse_error("'nodes' must be a list");
    std::map<NodeId, AttrSet> ns;
    for (const auto& n : nodes) {
        NodeId id = text_field(n, "id");
        if (!ns.emplace(id, attrs_from_json(attrs_field(n))).second) parse_error("duplicate node '" + id + "'");
    }
    std::map<Edge, AttrSet> es;
    if (auto it = j.find("edges"); it != j.end()) {
        if (!it->is_array()) parse_error("'edges' must be a list");
        for (const auto& e : *it) {
            Edge key{text_field(e, "from"), text_field(e, "to")};
            if (!es.emplace(key, attrs_from_json(attrs_field(e))).second)
                parse_error("duplicate edge " + key.first + "->" + key.second);
        }
    }
    Graph g = Graph::from_parts(std::move(ns), std::move(es));
    if (auto v = validate_graph(g); !v.empty()) parse_error(v.front().element + ": " + v.front().message);
    return g;
}

Json map_to_json(const NodeMap& m) {
    Json out = Json::object();
    for (const auto& [x, y] : m) out[x] = y;
    return out;
}

NodeMap map_from_json(const Json& j) {
    if (!j.is_object()) parse_error("node maps must be objects");
    NodeMap out;
    for (const auto& [x, y] : j.items()) out.emplace(x, text(y, "node map targets"));
    return out;
}

Json rule_to_json(const Rule& r) {
    return {{"lhs", graph_to_json(r.lhs)},
            {"interface", graph_to_json(r.interface)},
            {"rhs", graph_to_json(r.rhs)},
            {"left", map_to_json(r.left)},
            {"right", map_to_json(r.right)}};
}

Edit edit_from_json(const Json& j) {
    const std::string op = text_field(j, "op");
    auto edge_to = [&]() -> std::optional<NodeId> {
        if (auto it = j.find("edge_to"); it != j.end()) return text(*it, "edge_to");
        return std::nullopt;
    };
    if (op == "add_node") return AddNode{text_field(j, "node"), attrs_from_json(attrs_field(j))};
    if (op == "add_edge") return AddEdge{text_field(j, "from"), text_field(j, "to"), attrs_from_json(attrs_field(j))};
    if (op == "delete_node") return DeleteNode{text_field(j, "node")};
    if (op == "delete_edge") return DeleteEdge{text_field(j, "from"), text_field(j, "to")};
    if (op == "clone_node") return CloneNode{text_field(j, "node"), text_field(j, "clone")};
    if (op == "merge_nodes") {
        const Json& nodes = field(j, "nodes");
        if (!nodes.is_array()) parse_error("'nodes' must be a list");
        std::vector<NodeId> ns;
        for (const auto& n : nodes) ns.push_back(text(n, "merged node"));
        return MergeNodes{std::move(ns), text_field(j, "merged")};
    }
    if (op == "add_attrs") return AddAttrs{text_field(j, "node"), edge_to(), attrs_from_json(attrs_field(j))};
    if (op == "remove_attrs") return RemoveAttrs{text_field(j, "node"), edge_to(), attrs_from_json(attrs_field(j))};
    parse_error("unknown edit '" + op + "'");
}

Rule rule_from_json(const Json& j) {
    if (j.is_object() && j.contains("pattern")) {
        std::vector<Edit> edits;
        if (auto it = j.find("edits"); it != j.end()) {
            if (!it->is_array()) parse_error("'edits' must be a list");
            for (const auto& e : *it) edits.push_back(edit_from_json(e));
        }
        return build_rule(graph_from_json(j.at("pattern")), edits);
    }
    Rule r{graph_from_json(field(j, "lhs")), graph_from_json(field(j, "interface")), graph_from_json(field(j, "rhs")),
           map_from_json(field(j, "left")), map_from_json(field(j, "right"))};
    validate_rule(r);
    return r;
}

Json hierarchy_to_json(const Hierarchy& h) {
    Json graphs = Json::object();
    for (const auto& [name, g] : h.objects()) graphs[name] = graph_to_json(g);
    Json out{{"graphs", std::move(graphs)}, {"typings", arrows_to_json(h.typings())}};
    if (const auto& s = h.skeleton()) {
        Json edges = Json::array();
        for (const auto& [a, b] : s->edges) edges.push_back({a, b});
        Json assignment = Json::object();
        for (const auto& [o, k] : h.skeleton_assignment()) assignment[o] = k;
        out["skeleton"] = {{"nodes", s->nodes}, {"edges", std::move(edges)}, {"assignment", std::move(assignment)}};
    }
    return out;
}

Hierarchy hierarchy_from_json(const Json& j, bool checked) {
    const Json& objects = field(j, "graphs");
    if (!objects.is_object()) parse_error("'graphs' must be an object");
    std::map<ObjectName, Graph> graphs;
    for (const auto& [name, g] : objects.items()) graphs.emplace(name, graph_from_json(g));
    std::vector<std::pair<ShapeEdge, NodeMap>> arrows;
    if (auto it = j.find("typings"); it != j.end()) {
        if (!it->is_array()) parse_error("'typings' must be a list");
        for (const auto& t : *it)
            arrows.emplace_back(ShapeEdge{text_field(t, "from"), text_field(t, "to")}, map_from_json(field(t, "map")));
    }
    Hierarchy h;
    if (checked) {
        for (auto& [name, g] : graphs) h.add_object(name, std::move(g));
        for (auto& [e, m] : arrows) h.add_typing(e.first, e.second, std::move(m));
    } else {
        std::map<ShapeEdge, NodeMap> typings;
        for (auto& [e, m] : arrows)
            if (!typings.emplace(e, std::move(m)).second) parse_error("duplicate typing " + e.first + "->" + e.second);
        h = Hierarchy::from_parts(std::move(graphs), std::move(typings));
    }
    if (auto it = j.find("skeleton"); it != j.end()) {
        Skeleton s;
        for (const auto& n : field(*it, "nodes")) s.nodes.insert(text(n, "skeleton node"));
        for (const auto& e : field(*it, "edges")) {
            if (!e.is_array() || e.size() != 2) parse_error("skeleton edges must be pairs");
            s.edges.emplace(text(e[0], "skeleton node"), text(e[1], "skeleton node"));
        }
        std::map<ObjectName, std::string> assignment;
        for (const auto& [o, k] : field(*it, "assignment").items()) assignment.emplace(o, text(k, "skeleton node"));
        h.set_skeleton(std::move(s), std::move(assignment));
    }
    return h;
}

Json plan_to_json(const PropagationPlan& p) {
    Json factorizations = Json::object();
    for (const auto& [n, f] : p.forward)
        factorizations[n] = {{"mid", graph_to_json(f.mid())},
                             {"pre", map_to_json(f.pre_arrow.map)},
                             {"post", map_to_json(f.post_arrow.map)},
                             {"typing", map_to_json(f.typing.map)}};
    for (const auto& [n, f] : p.backward)
        factorizations[n] = {{"mid", graph_to_json(f.mid())},
                             {"pre", map_to_json(f.pre_arrow.map)},
                             {"post", map_to_json(f.post_arrow.map)},
                             {"retyping", map_to_json(f.retyping.map)}};
    std::map<ShapeEdge, NodeMap> connectors;
    for (const auto& [e, l] : p.connectors) connectors.emplace(e, l.map);
    return {{"direction", std::string(to_string(p.direction))},
            {"origin", p.origin},
            {"rule", rule_to_json(p.rule)},
            {"match", map_to_json(p.match.map)},
            {"factorizations", std::move(factorizations)},
            {"connectors", arrows_to_json(connectors)}};
}

PropagationPlan plan_from_json(const Json& j, const Hierarchy& h, const std::optional<Rule>& rule,
                               const std::optional<NodeMap>& match) {
    PropagationPlan p;
    const std::string dir = text_field(j, "direction");
    if (dir == "forward")
        p.direction = Direction::Forward;
    else if (dir == "backward")
        p.direction = Direction::Backward;
    else
        parse_error("direction must be 'forward' or 'backward'");
    p.origin = text_field(j, "origin");
    p.rule = rule ? *rule : rule_from_json(field(j, "rule"));
    const Graph& origin = h.object(p.origin);
    p.match = Homomorphism{p.rule.lhs, origin, match ? *match : map_from_json(field(j, "match"))};

    auto [r, m] = directed_rule(p);
    const bool forward = p.direction == Direction::Forward;
    std::map<ObjectName, Graph> mids;
    if (auto it = j.find("factorizations"); it != j.end()) {
        for (const auto& [n, f] : it->items()) {
            Graph mid = graph_from_json(field(f, "mid"));
            NodeMap pre = map_from_json(field(f, "pre"));
            NodeMap post = map_from_json(field(f, "post"));
            if (forward) {
                p.forward.emplace(n, ForwardFactorization{Homomorphism{m.source, mid, std::move(pre)},
                                                          Homomorphism{mid, r.target, std::move(post)},
                                                          Homomorphism{mid, h.object(n), map_from_json(mid_typing(f, "typing"))}});
            } else {
                Restriction restriction = restriction_pullback(composed_typing(h, n, p.origin), m);
                p.backward.emplace(n, BackwardFactorization{Homomorphism{mid, r.target, std::move(post)},
                                                            Homomorphism{r.source, mid, std::move(pre)},
                                                            Homomorphism{restriction.graph, mid,
                                                                         map_from_json(mid_typing(f, "retyping"))}});
            }
            mids.emplace(n, std::move(mid));
        }
    }
    if (auto it = j.find("connectors"); it != j.end()) {
        for (const auto& c : *it) {
            ObjectName a = text_field(c, "from");
            ObjectName b = text_field(c, "to");
            if (!mids.count(a) || !mids.count(b))
                parse_error("connector " + a + "->" + b + " joins objects without a factorization");
            p.connectors.emplace(ShapeEdge{a, b}, Homomorphism{mids.at(a), mids.at(b), map_from_json(field(c, "map"))});
        }
    }
    return p;
}

RelationSpec relation_from_json(const Json& j) {
    RelationSpec out;
    if (!j.is_object()) parse_error("a relation file must be an object");
    if (auto it = j.find("relations"); it != j.end()) {
        if (!it->is_object()) parse_error("'relations' must map object names to maps");
        for (const auto& [n, m] : it->items()) out.typing.emplace(n, map_from_json(m));
    }
    if (auto it = j.find("same_type"); it != j.end()) {
        if (!it->is_object()) parse_error("'same_type' must map object names to groups");
        for (const auto& [n, groups] : it->items()) {
            if (!groups.is_array()) parse_error("'same_type' entries must be lists of groups");
            auto& dst = out.same_type[n];
            for (const auto& g : groups) {
                if (!g.is_array()) parse_error("a same-type group must be a list");
                std::set<NodeId> group;
                for (const auto& e : g) group.insert(text(e, "same-type element"));
                dst.push_back(std::move(group));
            }
        }
    }
    return out;
}

Json relation_to_json(const RelationSpec& r) {
    Json relations = Json::object();
    for (const auto& [n, m] : r.typing) relations[n] = map_to_json(m);
    Json same = Json::object();
    for (const auto& [n, groups] : r.same_type) {
        Json arr = Json::array();
        for (const auto& g : groups) arr.push_back(g);
        same[n] = std::move(arr);
    }
    // Empty sections are left out, as in hand-written relation files.
    Json out = Json::object();
    if (!relations.empty()) out["relations"] = std::move(relations);
    if (!same.empty()) out["same_type"] = std::move(same);
    return out;
}

Json report_to_json(const RewriteReport& r) {
    Json updates = Json::object();
    for (const auto& [n, u] : r.updates) {
        Json entry{{"trace", map_to_json(u.trace.map)}, {"anchor", map_to_json(u.anchor.map)}};
        if (u.aux) entry["aux"] = map_to_json(u.aux->map);
        updates[n] = std::move(entry);
    }
    return {{"direction", std::string(to_string(r.direction))},
            {"origin", r.origin},
            {"waves", r.waves},
            {"updates", std::move(updates)},
            {"arrows", arrows_to_json(r.arrows)},
            {"warnings", r.warnings}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << dump(j);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
}

} // namespace sqpo::json_io
