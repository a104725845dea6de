#include "sqpo/hierarchy.hpp"

#include <algorithm>
#include <functional>

namespace sqpo {

namespace {

std::string render_path(const std::vector<ObjectName>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += '>';
        out += path[i];
    }
    return out;
}

bool skeleton_acyclic(const Skeleton& s) {
    std::map<std::string, int> state;
    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
        state[n] = 1;
        for (const auto& [u, v] : s.edges) {
            if (u != n) continue;
            if (state[v] == 1) return false;
            if (state[v] == 0 && !visit(v)) return false;
        }
        state[n] = 2;
        return true;
    };
    for (const auto& n : s.nodes)
        if (state[n] == 0 && !visit(n)) return false;
    return true;
}

} // namespace

std::string CommutativityViolation::describe() const {
    return "PAIR " + from + " " + to + ": " + render_path(path1) + " != " + render_path(path2) + " at node " + node;
}

std::set<ObjectName> SubHierarchy::sources() const {
    std::set<ObjectName> out = nodes;
    for (const auto& [_, v] : edges) out.erase(v);
    return out;
}

std::set<ObjectName> SubHierarchy::sinks() const {
    std::set<ObjectName> out = nodes;
    for (const auto& [u, _] : edges) out.erase(u);
    return out;
}

Hierarchy Hierarchy::from_parts(std::map<ObjectName, Graph> objects, std::map<ShapeEdge, NodeMap> typings) {
    Hierarchy h;
    h.objects_ = std::move(objects);
    h.typings_ = std::move(typings);
    return h;
}

void Hierarchy::add_object(const ObjectName& name, Graph g) {
    if (has_object(name)) throw Error(ErrorKind::IdCollision, "object '" + name + "' already exists");
    if (auto v = validate_graph(g); !v.empty())
        throw Error(ErrorKind::InvalidHomomorphism, "object '" + name + "' is not a valid graph: " + v.front().message);
    objects_.emplace(name, std::move(g));
}

void Hierarchy::add_typing(const ObjectName& a, const ObjectName& b, NodeMap map) {
    if (!has_object(a)) throw Error(ErrorKind::UnknownElement, "object '" + a + "'");
    if (!has_object(b)) throw Error(ErrorKind::UnknownElement, "object '" + b + "'");
    if (has_typing(a, b)) throw Error(ErrorKind::IdCollision, "typing " + a + "->" + b + " already exists");
    if (a == b || reachable(b, a)) throw Error(ErrorKind::CycleIntroduced, "typing " + a + "->" + b);
    require_homomorphism(Homomorphism{objects_.at(a), objects_.at(b), map}, "typing " + a + "->" + b);
    if (skeleton_ && !skeleton_->edges.count({skeleton_assignment_.at(a), skeleton_assignment_.at(b)}))
        throw Error(ErrorKind::InvalidHomomorphism, "typing " + a + "->" + b + " has no skeleton edge");

    typings_.emplace(ShapeEdge{a, b}, std::move(map));
    auto violations = validate_commutativity(*this);
    if (!violations.empty()) {
        typings_.erase({a, b});
        throw Error(ErrorKind::CommutativityViolated, violations.front().describe());
    }
}

void Hierarchy::set_skeleton(Skeleton skeleton, std::map<ObjectName, std::string> assignment) {
    if (!skeleton_acyclic(skeleton)) throw Error(ErrorKind::CycleIntroduced, "skeleton is not acyclic");
    for (const auto& [name, _] : objects_) {
        auto it = assignment.find(name);
        if (it == assignment.end() || !skeleton.nodes.count(it->second))
            throw Error(ErrorKind::InvalidHomomorphism, "object '" + name + "' has no skeleton node");
    }
    for (const auto& [e, _] : typings_)
        if (!skeleton.edges.count({assignment.at(e.first), assignment.at(e.second)}))
            throw Error(ErrorKind::InvalidHomomorphism, "typing " + e.first + "->" + e.second + " has no skeleton edge");
    skeleton_ = std::move(skeleton);
    skeleton_assignment_ = std::move(assignment);
}

const Graph& Hierarchy::object(const ObjectName& n) const {
    auto it = objects_.find(n);
    if (it == objects_.end()) throw Error(ErrorKind::UnknownElement, "object '" + n + "'");
    return it->second;
}

const NodeMap& Hierarchy::typing_map(const ObjectName& a, const ObjectName& b) const {
    auto it = typings_.find({a, b});
    if (it == typings_.end()) throw Error(ErrorKind::UnknownElement, "typing " + a + "->" + b);
    return it->second;
}

Homomorphism Hierarchy::typing(const ObjectName& a, const ObjectName& b) const {
    return Homomorphism{object(a), object(b), typing_map(a, b)};
}

std::vector<ObjectName> Hierarchy::successors(const ObjectName& n) const {
    std::vector<ObjectName> out;
    for (const auto& [e, _] : typings_)
        if (e.first == n) out.push_back(e.second);
    return out;
}

std::vector<ObjectName> Hierarchy::predecessors(const ObjectName& n) const {
    std::vector<ObjectName> out;
    for (const auto& [e, _] : typings_)
        if (e.second == n) out.push_back(e.first);
    return out;
}

void Hierarchy::replace_object(const ObjectName& name, Graph g, const std::map<ShapeEdge, NodeMap>& incident) {
    if (!has_object(name)) throw Error(ErrorKind::UnknownElement, "object '" + name + "'");
    for (const auto& [e, _] : typings_) {
        if ((e.first == name || e.second == name) && !incident.count(e))
            throw Error(ErrorKind::UnknownElement, "replace_object: missing arrow " + e.first + "->" + e.second);
    }
    objects_[name] = std::move(g);
    for (const auto& [e, map] : incident) {
        auto it = typings_.find(e);
        if (it == typings_.end()) throw Error(ErrorKind::UnknownElement, "typing " + e.first + "->" + e.second);
        it->second = map;
    }
}

bool Hierarchy::reachable(const ObjectName& from, const ObjectName& to) const {
    std::set<ObjectName> seen{from};
    std::vector<ObjectName> stack{from};
    while (!stack.empty()) {
        ObjectName n = stack.back();
        stack.pop_back();
        if (n == to) return true;
        for (const auto& s : successors(n))
            if (seen.insert(s).second) stack.push_back(s);
    }
    return false;
}

std::vector<CommutativityViolation> validate_commutativity(const Hierarchy& h) {
    struct Composite {
        NodeMap map;
        std::vector<ObjectName> path;
    };
    // For each object, one representative composite per reachable object.
    std::map<ObjectName, std::map<ObjectName, Composite>> memo;
    std::vector<CommutativityViolation> out;

    std::function<const std::map<ObjectName, Composite>&(const ObjectName&)> visit =
        [&](const ObjectName& a) -> const std::map<ObjectName, Composite>& {
        if (auto it = memo.find(a); it != memo.end()) return it->second;
        std::map<ObjectName, Composite> reach;
        auto record = [&](const ObjectName& b, Composite c) {
            auto [it, inserted] = reach.emplace(b, c);
            if (inserted || it->second.map == c.map) return;
            NodeId node;
            for (const auto& [x, y] : it->second.map) {
                if (c.map.at(x) != y) {
                    node = x;
                    break;
                }
            }
            out.push_back({a, b, it->second.path, std::move(c.path), node});
        };
        for (const auto& s : h.successors(a)) {
            const NodeMap& step = h.typing_map(a, s);
            record(s, {step, {a, s}});
            for (const auto& [b, tail] : visit(s)) {
                Composite c;
                for (const auto& [x, y] : step) c.map.emplace(x, tail.map.at(y));
                c.path.push_back(a);
                c.path.insert(c.path.end(), tail.path.begin(), tail.path.end());
                record(b, std::move(c));
            }
        }
        return memo.emplace(a, std::move(reach)).first->second;
    };
    for (const auto& [name, _] : h.objects()) visit(name);
    return out;
}

std::vector<std::string> validate_structure(const Hierarchy& h) {
    std::vector<std::string> out;
    for (const auto& [name, g] : h.objects())
        for (const auto& v : validate_graph(g)) out.push_back("object " + name + ": " + v.element + ": " + v.message);
    Skeleton shape;
    for (const auto& [name, _] : h.objects()) shape.nodes.insert(name);
    for (const auto& [e, map] : h.typings()) {
        const std::string arrow = "typing " + e.first + "->" + e.second;
        if (!h.has_object(e.first) || !h.has_object(e.second)) {
            out.push_back(arrow + ": unknown object");
            continue;
        }
        shape.edges.insert(e);
        if (auto defect = homomorphism_defect(Homomorphism{h.object(e.first), h.object(e.second), map}))
            out.push_back(arrow + ": " + *defect);
    }
    if (!skeleton_acyclic(shape)) out.push_back("typings form a cycle");
    if (const auto& s = h.skeleton()) {
        for (const auto& [e, _] : h.typings()) {
            auto a = h.skeleton_assignment().find(e.first);
            auto b = h.skeleton_assignment().find(e.second);
            if (a == h.skeleton_assignment().end() || b == h.skeleton_assignment().end() ||
                !s->edges.count({a->second, b->second}))
                out.push_back("typing " + e.first + "->" + e.second + ": no skeleton edge");
        }
    }
    return out;
}

namespace {

SubHierarchy closure(const Hierarchy& h, const ObjectName& s, bool forward) {
    if (!h.has_object(s)) throw Error(ErrorKind::UnknownElement, "object '" + s + "'");
    SubHierarchy sub{s, {s}, {}};
    std::vector<ObjectName> stack{s};
    while (!stack.empty()) {
        ObjectName n = stack.back();
        stack.pop_back();
        for (const auto& next : forward ? h.successors(n) : h.predecessors(n))
            if (sub.nodes.insert(next).second) stack.push_back(next);
    }
    for (const auto& [e, _] : h.typings())
        if (sub.contains(e.first) && sub.contains(e.second)) sub.edges.insert(e);
    return sub;
}

} // namespace

SubHierarchy forward_subgraph(const Hierarchy& h, const ObjectName& s) { return closure(h, s, true); }

SubHierarchy backward_subgraph(const Hierarchy& h, const ObjectName& s) { return closure(h, s, false); }

Homomorphism composed_typing(const Hierarchy& h, const ObjectName& a, const ObjectName& b) {
    if (a == b) return identity(h.object(a));
    // Depth-first search for any path; commutativity makes the choice irrelevant.
    std::map<ObjectName, ObjectName> parent;
    std::vector<ObjectName> stack{a};
    std::set<ObjectName> seen{a};
    while (!stack.empty() && !seen.count(b)) {
        ObjectName n = stack.back();
        stack.pop_back();
        for (const auto& s : h.successors(n)) {
            if (seen.insert(s).second) {
                parent[s] = n;
                stack.push_back(s);
            }
        }
    }
    if (!seen.count(b)) throw Error(ErrorKind::NoPath, "no path from '" + a + "' to '" + b + "'");
    std::vector<ObjectName> path{b};
    while (path.back() != a) path.push_back(parent.at(path.back()));
    std::reverse(path.begin(), path.end());
    Homomorphism out = h.typing(path[0], path[1]);
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const NodeMap& step = h.typing_map(path[i], path[i + 1]);
        for (auto& [_, y] : out.map) y = step.at(y);
    }
    out.target = h.object(b);
    return out;
}

std::vector<std::vector<ObjectName>> waves(const SubHierarchy& sub, bool sinks_first) {
    std::set<ObjectName> remaining = sub.nodes;
    std::vector<std::vector<ObjectName>> out;
    while (!remaining.empty()) {
        std::vector<ObjectName> wave;
        for (const auto& n : remaining) {
            bool blocked = false;
            for (const auto& [u, v] : sub.edges) {
                const ObjectName& other = sinks_first ? v : u;
                const ObjectName& self = sinks_first ? u : v;
                if (self == n && remaining.count(other)) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) wave.push_back(n);
        }
        for (const auto& n : wave) remaining.erase(n);
        out.push_back(std::move(wave));
    }
    return out;
}

} // namespace sqpo
