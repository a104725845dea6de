#include "sqpo/rules.hpp"

#include <algorithm>

namespace sqpo {

Rule Rule::identity(const Graph& g) {
    Homomorphism id = sqpo::identity(g);
    return Rule{g, g, g, id.map, id.map};
}

Rule Rule::expansive(const Homomorphism& r) {
    return Rule{r.source, r.source, r.target, sqpo::identity(r.source).map, r.map};
}

Rule Rule::restrictive(const Homomorphism& r) {
    return Rule{r.target, r.source, r.source, r.map, sqpo::identity(r.source).map};
}

void validate_rule(const Rule& rule) {
    require_homomorphism(rule.left_leg(), "rule left leg");
    require_homomorphism(rule.right_leg(), "rule right leg");
}

namespace {

class RuleBuilder {
public:
    explicit RuleBuilder(const Graph& pattern) : rule_(Rule::identity(pattern)) {}

    void operator()(const AddNode& e) {
        if (rule_.rhs.has_node(e.node)) throw Error(ErrorKind::IdCollision, "add_node: '" + e.node + "' exists");
        rule_.rhs.add_node(e.node, e.attrs);
    }

    void operator()(const AddEdge& e) { rule_.rhs = apply_edit(rule_.rhs, e); }

    void operator()(const DeleteNode& e) {
        require_rhs_node(e.node, "delete_node");
        for (const auto& p : preimages(e.node)) {
            rule_.interface.remove_node(p);
            rule_.left.erase(p);
            rule_.right.erase(p);
        }
        rule_.rhs.remove_node(e.node);
    }

    void operator()(const DeleteEdge& e) {
        rule_.rhs.remove_edge(e.from, e.to);
        for (const auto& u : preimages(e.from))
            for (const auto& v : preimages(e.to))
                if (rule_.interface.has_edge(u, v)) rule_.interface.remove_edge(u, v);
    }

    void operator()(const CloneNode& e) {
        require_rhs_node(e.node, "clone_node");
        if (rule_.rhs.has_node(e.clone)) throw Error(ErrorKind::IdCollision, "clone_node: '" + e.clone + "' exists");
        const auto pre = preimages(e.node);
        if (pre.size() > 1)
            throw Error(ErrorKind::ContradictoryEdits, "clone_node: '" + e.node + "' is the result of a merge");
        rule_.rhs = apply_edit(rule_.rhs, e);
        if (pre.empty()) return;
        const NodeId& p = pre.front();
        NodeId copy = rule_.interface.fresh_id(e.clone);
        rule_.interface = apply_edit(rule_.interface, CloneNode{p, copy});
        rule_.left.emplace(copy, rule_.left.at(p));
        rule_.right.emplace(copy, e.clone);
    }

    void operator()(const MergeNodes& e) {
        rule_.rhs = apply_edit(rule_.rhs, e);
        std::set<NodeId> group(e.nodes.begin(), e.nodes.end());
        for (auto& [_, r] : rule_.right)
            if (group.count(r)) r = e.merged;
    }

    void operator()(const AddAttrs& e) { rule_.rhs = apply_edit(rule_.rhs, e); }

    void operator()(const RemoveAttrs& e) {
        rule_.rhs = apply_edit(rule_.rhs, e);
        Graph& p_graph = rule_.interface;
        if (!e.edge_to) {
            for (const auto& p : preimages(e.node))
                p_graph.set_node_attrs(p, attrs::subtract(p_graph.node_attrs(p), e.attrs));
            return;
        }
        for (const auto& u : preimages(e.node))
            for (const auto& v : preimages(*e.edge_to))
                if (p_graph.has_edge(u, v))
                    p_graph.set_edge_attrs(u, v, attrs::subtract(p_graph.edge_attrs(u, v), e.attrs));
    }

    Rule finish() && { return std::move(rule_); }

private:
    std::vector<NodeId> preimages(const NodeId& r) const {
        std::vector<NodeId> out;
        for (const auto& [p, img] : rule_.right)
            if (img == r) out.push_back(p);
        return out;
    }

    void require_rhs_node(const NodeId& n, std::string_view op) const {
        if (!rule_.rhs.has_node(n))
            throw Error(ErrorKind::UnknownElement, std::string(op) + ": node '" + n + "' does not exist");
    }

    Rule rule_;
};

} // namespace

Rule build_rule(const Graph& pattern, const std::vector<Edit>& edits) {
    RuleBuilder builder(pattern);
    for (const auto& e : edits) std::visit(builder, e);
    Rule rule = std::move(builder).finish();
    validate_rule(rule);
    return rule;
}

namespace {

class HomSearch {
public:
    HomSearch(const Graph& pattern, const Graph& target, const std::map<NodeId, std::set<NodeId>>& allowed,
              bool injective, std::size_t limit)
        : pattern_(pattern), target_(target), allowed_(allowed), injective_(injective), limit_(limit),
          order_(pattern.node_ids()), candidates_(target.node_ids()) {}

    std::vector<Homomorphism> run() {
        for (const auto& [p, ts] : allowed_) {
            if (!pattern_.has_node(p)) return {};
            for (const auto& t : ts)
                if (!target_.has_node(t)) return {};
        }
        extend(0);
        return std::move(found_);
    }

private:
    bool compatible(const NodeId& p, const NodeId& t) const {
        if (injective_ && used_.count(t)) return false;
        if (!attrs::subset(pattern_.node_attrs(p), target_.node_attrs(t))) return false;
        auto edge_ok = [&](const Edge& pe, const Edge& te) {
            if (!pattern_.has_edge(pe)) return true;
            return target_.has_edge(te) && attrs::subset(pattern_.edge_attrs(pe), target_.edge_attrs(te));
        };
        if (!edge_ok({p, p}, {t, t})) return false;
        for (const auto& [q, u] : assignment_) {
            if (!edge_ok({p, q}, {t, u}) || !edge_ok({q, p}, {u, t})) return false;
        }
        return true;
    }

    bool done() const { return limit_ && found_.size() >= limit_; }

    void extend(std::size_t depth) {
        if (done()) return;
        if (depth == order_.size()) {
            found_.push_back(Homomorphism{pattern_, target_, assignment_});
            return;
        }
        const NodeId& p = order_[depth];
        auto try_candidate = [&](const NodeId& t) {
            if (done() || !compatible(p, t)) return;
            assignment_.emplace(p, t);
            used_.insert(t);
            extend(depth + 1);
            used_.erase(used_.find(t));
            assignment_.erase(p);
        };
        if (auto it = allowed_.find(p); it != allowed_.end()) {
            for (const auto& t : it->second) try_candidate(t);
            return;
        }
        for (const auto& t : candidates_) try_candidate(t);
    }

    const Graph& pattern_;
    const Graph& target_;
    const std::map<NodeId, std::set<NodeId>>& allowed_;
    bool injective_;
    std::size_t limit_;
    std::vector<NodeId> order_;
    std::vector<NodeId> candidates_;
    NodeMap assignment_;
    std::multiset<NodeId> used_;
    std::vector<Homomorphism> found_;
};

} // namespace

std::vector<Homomorphism> find_monomorphisms(const Graph& pattern, const Graph& target, const NodeMap& anchors) {
    std::map<NodeId, std::set<NodeId>> allowed;
    for (const auto& [p, t] : anchors) allowed[p] = {t};
    return HomSearch(pattern, target, allowed, true, 0).run();
}

std::vector<Homomorphism> find_homomorphisms(const Graph& pattern, const Graph& target,
                                             const std::map<NodeId, std::set<NodeId>>& allowed, bool injective,
                                             std::size_t limit) {
    return HomSearch(pattern, target, allowed, injective, limit).run();
}

std::vector<Match> find_matches(const Rule& rule, const Graph& g, MatchKind kind, const NodeMap& anchors) {
    const Graph& pattern = kind == MatchKind::Restrictive ? rule.lhs : rule.interface;
    std::vector<Match> out;
    for (auto& h : find_monomorphisms(pattern, g, anchors)) out.push_back(Match{std::move(h), kind});
    return out;
}

RewriteResult sqpo_rewrite(const Rule& rule, const Homomorphism& match) {
    validate_rule(rule);
    if (!(match.source == rule.lhs))
        throw Error(ErrorKind::MismatchedEndpoints, "sqpo_rewrite: match does not start at the rule's lhs");
    SquareResult pbc = final_pbc(rule.left_leg(), match);
    SquareResult po = pushout(pbc.first, rule.right_leg());
    return RewriteResult{pbc.object,   std::move(pbc.second), std::move(pbc.first),
                         po.object,    std::move(po.first),   std::move(po.second)};
}

} // namespace sqpo
