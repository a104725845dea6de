#include "sqpo/propagation.hpp"

#include <algorithm>

namespace sqpo {

namespace {

void require_same(const Graph& a, const Graph& b, const std::string& what) {
    if (!(a == b)) throw Error(ErrorKind::MismatchedEndpoints, what);
}

std::set<NodeId> image_of(const Homomorphism& f) {
    std::set<NodeId> out;
    for (const auto& [_, y] : f.map) out.insert(y);
    return out;
}

} // namespace

ForwardFactorization canonical_forward_factorization(const Homomorphism& rule, const Homomorphism& lhs_typing) {
    require_same(rule.source, lhs_typing.source, "canonical factorization: rule and typing start at different graphs");
    return ForwardFactorization{identity(rule.source), rule, lhs_typing};
}

BackwardFactorization canonical_backward_factorization(const Homomorphism& rule,
                                                       const Homomorphism& restriction_typing) {
    require_same(rule.target, restriction_typing.target,
                 "canonical factorization: rule and restriction end at different graphs");
    return BackwardFactorization{identity(rule.target), rule, restriction_typing};
}

ForwardStrictResult forward_strict(const Homomorphism& typing, const Homomorphism& pre_arrow,
                                   const Homomorphism& match, const Homomorphism& lhs_typing) {
    require_same(typing.source, match.target, "forward_strict: match does not land in the typed graph");
    require_same(pre_arrow.source, match.source, "forward_strict: rule and match start at different graphs");
    require_same(lhs_typing.source, pre_arrow.target, "forward_strict: typing does not start at the mid graph");
    require_same(lhs_typing.target, typing.target, "forward_strict: typing does not land in the type graph");
    if (!hom_equal(compose(lhs_typing, pre_arrow), compose(typing, match)))
        throw Error(ErrorKind::FactorizationViolated, "typing of the mid graph does not extend the match typing");
    SquareResult po = pushout(match, pre_arrow);
    Homomorphism h = pushout_copair(po, typing, lhs_typing);
    return ForwardStrictResult{po.object, std::move(po.first), std::move(po.second), std::move(h)};
}

RuleProjection project_rule(const Homomorphism& post_arrow, const Homomorphism& mid_typing) {
    require_same(post_arrow.source, mid_typing.source, "project_rule: rule and typing start at different graphs");
    ImageFactorization image = image_factorization(mid_typing);
    SquareResult rule = pushout(image.epi, post_arrow);
    return RuleProjection{std::move(image), std::move(rule)};
}

SquareResult apply_projection(const RuleProjection& projection) {
    return pushout(projection.image.mono, projection.rule.first);
}

ForwardCanonicalResult forward_canonical(const Homomorphism& strict_typing, const Homomorphism& post_arrow,
                                         const Homomorphism& strict_match) {
    require_same(strict_typing.source, strict_match.target, "forward_canonical: match does not land in the typed graph");
    RuleProjection projection = project_rule(post_arrow, compose(strict_typing, strict_match));
    SquareResult graph_po = pushout(strict_match, post_arrow);
    SquareResult type_po = apply_projection(projection);
    Homomorphism typing = pushout_copair(graph_po, compose(type_po.first, strict_typing),
                                         compose(type_po.second, projection.rule.second));
    return ForwardCanonicalResult{graph_po.object,       std::move(graph_po.first), std::move(graph_po.second),
                                  type_po.object,        std::move(type_po.first),  std::move(typing)};
}

ForwardCleanupResult forward_cleanup(const Homomorphism& projected_match, const Homomorphism& cleanup,
                                     const Homomorphism& typing) {
    if (!is_epi(cleanup)) throw Error(ErrorKind::NotEpi, "forward clean-up must be surjective");
    require_same(projected_match.target, typing.target, "forward_cleanup: typing does not land in the type graph");
    SquareResult po = pushout(projected_match, cleanup);
    Homomorphism h = compose(po.first, typing);
    return ForwardCleanupResult{po.object, std::move(po.first), std::move(po.second), std::move(h)};
}

Restriction restriction_pullback(const Homomorphism& typing, const Homomorphism& match) {
    if (!is_mono(match)) throw Error(ErrorKind::NotMono, "restriction: the match must be injective");
    SquareResult pb = pullback(typing, match);
    return Restriction{pb.object, std::move(pb.first), std::move(pb.second)};
}

BackwardStrictResult backward_strict(const Homomorphism& match, const Homomorphism& post_arrow,
                                     const Homomorphism& retyping, const Homomorphism& typing,
                                     const Restriction& restriction) {
    require_same(post_arrow.target, match.source, "backward_strict: rule does not end at the matched graph");
    require_same(retyping.source, restriction.graph, "backward_strict: retyping does not start at the restriction");
    require_same(retyping.target, post_arrow.source, "backward_strict: retyping does not land in the mid graph");
    const std::set<NodeId> kept = image_of(post_arrow);
    for (const auto& [y, l] : restriction.typing.map) {
        if (!kept.count(l))
            throw Error(ErrorKind::InstanceOfDeletedElement,
                        "'" + restriction.instance(y) + "' is typed by '" + l + "', which the strict part deletes");
    }
    if (!hom_equal(compose(post_arrow, retyping), restriction.typing))
        throw Error(ErrorKind::FactorizationViolated, "retyping does not refine the restricted typing");
    SquareResult pbc = final_pbc(post_arrow, match);
    Homomorphism h = final_pbc_mediator(pbc, match, typing, restriction.instance, retyping);
    return BackwardStrictResult{pbc.object, pbc.second, pbc.first, std::move(h), pbc};
}

LiftResult lift_rule(const Homomorphism& retyping, const Homomorphism& pre_arrow, const Homomorphism& instance) {
    SquareResult rule = pullback(retyping, pre_arrow);
    SquareResult pbc = final_pbc(rule.first, instance);
    return LiftResult{std::move(rule), pbc.object, std::move(pbc.first), std::move(pbc.second)};
}

Homomorphism lifted_typing(const LiftResult& lift, const Homomorphism& strict_typing,
                           const Homomorphism& strict_match, const SquareResult& type_pbc) {
    return final_pbc_mediator(type_pbc, strict_match, compose(strict_typing, lift.trace), lift.instance,
                              lift.lifted_typing());
}

BackwardCanonicalResult backward_canonical(const Homomorphism& strict_typing, const Homomorphism& pre_arrow,
                                           const Homomorphism& strict_match) {
    SquareResult type_pbc = final_pbc(pre_arrow, strict_match);
    Restriction restriction = restriction_pullback(strict_typing, strict_match);
    LiftResult lift = lift_rule(restriction.typing, pre_arrow, restriction.instance);
    Homomorphism h = lifted_typing(lift, strict_typing, strict_match, type_pbc);
    return BackwardCanonicalResult{type_pbc.object, type_pbc.second, type_pbc.first, lift.graph,
                                   lift.trace,      std::move(h),    type_pbc};
}

BackwardCleanupResult backward_cleanup(const Homomorphism& lifted_instance, const Homomorphism& cleanup,
                                       const Homomorphism& typing) {
    if (!is_mono(cleanup)) throw Error(ErrorKind::NotMono, "backward clean-up must be injective");
    require_same(lifted_instance.target, typing.source, "backward_cleanup: typing does not start at the graph");
    SquareResult pbc = final_pbc(cleanup, lifted_instance);
    Homomorphism h = compose(typing, pbc.second);
    return BackwardCleanupResult{pbc.object, std::move(pbc.second), std::move(pbc.first), std::move(h)};
}

std::string_view to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

std::pair<Homomorphism, Homomorphism> directed_rule(const PropagationPlan& plan) {
    const Rule& rule = plan.rule;
    validate_rule(rule);
    require_same(plan.match.source, rule.lhs, "plan: match does not start at the rule's lhs");
    require_homomorphism(plan.match, "plan match");
    if (plan.direction == Direction::Forward) {
        if (!is_iso(rule.left_leg()))
            throw Error(ErrorKind::FactorizationViolated, "forward propagation needs a rule without deletions or clones");
        return {rule.right_leg(), compose(plan.match, rule.left_leg())};
    }
    if (!is_iso(rule.right_leg()))
        throw Error(ErrorKind::FactorizationViolated, "backward propagation needs a rule without additions or merges");
    return {rule.left_leg(), plan.match};
}

namespace {

std::string arrow_name(const ObjectName& a, const ObjectName& b) { return a + "->" + b; }

/// Data derived from the hierarchy and the rule that every step needs.
struct Context {
    Direction direction;
    ObjectName origin;
    Homomorphism rule;  // forward L -> L+, backward L- -> L
    Homomorphism match; // L >-> G0
    SubHierarchy sub;
    std::map<ObjectName, Homomorphism> typing;      // forward G0 -> Gi, backward Gi -> G0
    std::map<ObjectName, Restriction> restriction;  // backward only

    const Graph& lhs() const { return match.source; }
    bool forward() const { return direction == Direction::Forward; }

    std::vector<ObjectName> others() const {
        std::vector<ObjectName> out;
        for (const auto& n : sub.nodes)
            if (n != origin) out.push_back(n);
        return out;
    }

    /// Edges of the sub-hierarchy that need a connector.
    std::vector<ShapeEdge> connector_edges() const {
        std::vector<ShapeEdge> out;
        for (const auto& e : sub.edges)
            if (e.first != origin && e.second != origin) out.push_back(e);
        return out;
    }
};

Context make_context(const Hierarchy& h, Direction direction, const ObjectName& origin, const Homomorphism& rule,
                     const Homomorphism& match) {
    if (!h.has_object(origin)) throw Error(ErrorKind::UnknownElement, "object '" + origin + "'");
    require_same(match.target, h.object(origin), "plan: match does not land in the origin object");
    Context ctx{direction, origin, rule, match, {}, {}, {}};
    if (direction == Direction::Forward) {
        require_same(rule.source, match.source, "plan: rule and match start at different graphs");
        ctx.sub = forward_subgraph(h, origin);
        for (const auto& n : ctx.others()) ctx.typing.emplace(n, composed_typing(h, origin, n));
    } else {
        require_same(rule.target, match.source, "plan: rule does not end at the matched graph");
        if (!is_mono(match)) throw Error(ErrorKind::NotMono, "backward propagation needs a mono match");
        ctx.sub = backward_subgraph(h, origin);
        for (const auto& n : ctx.others()) {
            Homomorphism t = composed_typing(h, n, origin);
            ctx.restriction.emplace(n, restriction_pullback(t, match));
            ctx.typing.emplace(n, std::move(t));
        }
    }
    return ctx;
}

Context make_context(const Hierarchy& h, const PropagationPlan& plan) {
    auto [rule, match] = directed_rule(plan);
    return make_context(h, plan.direction, plan.origin, rule, match);
}

/// ĥ_ij: L_Gi -> L_Gj between the restrictions of adjacent objects.
Homomorphism restriction_arrow(const Hierarchy& h, const Context& ctx, const ObjectName& i, const ObjectName& j) {
    const Restriction& ri = ctx.restriction.at(i);
    const Restriction& rj = ctx.restriction.at(j);
    SquareResult pb{rj.graph, rj.instance, rj.typing};
    return pullback_pair(pb, compose(h.typing(i, j), ri.instance), ri.typing);
}

std::optional<std::string> forward_defect(const Context& ctx, const ForwardFactorization& f, const Graph& target) {
    if (!(f.pre_arrow.source == ctx.lhs())) return "mid arrow does not start at the rule's lhs";
    if (!(f.post_arrow.target == ctx.rule.target)) return "mid arrow does not end at the rule's rhs";
    if (!(f.pre_arrow.target == f.post_arrow.source) || !(f.typing.source == f.mid()))
        return "factorization arrows do not share the mid graph";
    if (!(f.typing.target == target)) return "mid typing does not land in the object";
    for (const auto* hom : {&f.pre_arrow, &f.post_arrow, &f.typing})
        if (auto d = homomorphism_defect(*hom)) return *d;
    if (!hom_equal(compose(f.post_arrow, f.pre_arrow), ctx.rule)) return "factorization does not compose to the rule";
    return std::nullopt;
}

std::optional<std::string> forward_condition(const Context& ctx, const ForwardFactorization& f,
                                             const ObjectName& n) {
    if (!hom_equal(compose(f.typing, f.pre_arrow), compose(ctx.typing.at(n), ctx.match)))
        return "mid typing does not extend the typing of the matched pattern";
    return std::nullopt;
}

std::optional<std::string> backward_defect(const Context& ctx, const BackwardFactorization& f,
                                           const Restriction& r) {
    if (!(f.post_arrow.target == ctx.lhs())) return "mid arrow does not end at the rule's lhs";
    if (!(f.pre_arrow.source == ctx.rule.source)) return "mid arrow does not start at the rule's interface";
    if (!(f.pre_arrow.target == f.post_arrow.source) || !(f.retyping.target == f.mid()))
        return "factorization arrows do not share the mid graph";
    if (!(f.retyping.source == r.graph)) return "retyping does not start at the restricted instances";
    for (const auto* hom : {&f.pre_arrow, &f.post_arrow, &f.retyping})
        if (auto d = homomorphism_defect(*hom)) return *d;
    if (!hom_equal(compose(f.post_arrow, f.pre_arrow), ctx.rule)) return "factorization does not compose to the rule";
    return std::nullopt;
}

std::optional<std::string> backward_condition(const BackwardFactorization& f, const Restriction& r) {
    const std::set<NodeId> kept = image_of(f.post_arrow);
    for (const auto& [y, l] : r.typing.map)
        if (!kept.count(l)) return "instance '" + r.instance(y) + "' of '" + l + "' is deleted by the strict part";
    if (!hom_equal(compose(f.post_arrow, f.retyping), r.typing))
        return "retyping does not refine the typing of the restricted instances";
    return std::nullopt;
}

/// Connector conditions; empty when `l` is a valid connector.
std::optional<std::string> connector_defect(const Hierarchy& h, const Context& ctx, const PropagationPlan& plan,
                                            const ObjectName& i, const ObjectName& j, const Homomorphism& l) {
    if (auto d = homomorphism_defect(l)) return *d;
    if (ctx.forward()) {
        const auto& fi = plan.forward.at(i);
        const auto& fj = plan.forward.at(j);
        if (!(l.source == fi.mid()) || !(l.target == fj.mid())) return "connector does not join the two mid graphs";
        if (!hom_equal(compose(l, fi.pre_arrow), fj.pre_arrow)) return "connector does not preserve the matched pattern";
        if (!hom_equal(compose(fj.post_arrow, l), fi.post_arrow)) return "connector does not commute with the rule";
        if (!hom_equal(compose(fj.typing, l), compose(h.typing(i, j), fi.typing)))
            return "connector does not commute with the typings";
        return std::nullopt;
    }
    const auto& fi = plan.backward.at(i);
    const auto& fj = plan.backward.at(j);
    if (!(l.source == fi.mid()) || !(l.target == fj.mid())) return "connector does not join the two mid graphs";
    if (!hom_equal(compose(fj.post_arrow, l), fi.post_arrow)) return "connector does not commute with the rule";
    if (!hom_equal(compose(l, fi.pre_arrow), fj.pre_arrow)) return "connector does not preserve the interface";
    if (!hom_equal(compose(l, fi.retyping), compose(fj.retyping, restriction_arrow(h, ctx, i, j))))
        return "connector does not commute with the retypings";
    return std::nullopt;
}

std::optional<Homomorphism> search_connector(const Hierarchy& h, const Context& ctx, const PropagationPlan& plan,
                                             const ObjectName& i, const ObjectName& j) {
    std::map<NodeId, std::set<NodeId>> allowed;
    auto restrict_to = [&](const NodeId& x, std::set<NodeId> candidates) {
        auto [it, inserted] = allowed.emplace(x, candidates);
        if (inserted) return;
        std::set<NodeId> both;
        std::set_intersection(it->second.begin(), it->second.end(), candidates.begin(), candidates.end(),
                              std::inserter(both, both.end()));
        it->second = std::move(both);
    };
    auto preimage = [](const Homomorphism& f, const NodeId& y) {
        std::set<NodeId> out;
        for (const auto& [x, fx] : f.map)
            if (fx == y) out.insert(x);
        return out;
    };
    const Graph* source = nullptr;
    const Graph* target = nullptr;
    if (ctx.forward()) {
        const auto& fi = plan.forward.at(i);
        const auto& fj = plan.forward.at(j);
        source = &fi.mid();
        target = &fj.mid();
        const Homomorphism hij = h.typing(i, j);
        for (const auto& x : source->node_ids()) {
            restrict_to(x, preimage(fj.post_arrow, fi.post_arrow(x)));
            restrict_to(x, preimage(fj.typing, hij(fi.typing(x))));
        }
        for (const auto& [l, x] : fi.pre_arrow.map) restrict_to(x, {fj.pre_arrow(l)});
    } else {
        const auto& fi = plan.backward.at(i);
        const auto& fj = plan.backward.at(j);
        source = &fi.mid();
        target = &fj.mid();
        const Homomorphism hij = restriction_arrow(h, ctx, i, j);
        for (const auto& x : source->node_ids()) restrict_to(x, preimage(fj.post_arrow, fi.post_arrow(x)));
        for (const auto& [c, x] : fi.pre_arrow.map) restrict_to(x, {fj.pre_arrow(c)});
        for (const auto& [y, x] : fi.retyping.map) restrict_to(x, {fj.retyping(hij(y))});
    }
    for (auto& l : find_homomorphisms(*source, *target, allowed, false, 1))
        if (!connector_defect(h, ctx, plan, i, j, l)) return l;
    return std::nullopt;
}

struct CheckedPlan {
    std::vector<PlanViolation> violations;
    std::map<ShapeEdge, Homomorphism> connectors;
    std::vector<std::string> warnings;
};

CheckedPlan check_plan(const Hierarchy& h, const Context& ctx, const PropagationPlan& plan) {
    CheckedPlan out;
    std::set<ObjectName> usable;
    for (const auto& n : ctx.others()) {
        std::optional<std::string> defect;
        if (ctx.forward()) {
            auto it = plan.forward.find(n);
            if (it == plan.forward.end()) {
                out.violations.push_back({n, "no factorization for this object"});
                continue;
            }
            defect = forward_defect(ctx, it->second, h.object(n));
            if (!defect) {
                if (!is_mono(it->second.pre_arrow))
                    out.warnings.push_back(n + ": strict part of the factorization is not injective");
                defect = forward_condition(ctx, it->second, n);
            }
        } else {
            auto it = plan.backward.find(n);
            if (it == plan.backward.end()) {
                out.violations.push_back({n, "no factorization for this object"});
                continue;
            }
            const Restriction& r = ctx.restriction.at(n);
            defect = backward_defect(ctx, it->second, r);
            if (!defect) defect = backward_condition(it->second, r);
        }
        if (defect)
            out.violations.push_back({n, *defect});
        else
            usable.insert(n);
    }
    auto stray = [&](const auto& m) {
        for (const auto& [n, _] : m)
            if (!ctx.sub.contains(n) || n == ctx.origin)
                out.violations.push_back({n, "factorization given for an object outside the propagation"});
    };
    if (ctx.forward())
        stray(plan.forward);
    else
        stray(plan.backward);

    for (const auto& [i, j] : ctx.connector_edges()) {
        if (!usable.count(i) || !usable.count(j)) continue;
        const std::string where = arrow_name(i, j);
        if (auto it = plan.connectors.find({i, j}); it != plan.connectors.end()) {
            if (auto d = connector_defect(h, ctx, plan, i, j, it->second))
                out.violations.push_back({where, *d});
            else
                out.connectors.emplace(ShapeEdge{i, j}, it->second);
            continue;
        }
        if (auto l = search_connector(h, ctx, plan, i, j))
            out.connectors.emplace(ShapeEdge{i, j}, std::move(*l));
        else
            out.violations.push_back({where, "no connector between the mid graphs exists"});
    }
    for (const auto& [e, _] : plan.connectors)
        if (!ctx.sub.edges.count(e) || e.first == ctx.origin || e.second == ctx.origin)
            out.violations.push_back({arrow_name(e.first, e.second), "connector given for an arrow outside the propagation"});
    return out;
}

std::string describe(const std::vector<PlanViolation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.where + ": " + v.message;
    }
    return out;
}

} // namespace

PropagationPlan canonical_plan(const Hierarchy& h, Direction direction, const ObjectName& origin, const Rule& rule,
                               const Homomorphism& match) {
    PropagationPlan plan{direction, origin, rule, match, {}, {}, {}};
    Context ctx = make_context(h, plan);
    for (const auto& n : ctx.others()) {
        if (ctx.forward())
            plan.forward.emplace(n, canonical_forward_factorization(ctx.rule, compose(ctx.typing.at(n), ctx.match)));
        else
            plan.backward.emplace(n, canonical_backward_factorization(ctx.rule, ctx.restriction.at(n).typing));
    }
    for (const auto& e : ctx.connector_edges()) {
        const Graph& mid = ctx.forward() ? plan.forward.at(e.first).mid() : plan.backward.at(e.first).mid();
        plan.connectors.emplace(e, identity(mid));
    }
    return plan;
}

std::vector<PlanViolation> check_composability(const Hierarchy& h, const PropagationPlan& plan) {
    Context ctx = make_context(h, plan);
    return check_plan(h, ctx, plan).violations;
}

std::optional<Homomorphism> find_connector(const Hierarchy& h, const PropagationPlan& plan, const ObjectName& from,
                                           const ObjectName& to) {
    Context ctx = make_context(h, plan);
    if (!ctx.sub.edges.count({from, to}) || from == ctx.origin || to == ctx.origin)
        throw Error(ErrorKind::UnknownElement, "no connector slot for " + arrow_name(from, to));
    bool present = ctx.forward() ? plan.forward.count(from) && plan.forward.count(to)
                                 : plan.backward.count(from) && plan.backward.count(to);
    if (!present) throw Error(ErrorKind::ComposabilityViolated, "missing factorization for " + arrow_name(from, to));
    return search_connector(h, ctx, plan, from, to);
}

namespace {

void after_update(const Hierarchy& h, const ObjectName& n, const PropagationOptions& options) {
    if (options.check_each_step) {
        auto v = validate_commutativity(h);
        if (!v.empty())
            throw Error(ErrorKind::CommutativityViolated, "after updating '" + n + "': " + v.front().describe());
    }
    if (options.on_update) options.on_update(h, n);
}

void record_arrows(const Hierarchy& h, RewriteReport& report) {
    for (const auto& [e, map] : h.typings())
        if (report.updates.count(e.first) || report.updates.count(e.second)) report.arrows[e] = map;
}

CheckedPlan checked(const Hierarchy& h, const Context& ctx, const PropagationPlan& plan) {
    CheckedPlan c = check_plan(h, ctx, plan);
    if (!c.violations.empty()) throw Error(ErrorKind::ComposabilityViolated, describe(c.violations));
    return c;
}

} // namespace

RewriteReport propagate_forward(Hierarchy& h, const PropagationPlan& plan, const PropagationOptions& options) {
    if (plan.direction != Direction::Forward)
        throw Error(ErrorKind::MismatchedEndpoints, "propagate_forward called with a backward plan");
    const Context ctx = make_context(h, plan);
    CheckedPlan c = checked(h, ctx, plan);

    RewriteReport report;
    report.direction = Direction::Forward;
    report.origin = plan.origin;
    report.waves = waves(ctx.sub, true);
    report.warnings = std::move(c.warnings);
    if (!is_mono(plan.match)) report.warnings.push_back(plan.origin + ": match is not injective");

    std::map<ObjectName, Homomorphism> rhs_image; // x̂_i: L+ -> Gi+
    for (const auto& wave : report.waves) {
        for (const auto& n : wave) {
            std::map<ShapeEdge, NodeMap> incident;
            SquareResult po;
            std::optional<Homomorphism> projected;
            if (n == ctx.origin) {
                po = pushout(ctx.match, ctx.rule);
            } else {
                const ForwardFactorization& f = plan.forward.at(n);
                po = pushout(f.typing, f.post_arrow);
                RuleProjection projection = project_rule(f.post_arrow, f.typing);
                projected = pushout_copair(projection.rule, compose(po.first, projection.image.mono), po.second);
            }
            for (const auto& s : h.successors(n)) {
                Homomorphism current = h.typing(n, s);
                incident[{n, s}] = pushout_copair(po, current, rhs_image.at(s)).map;
            }
            for (const auto& p : h.predecessors(n)) incident[{p, n}] = compose(po.first, h.typing(p, n)).map;
            h.replace_object(n, po.object, incident);
            rhs_image[n] = po.second;
            report.updates.emplace(n, ObjectUpdate{po.first, po.second, projected});
            after_update(h, n, options);
        }
    }
    record_arrows(h, report);
    return report;
}

RewriteReport propagate_backward(Hierarchy& h, const PropagationPlan& plan, const PropagationOptions& options) {
    if (plan.direction != Direction::Backward)
        throw Error(ErrorKind::MismatchedEndpoints, "propagate_backward called with a forward plan");
    const Context ctx = make_context(h, plan);
    CheckedPlan c = checked(h, ctx, plan);

    RewriteReport report;
    report.direction = Direction::Backward;
    report.origin = plan.origin;
    report.waves = waves(ctx.sub, false);
    report.warnings = std::move(c.warnings);

    // Restriction arrows are taken from the hierarchy before any update.
    std::map<ShapeEdge, Homomorphism> restricted;
    for (const auto& e : ctx.connector_edges()) restricted.emplace(e, restriction_arrow(h, ctx, e.first, e.second));

    std::map<ObjectName, LiftResult> lifts;
    for (const auto& wave : report.waves) {
        for (const auto& n : wave) {
            std::map<ShapeEdge, NodeMap> incident;
            SquareResult pbc;
            Homomorphism instance; // m̂_n: restricted instances (or L) >-> old object
            if (n == ctx.origin) {
                pbc = final_pbc(ctx.rule, ctx.match);
                instance = ctx.match;
            } else {
                const BackwardFactorization& f = plan.backward.at(n);
                const Restriction& r = ctx.restriction.at(n);
                LiftResult lift = lift_rule(f.retyping, f.pre_arrow, r.instance);
                pbc = SquareResult{lift.graph, lift.instance, lift.trace};
                instance = r.instance;
                lifts.emplace(n, std::move(lift));
            }
            for (const auto& p : h.predecessors(n)) {
                const LiftResult& lp = lifts.at(p);
                Homomorphism into_rule; // L_Gp- -> the apex over `instance`
                if (n == ctx.origin) {
                    into_rule = lp.lifted_typing();
                } else {
                    into_rule = pullback_pair(lifts.at(n).rule, compose(restricted.at({p, n}), lp.lifted_rule()),
                                              lp.lifted_typing());
                }
                incident[{p, n}] = final_pbc_mediator(pbc, instance, h.typing(p, n), lp.instance, into_rule).map;
            }
            for (const auto& s : h.successors(n)) incident[{n, s}] = compose(h.typing(n, s), pbc.second).map;
            h.replace_object(n, pbc.object, incident);
            std::optional<Homomorphism> aux;
            if (n != ctx.origin) aux = lifts.at(n).lifted_typing();
            report.updates.emplace(n, ObjectUpdate{pbc.second, pbc.first, aux});
            after_update(h, n, options);
        }
    }
    record_arrows(h, report);
    return report;
}

RewriteReport propagate(Hierarchy& h, const PropagationPlan& plan, const PropagationOptions& options) {
    return plan.direction == Direction::Forward ? propagate_forward(h, plan, options)
                                                : propagate_backward(h, plan, options);
}

ForwardDerivation derive_forward_factorization(const Homomorphism& rule, const Homomorphism& lhs_typing,
                                               const ForwardRelation& relation) {
    require_same(rule.source, lhs_typing.source, "relation: rule and typing start at different graphs");
    const Graph& lhs = rule.source;
    const Graph& rhs = rule.target;
    const Graph& types = lhs_typing.target;
    const std::set<NodeId> existing = image_of(rule);

    Graph mid = lhs;
    NodeMap pre = identity(lhs).map;
    NodeMap post = rule.map;
    NodeMap typing = lhs_typing.map;
    std::map<NodeId, std::vector<NodeId>> over; // rhs node -> mid nodes
    for (const auto& [x, y] : rule.map) over[y].push_back(x);

    for (const auto& [a, t] : relation.typing) {
        if (!rhs.has_node(a)) throw Error(ErrorKind::RelationInconsistent, "'" + a + "' is not a node of the rhs");
        if (!types.has_node(t)) throw Error(ErrorKind::RelationInconsistent, "'" + t + "' is not a node of the object");
        if (existing.count(a)) {
            for (const auto& x : over[a])
                if (lhs_typing(x) != t)
                    throw Error(ErrorKind::RelationInconsistent,
                                "'" + a + "' is already typed by '" + lhs_typing(x) + "', not '" + t + "'");
            continue;
        }
        NodeId id = mid.fresh_id(a);
        mid.add_node(id, attrs::intersect(rhs.node_attrs(a), types.node_attrs(t)));
        post.emplace(id, a);
        typing.emplace(id, t);
        over[a].push_back(id);
    }
    for (const auto& [e, a] : rhs.edges()) {
        const auto& [u, v] = e;
        bool added_u = relation.typing.count(u) && !existing.count(u);
        bool added_v = relation.typing.count(v) && !existing.count(v);
        if (!added_u && !added_v) continue;
        if (!over.count(u) || !over.count(v)) continue;
        for (const auto& p : over[u]) {
            for (const auto& q : over[v]) {
                Edge te{typing.at(p), typing.at(q)};
                if (!types.has_edge(te)) continue;
                mid.add_edge(p, q, attrs::intersect(a, types.edge_attrs(te)));
            }
        }
    }
    for (const auto& group : relation.same_type)
        for (const auto& a : group)
            if (!rhs.has_node(a)) throw Error(ErrorKind::RelationInconsistent, "'" + a + "' is not a node of the rhs");

    Homomorphism pre_arrow{lhs, mid, std::move(pre)};
    Homomorphism post_arrow{mid, rhs, std::move(post)};
    Homomorphism typing_arrow{mid, types, std::move(typing)};
    return ForwardDerivation{ForwardFactorization{std::move(pre_arrow), std::move(post_arrow), std::move(typing_arrow)},
                             relation.same_type};
}

namespace {

struct SplitBuild {
    Graph mid;
    NodeMap pre;
    NodeMap post;
    NodeMap retyping;
};

/// Mid graph in which the lhs nodes in `split` are replaced by their copies.
SplitBuild build_split(const Homomorphism& rule, const Restriction& restriction, const std::set<NodeId>& split,
                       const std::map<NodeId, NodeId>& chosen) {
    const Graph& lhs = rule.target;
    const Graph& interface = rule.source;
    SplitBuild b;
    std::map<NodeId, std::vector<NodeId>> over;
    for (const auto& l : lhs.node_ids()) {
        std::vector<NodeId> copies;
        for (const auto& [c, img] : rule.map)
            if (img == l) copies.push_back(c);
        if (split.count(l)) {
            for (const auto& c : copies) {
                NodeId id = b.mid.fresh_id(c);
                b.mid.add_node(id, interface.node_attrs(c));
                b.pre.emplace(c, id);
                b.post.emplace(id, l);
                over[l].push_back(id);
            }
        } else {
            NodeId id = b.mid.fresh_id(l);
            b.mid.add_node(id, lhs.node_attrs(l));
            for (const auto& c : copies) b.pre.emplace(c, id);
            b.post.emplace(id, l);
            over[l].push_back(id);
        }
    }
    for (const auto& [e, a] : interface.edges()) b.mid.add_edge(b.pre.at(e.first), b.pre.at(e.second), a);
    for (const auto& [e, a] : lhs.edges()) {
        if (split.count(e.first) && split.count(e.second)) continue;
        for (const auto& p : over[e.first])
            for (const auto& q : over[e.second]) b.mid.add_edge(p, q, a);
    }
    for (const auto& [y, l] : restriction.typing.map)
        b.retyping.emplace(y, split.count(l) ? b.pre.at(chosen.at(y)) : over[l].front());
    return b;
}

} // namespace

BackwardDerivation derive_backward_factorization(const Homomorphism& rule, const Restriction& restriction,
                                                 const NodeMap& relation) {
    require_same(rule.target, restriction.typing.target, "relation: rule and restriction end at different graphs");
    const Graph& lhs = rule.target;
    const Graph& interface = rule.source;

    std::map<NodeId, NodeId> instance_of; // object node -> restricted instance
    for (const auto& [y, g] : restriction.instance.map) instance_of.emplace(g, y);
    std::map<NodeId, NodeId> chosen; // restricted instance -> copy
    for (const auto& [g, c] : relation) {
        auto it = instance_of.find(g);
        if (it == instance_of.end())
            throw Error(ErrorKind::RelationInconsistent, "'" + g + "' is not an instance of the matched pattern");
        if (!interface.has_node(c))
            throw Error(ErrorKind::RelationInconsistent, "'" + c + "' is not a node of the rule interface");
        const NodeId& l = restriction.typing(it->second);
        if (rule(c) != l)
            throw Error(ErrorKind::RelationInconsistent, "'" + g + "' is an instance of '" + l + "', not of '" + rule(c) + "'");
        chosen.emplace(it->second, c);
    }

    std::map<NodeId, std::size_t> copy_count;
    for (const auto& [c, l] : rule.map) ++copy_count[l];
    std::set<NodeId> split;
    for (const auto& l : lhs.node_ids()) {
        if (copy_count[l] < 2) continue;
        bool all = true;
        for (const auto& [y, t] : restriction.typing.map)
            if (t == l && !chosen.count(y)) all = false;
        if (all) split.insert(l);
    }

    SplitBuild b = build_split(rule, restriction, split, chosen);
    for (;;) {
        Homomorphism retyping{restriction.graph, b.mid, b.retyping};
        if (is_homomorphism(retyping)) break;
        // Instances that do not fit their copy fall back to canonical cloning.
        std::set<NodeId> demote;
        const Graph& lg = restriction.graph;
        for (const auto& y : lg.node_ids())
            if (!attrs::subset(lg.node_attrs(y), b.mid.node_attrs(b.retyping.at(y))))
                demote.insert(restriction.typing(y));
        for (const auto& [e, a] : lg.edges()) {
            Edge img{b.retyping.at(e.first), b.retyping.at(e.second)};
            if (!b.mid.has_edge(img) || !attrs::subset(a, b.mid.edge_attrs(img))) {
                demote.insert(restriction.typing(e.first));
                demote.insert(restriction.typing(e.second));
            }
        }
        std::size_t before = split.size();
        for (const auto& l : demote) split.erase(l);
        if (split.size() == before) throw Error(ErrorKind::RelationInconsistent, "relation admits no factorization");
        b = build_split(rule, restriction, split, chosen);
    }

    BackwardFactorization f{Homomorphism{b.mid, lhs, b.post}, Homomorphism{interface, b.mid, b.pre},
                            Homomorphism{restriction.graph, b.mid, b.retyping}};

    // Instances of canonically cloned nodes keep only the copy they were related to.
    SquareResult lifted = pullback(f.retyping, f.pre_arrow);
    std::set<NodeId> dropped;
    for (const auto& [n, y] : lifted.first.map) {
        auto it = chosen.find(y);
        if (it == chosen.end() || split.count(restriction.typing(y))) continue;
        if (lifted.second(n) != it->second) dropped.insert(n);
    }
    std::optional<Homomorphism> cleanup;
    if (!dropped.empty()) {
        Graph kept = lifted.object;
        NodeMap inclusion;
        for (const auto& n : dropped) kept.remove_node(n);
        for (const auto& n : kept.node_ids()) inclusion.emplace(n, n);
        cleanup = Homomorphism{std::move(kept), lifted.object, std::move(inclusion)};
    }
    return BackwardDerivation{std::move(f), std::move(cleanup)};
}

RelationPlan plan_from_relation(const Hierarchy& h, Direction direction, const ObjectName& origin, const Rule& rule,
                                const Homomorphism& match, const RelationSpec& relation) {
    RelationPlan out;
    out.plan = PropagationPlan{direction, origin, rule, match, {}, {}, {}};
    const Context ctx = make_context(h, out.plan);
    auto check_scope = [&](const ObjectName& n) {
        if (!ctx.sub.contains(n) || n == origin)
            throw Error(ErrorKind::RelationInconsistent, "relation given for '" + n + "', which is not propagated to");
    };
    for (const auto& [n, _] : relation.typing) check_scope(n);
    for (const auto& [n, _] : relation.same_type) check_scope(n);
    if (direction == Direction::Backward && !relation.same_type.empty())
        throw Error(ErrorKind::RelationInconsistent, "same-type groups only apply to forward propagation");

    for (const auto& n : ctx.others()) {
        NodeMap rel;
        if (auto it = relation.typing.find(n); it != relation.typing.end()) rel = it->second;
        if (ctx.forward()) {
            ForwardRelation fr{rel, {}};
            if (auto it = relation.same_type.find(n); it != relation.same_type.end()) fr.same_type = it->second;
            ForwardDerivation d = derive_forward_factorization(ctx.rule, compose(ctx.typing.at(n), ctx.match), fr);
            out.plan.forward.emplace(n, std::move(d.factorization));
            if (!d.cleanup_groups.empty()) out.forward_cleanup.emplace(n, std::move(d.cleanup_groups));
        } else {
            BackwardDerivation d = derive_backward_factorization(ctx.rule, ctx.restriction.at(n), rel);
            out.plan.backward.emplace(n, std::move(d.factorization));
            if (d.cleanup) out.backward_cleanup.emplace(n, std::move(*d.cleanup));
        }
    }
    return out;
}

namespace {

/// Epi on L_T+ merging everything the groups send to distinct types.
std::optional<Homomorphism> merge_cleanup(const ObjectUpdate& update, const std::vector<std::set<NodeId>>& groups) {
    const Homomorphism& projected = *update.aux;
    Graph merged = projected.source;
    NodeMap map = identity(projected.source).map;
    bool changed = false;
    for (const auto& group : groups) {
        std::set<NodeId> types;
        for (const auto& a : group) types.insert(update.anchor(a));
        std::vector<NodeId> members;
        for (const auto& [x, t] : projected.map)
            if (types.count(t)) members.push_back(map.at(x));
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        if (members.size() < 2) continue;
        merged = apply_edit(merged, MergeNodes{members, members.front()});
        std::set<NodeId> gone(members.begin(), members.end());
        for (auto& [_, y] : map)
            if (gone.count(y)) y = members.front();
        changed = true;
    }
    if (!changed) return std::nullopt;
    return Homomorphism{projected.source, std::move(merged), std::move(map)};
}

} // namespace

std::vector<RewriteReport> propagate_with_relation(Hierarchy& h, const RelationPlan& plan,
                                                   const PropagationOptions& options) {
    std::vector<RewriteReport> reports{propagate(h, plan.plan, options)};
    const RewriteReport main = reports.front();
    // Forward clean-ups change descendants, backward ones ancestors: run them so
    // that no later clean-up invalidates the anchor of an earlier one.
    std::vector<ObjectName> order;
    for (const auto& wave : main.waves)
        for (const auto& n : wave) order.push_back(n);
    for (const auto& n : order) {
        if (plan.plan.direction == Direction::Forward) {
            auto it = plan.forward_cleanup.find(n);
            if (it == plan.forward_cleanup.end()) continue;
            const ObjectUpdate& update = main.updates.at(n);
            auto cleanup = merge_cleanup(update, it->second);
            if (!cleanup) continue;
            Rule rule = Rule::expansive(*cleanup);
            reports.push_back(propagate_forward(h, canonical_plan(h, Direction::Forward, n, rule, *update.aux), options));
        } else {
            auto it = plan.backward_cleanup.find(n);
            if (it == plan.backward_cleanup.end()) continue;
            Rule rule = Rule::restrictive(it->second);
            const Homomorphism& anchor = main.updates.at(n).anchor;
            reports.push_back(propagate_backward(h, canonical_plan(h, Direction::Backward, n, rule, anchor), options));
        }
    }
    return reports;
}

} // namespace sqpo
