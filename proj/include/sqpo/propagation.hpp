#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqpo/attr_graph.hpp"
#include "sqpo/category.hpp"
#include "sqpo/hierarchy.hpp"
#include "sqpo/rules.hpp"

namespace sqpo {

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

/// Splits an expansive rule r: L -> L+ as r = post ∘ pre through `mid`,
/// with `typing`: mid -> T extending the typing of L.
struct ForwardFactorization {
    Homomorphism pre_arrow;  // L -> L'
    Homomorphism post_arrow; // L' -> L+
    Homomorphism typing;     // L' -> T

    const Graph& mid() const { return pre_arrow.target; }
};

/// Splits a restrictive rule r: L- -> L as r = post ∘ pre through `mid`,
/// with `retyping`: L_G -> mid refining the typing of the restricted instances.
struct BackwardFactorization {
    Homomorphism post_arrow; // L' -> L
    Homomorphism pre_arrow;  // L- -> L'
    Homomorphism retyping;   // L_G -> L'

    const Graph& mid() const { return post_arrow.source; }
};

/// Trivial factorization L' = L (everything propagates).
ForwardFactorization canonical_forward_factorization(const Homomorphism& rule, const Homomorphism& lhs_typing);
/// Trivial factorization L' = L (everything propagates).
BackwardFactorization canonical_backward_factorization(const Homomorphism& rule, const Homomorphism& restriction_typing);

// ---------------------------------------------------------------------------
// Forward propagation along a single typing h: G -> T
// ---------------------------------------------------------------------------

struct ForwardStrictResult {
    Graph graph;          // G'
    Homomorphism trace;   // g': G -> G'
    Homomorphism match;   // m': L' >-> G'
    Homomorphism typing;  // h': G' -> T
};

/// Pushout of the match along r' and the induced typing of G' by T.
/// Throws FactorizationViolated when x ∘ r' != h ∘ m.
ForwardStrictResult forward_strict(const Homomorphism& typing, const Homomorphism& pre_arrow,
                                   const Homomorphism& match, const Homomorphism& lhs_typing);

struct ForwardCanonicalResult {
    Graph graph;               // G+
    Homomorphism graph_trace;  // g+: G' -> G+
    Homomorphism match;        // m+: L+ >-> G+
    Graph type_graph;          // T+
    Homomorphism type_trace;   // t+: T -> T+
    Homomorphism typing;       // h+: G+ -> T+
};

ForwardCanonicalResult forward_canonical(const Homomorphism& strict_typing, const Homomorphism& post_arrow,
                                         const Homomorphism& strict_match);

/// The rule r+ transported to T: image factorization of its typing
/// followed by a pushout.
struct RuleProjection {
    ImageFactorization image; // epi: L' -> L_T, mono: L_T >-> T
    SquareResult rule;        // (L_T+, r̂+: L_T -> L_T+, L+ -> L_T+)

    const Homomorphism& projected_rule() const { return rule.first; }
    const Homomorphism& instance() const { return image.mono; }
};

RuleProjection project_rule(const Homomorphism& post_arrow, const Homomorphism& mid_typing);

/// Applies a projection to T: returns (T+, t+: T -> T+, m̂+: L_T+ >-> T+).
SquareResult apply_projection(const RuleProjection& projection);

struct ForwardCleanupResult {
    Graph type_graph;         // T⊕
    Homomorphism type_trace;  // t⊕: T+ ->> T⊕
    Homomorphism match;       // L_T⊕ >-> T⊕
    Homomorphism typing;      // t⊕ ∘ h+
};

/// Merges elements of T+ through the epi `cleanup`: L_T+ ->> L_T⊕.
ForwardCleanupResult forward_cleanup(const Homomorphism& projected_match, const Homomorphism& cleanup,
                                     const Homomorphism& typing);

// ---------------------------------------------------------------------------
// Backward propagation along a single typing h: G -> T
// ---------------------------------------------------------------------------

/// Pullback of h and m: the part of G whose typing the rule can touch.
struct Restriction {
    Graph graph;          // L_G
    Homomorphism instance; // m̂: L_G >-> G
    Homomorphism typing;   // ĥ: L_G -> L
};

Restriction restriction_pullback(const Homomorphism& typing, const Homomorphism& match);

struct BackwardStrictResult {
    Graph type_graph;         // T'
    Homomorphism type_trace;  // t': T' -> T
    Homomorphism match;       // m': L' >-> T'
    Homomorphism typing;      // h': G -> T'
    SquareResult pbc;         // (T', m', t') as built by final_pbc
};

/// Strict rewrite of T by r' and the retyping of G. Throws
/// InstanceOfDeletedElement or FactorizationViolated on a bad factorization.
BackwardStrictResult backward_strict(const Homomorphism& match, const Homomorphism& post_arrow,
                                     const Homomorphism& retyping, const Homomorphism& typing,
                                     const Restriction& restriction);

struct BackwardCanonicalResult {
    Graph type_graph;         // T-
    Homomorphism type_trace;  // t-: T- -> T'
    Homomorphism match;       // m-: L- >-> T-
    Graph graph;              // G-
    Homomorphism graph_trace; // g-: G- -> G
    Homomorphism typing;      // h-: G- -> T-
    SquareResult pbc;         // (T-, m-, t-)
};

BackwardCanonicalResult backward_canonical(const Homomorphism& strict_typing, const Homomorphism& pre_arrow,
                                           const Homomorphism& strict_match);

/// The rule r- pulled back to G and applied there.
struct LiftResult {
    SquareResult rule;        // (L_G-, r̂-: L_G- -> L_G, ĥ-: L_G- -> L-)
    Graph graph;              // G-
    Homomorphism instance;    // m̂-: L_G- >-> G-
    Homomorphism trace;       // g-: G- -> G

    const Homomorphism& lifted_rule() const { return rule.first; }
    const Homomorphism& lifted_typing() const { return rule.second; }
};

LiftResult lift_rule(const Homomorphism& retyping, const Homomorphism& pre_arrow, const Homomorphism& instance);

/// Typing G- -> T- of a lifted rewrite, from the finality of the T- complement.
Homomorphism lifted_typing(const LiftResult& lift, const Homomorphism& strict_typing,
                           const Homomorphism& strict_match, const SquareResult& type_pbc);

struct BackwardCleanupResult {
    Graph graph;            // G⊖
    Homomorphism trace;     // g⊖: G⊖ >-> G-
    Homomorphism instance;  // L_G⊖ >-> G⊖
    Homomorphism typing;    // h- ∘ g⊖
};

/// Removes clones not selected by the mono `cleanup`: L_G⊖ >-> L_G-.
BackwardCleanupResult backward_cleanup(const Homomorphism& lifted_instance, const Homomorphism& cleanup,
                                       const Homomorphism& typing);

// ---------------------------------------------------------------------------
// Hierarchies
// ---------------------------------------------------------------------------

enum class Direction { Forward, Backward };

std::string_view to_string(Direction d);

/// Everything needed to rewrite one object and propagate the change.
/// Forward plans use the rule's right leg (its left leg must be an
/// isomorphism), backward plans use its left leg (its right leg must be an
/// isomorphism). `match` always starts at the rule's lhs.
struct PropagationPlan {
    Direction direction = Direction::Forward;
    ObjectName origin;
    Rule rule;
    Homomorphism match;
    std::map<ObjectName, ForwardFactorization> forward;
    std::map<ObjectName, BackwardFactorization> backward;
    /// Arrows between the mids of adjacent objects. Missing connectors are
    /// searched for when the plan is checked.
    std::map<ShapeEdge, Homomorphism> connectors;
};

/// Rule arrow and instance actually used by the plan's direction:
/// forward (P -> R, P >-> G0), backward (P -> L, L >-> G0).
std::pair<Homomorphism, Homomorphism> directed_rule(const PropagationPlan& plan);

/// Plan in which every other object gets the trivial factorization.
PropagationPlan canonical_plan(const Hierarchy& h, Direction direction, const ObjectName& origin, const Rule& rule,
                               const Homomorphism& match);

struct PlanViolation {
    std::string where;   // object name or "a->b"
    std::string message;
};

/// Coverage, per-object factorization conditions and connector conditions.
std::vector<PlanViolation> check_composability(const Hierarchy& h, const PropagationPlan& plan);

/// Searches for a connector between the mids of two adjacent objects.
std::optional<Homomorphism> find_connector(const Hierarchy& h, const PropagationPlan& plan, const ObjectName& from,
                                           const ObjectName& to);

struct ObjectUpdate {
    /// Forward: old -> new. Backward: new -> old.
    Homomorphism trace;
    /// Forward: image of L+ in the new object. Backward: lifted instance L_G- >-> new object.
    Homomorphism anchor;
    /// Forward: projected instance L_T+ >-> new object (absent for the origin).
    /// Backward: lifted rule typing L_G- -> L-.
    std::optional<Homomorphism> aux;
};

struct RewriteReport {
    Direction direction = Direction::Forward;
    ObjectName origin;
    std::vector<std::vector<ObjectName>> waves;
    std::map<ObjectName, ObjectUpdate> updates;
    std::map<ShapeEdge, NodeMap> arrows; // every arrow that changed, with its final map
    std::vector<std::string> warnings;
};

struct PropagationOptions {
    /// Re-validate the whole hierarchy after every single-object update.
    bool check_each_step = true;
    /// Called after every single-object update with the updated object's name.
    std::function<void(const Hierarchy&, const ObjectName&)> on_update;
};

/// Applies an expansive rewrite at `plan.origin` and propagates it to the
/// forward sub-hierarchy, sinks first. The hierarchy is modified in place and
/// stays valid after every step; an invalid plan is rejected before anything
/// changes (ComposabilityViolated).
RewriteReport propagate_forward(Hierarchy& h, const PropagationPlan& plan, const PropagationOptions& options = {});

/// Dual of `propagate_forward` for restrictive rewrites, sources first.
RewriteReport propagate_backward(Hierarchy& h, const PropagationPlan& plan, const PropagationOptions& options = {});

RewriteReport propagate(Hierarchy& h, const PropagationPlan& plan, const PropagationOptions& options = {});

// ---------------------------------------------------------------------------
// Relation-controlled propagation
// ---------------------------------------------------------------------------

/// Added elements of L+ that should be typed by existing elements of T, and
/// groups of L+ elements that should end up with a single type.
struct ForwardRelation {
    NodeMap typing;
    std::vector<std::set<NodeId>> same_type;
};

struct ForwardDerivation {
    ForwardFactorization factorization;
    std::vector<std::set<NodeId>> cleanup_groups;
};

ForwardDerivation derive_forward_factorization(const Homomorphism& rule, const Homomorphism& lhs_typing,
                                               const ForwardRelation& relation);

struct BackwardDerivation {
    BackwardFactorization factorization;
    /// Mono L_G⊖ >-> L_G- dropping clones the relation did not ask for.
    std::optional<Homomorphism> cleanup;
};

/// `relation` sends instances (nodes of G) to copies (nodes of L-).
BackwardDerivation derive_backward_factorization(const Homomorphism& rule, const Restriction& restriction,
                                                 const NodeMap& relation);

/// Per-object relations for a whole propagation.
struct RelationSpec {
    std::map<ObjectName, NodeMap> typing;
    std::map<ObjectName, std::vector<std::set<NodeId>>> same_type;
};

struct RelationPlan {
    PropagationPlan plan;
    std::map<ObjectName, std::vector<std::set<NodeId>>> forward_cleanup;
    std::map<ObjectName, Homomorphism> backward_cleanup;
};

RelationPlan plan_from_relation(const Hierarchy& h, Direction direction, const ObjectName& origin, const Rule& rule,
                                const Homomorphism& match, const RelationSpec& relation);

/// Runs the plan, then each clean-up as its own canonical propagation.
/// Returns the main report followed by one report per clean-up.
std::vector<RewriteReport> propagate_with_relation(Hierarchy& h, const RelationPlan& plan,
                                                   const PropagationOptions& options = {});

} // namespace sqpo
