#pragma once

#include "sqpo/attr_graph.hpp"

namespace sqpo {

/// f: A -> C, g: B -> C.
struct Cospan {
    Homomorphism f;
    Homomorphism g;
};

/// f: C -> A, g: C -> B.
struct Span {
    Homomorphism f;
    Homomorphism g;
};

/// The constructed object of a square together with its two new arrows.
/// Which arrow is `first`/`second` is fixed per construction (see below).
struct SquareResult {
    Graph object;
    Homomorphism first;
    Homomorphism second;
};

/// Pullback of f: A -> C and g: B -> C.
/// Returns (P, p_A: P -> A, p_B: P -> B). Nodes are the pairs (a, b) with
/// f(a) = g(b), named "a⋈b"; attributes are intersected.
SquareResult pullback(const Homomorphism& f, const Homomorphism& g);

/// Pushout of f: A -> B and g: A -> C.
/// Returns (Q, q_B: B -> Q, q_C: C -> Q). Nodes are the classes of B ⊔ C
/// under f(a) ~ g(a); attributes are united over each class. A class is
/// named by its B members joined with '+', or by its C members if it has none.
SquareResult pushout(const Homomorphism& f, const Homomorphism& g);

/// Final pullback complement of f: K -> L over the mono m: L >-> G.
/// Returns (D, k: K >-> D, d: D -> G).
///
/// Nodes of G outside m(L) are kept as they are. Each node g = m(l) is
/// replaced by one copy per element of f^{-1}(l): the copy keeps the name g
/// when it is the only one and is named "g∥k" otherwise, so an l with an
/// empty preimage is deleted together with its incident edges. An edge over
/// an image edge m(e) exists between copies iff K has the corresponding
/// edge; other G edges are copied between all lifts of their endpoints.
/// Attributes of a copy (g, k) are G(g) \ (L(l) \ K(k)).
SquareResult final_pbc(const Homomorphism& f, const Homomorphism& m);

struct ImageFactorization {
    Homomorphism epi;  // A -> I
    Homomorphism mono; // I >-> B
};

/// I is the image of f in B: image nodes and edges of B carrying the union
/// of their preimages' attributes.
ImageFactorization image_factorization(const Homomorphism& f);

/// Mediating arrow X -> P into a pullback built by `pullback` from a cone
/// x_a: X -> A, x_b: X -> B. Throws if the cone does not commute.
Homomorphism pullback_pair(const SquareResult& pb, const Homomorphism& x_a, const Homomorphism& x_b);

/// Mediating arrow Q -> X out of a pushout built by `pushout` from a cocone
/// y_b: B -> X, y_c: C -> X. Throws if the cocone does not commute.
Homomorphism pushout_copair(const SquareResult& po, const Homomorphism& y_b, const Homomorphism& y_c);

/// Finality mediator for `pbc = final_pbc(f, m)`.
///
/// Given a pullback square over m with apex A' -> C' (`a_to_c`, a mono) and
/// base `c_to_g`: C' -> G, together with `a_to_k`: A' -> K such that
/// f ∘ a_to_k is the square's arrow into L, returns the unique C' -> D
/// commuting with d and k.
Homomorphism final_pbc_mediator(const SquareResult& pbc, const Homomorphism& m,
                                const Homomorphism& c_to_g, const Homomorphism& a_to_c,
                                const Homomorphism& a_to_k);

} // namespace sqpo
