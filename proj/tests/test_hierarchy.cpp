#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sqpo/hierarchy.hpp"
#include "sqpo/json_io.hpp"

namespace sqpo {
namespace {

Graph discrete(std::initializer_list<const char*> ids) {
    Graph g;
    for (auto id : ids) g.add_node(id);
    return g;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorKind::Io;
}

Hierarchy chain_nam() {
    Hierarchy h;
    h.add_object("N", discrete({"n1", "n2"}));
    h.add_object("A", discrete({"a"}));
    h.add_object("M", discrete({"m"}));
    h.add_typing("N", "A", {{"n1", "a"}, {"n2", "a"}});
    h.add_typing("A", "M", {{"a", "m"}});
    return h;
}

TEST(Hierarchy, TwoObjectExampleIsValid) {
    Hierarchy h = fixtures::hierarchy("forward/hierarchy.json");
    EXPECT_TRUE(validate_commutativity(h).empty());
    EXPECT_TRUE(validate_structure(h).empty());
}

TEST(Hierarchy, EmptyObjectMapsAnywhere) {
    Hierarchy h = fixtures::hierarchy("set/hierarchy.json");
    EXPECT_TRUE(h.object("n0").empty());
    EXPECT_TRUE(validate_commutativity(h).empty());
}

TEST(Hierarchy, BrokenDiamondIsRejectedOnMutation) {
    auto j = json_io::read_file(fixtures::path("broken_diamond.json"));
    EXPECT_EQ(kind_of([&] { json_io::hierarchy_from_json(j); }), ErrorKind::CommutativityViolated);
}

TEST(Hierarchy, BrokenDiamondReportsOnePair) {
    auto j = json_io::read_file(fixtures::path("broken_diamond.json"));
    Hierarchy h = json_io::hierarchy_from_json(j, false);
    auto vs = validate_commutativity(h);
    ASSERT_EQ(vs.size(), 1u);
    EXPECT_EQ(vs.front().from, "top");
    EXPECT_EQ(vs.front().to, "bottom");
    EXPECT_EQ(vs.front().node, "p");
    EXPECT_EQ(vs.front().describe().rfind("PAIR top bottom: ", 0), 0u);
    EXPECT_NE(vs.front().describe().find("at node p"), std::string::npos);
}

TEST(Hierarchy, ValidDiamondByComposingOneLeg) {
    Hierarchy h;
    h.add_object("a", discrete({"x", "y"}));
    h.add_object("b", discrete({"u", "v"}));
    h.add_object("c", discrete({"s"}));
    h.add_object("d", discrete({"t", "t2"}));
    h.add_typing("a", "b", {{"x", "u"}, {"y", "v"}});
    h.add_typing("b", "d", {{"u", "t"}, {"v", "t2"}});
    h.add_typing("c", "d", {{"s", "t"}});
    // The second leg a -> c -> d must agree with a -> b -> d; only x may go to s.
    EXPECT_EQ(kind_of([&] { h.add_typing("a", "c", {{"x", "s"}, {"y", "s"}}); }), ErrorKind::CommutativityViolated);
    Hierarchy g = h;
    g.add_object("e", discrete({"z"}));
    g.add_typing("e", "a", {{"z", "x"}});
    g.add_typing("e", "c", {{"z", "s"}});
    EXPECT_TRUE(validate_commutativity(g).empty());
    EXPECT_TRUE(hom_equal(composed_typing(g, "e", "d"), compose(g.typing("c", "d"), g.typing("e", "c"))));
}

TEST(Hierarchy, TreeIsValid) {
    Hierarchy h;
    h.add_object("r", discrete({"r"}));
    for (auto n : {"a", "b", "c"}) {
        h.add_object(n, discrete({"x"}));
        h.add_typing(n, "r", {{"x", "r"}});
    }
    EXPECT_TRUE(validate_commutativity(h).empty());
}

TEST(Hierarchy, MutationErrors) {
    Hierarchy h = chain_nam();
    EXPECT_EQ(kind_of([&] { h.add_typing("M", "N", {{"m", "n1"}}); }), ErrorKind::CycleIntroduced);
    EXPECT_EQ(kind_of([&] { h.add_typing("N", "M", {{"n1", "zz"}, {"n2", "m"}}); }), ErrorKind::InvalidHomomorphism);
    EXPECT_EQ(kind_of([&] { h.add_typing("N", "Q", {}); }), ErrorKind::UnknownElement);
    EXPECT_EQ(kind_of([&] { h.add_object("N", {}); }), ErrorKind::IdCollision);
}

TEST(Hierarchy, StructureReportsDanglingAndCycles) {
    Hierarchy h = Hierarchy::from_parts({{"a", discrete({"x"})}, {"b", discrete({"y"})}},
                                        {{{"a", "b"}, {{"x", "y"}}}, {{"b", "a"}, {{"y", "x"}}}, {{"a", "q"}, {}}});
    auto problems = validate_structure(h);
    bool cycle = false, unknown = false;
    for (const auto& p : problems) {
        cycle = cycle || p.find("cycle") != std::string::npos;
        unknown = unknown || p.find("q") != std::string::npos;
    }
    EXPECT_TRUE(cycle);
    EXPECT_TRUE(unknown);
}

TEST(Hierarchy, SkeletonTyping) {
    Hierarchy h = chain_nam();
    Skeleton s{{"data", "schema", "meta"}, {{"data", "schema"}, {"schema", "meta"}}};
    h.set_skeleton(s, {{"N", "data"}, {"A", "schema"}, {"M", "meta"}});
    EXPECT_TRUE(validate_structure(h).empty());
    Hierarchy bad = chain_nam();
    EXPECT_EQ(kind_of([&] { bad.set_skeleton(s, {{"N", "data"}, {"A", "meta"}, {"M", "meta"}}); }),
              ErrorKind::InvalidHomomorphism);
    Skeleton cyclic{{"x"}, {{"x", "x"}}};
    EXPECT_EQ(kind_of([&] { bad.set_skeleton(cyclic, {{"N", "x"}, {"A", "x"}, {"M", "x"}}); }),
              ErrorKind::CycleIntroduced);
}

TEST(Subgraphs, TwoObjects) {
    Hierarchy h = fixtures::hierarchy("forward/hierarchy.json");
    auto f = forward_subgraph(h, "G");
    EXPECT_EQ(f.nodes, (std::set<ObjectName>{"G", "T"}));
    auto b = backward_subgraph(h, "T");
    EXPECT_EQ(b.nodes, (std::set<ObjectName>{"G", "T"}));
    EXPECT_EQ(forward_subgraph(h, "T").nodes, (std::set<ObjectName>{"T"}));
}

TEST(Subgraphs, SetExample) {
    Hierarchy h = fixtures::hierarchy("set/hierarchy.json");
    auto f = forward_subgraph(h, "n0");
    EXPECT_EQ(f.nodes.size(), 3u);
    EXPECT_EQ(f.sinks(), (std::set<ObjectName>{"n1", "n2"}));
    EXPECT_EQ(f.sources(), (std::set<ObjectName>{"n0"}));
    EXPECT_EQ(waves(f, true), (std::vector<std::vector<ObjectName>>{{"n1", "n2"}, {"n0"}}));
    EXPECT_EQ(waves(f, false), (std::vector<std::vector<ObjectName>>{{"n0"}, {"n1", "n2"}}));
}

TEST(Subgraphs, ChainMiddle) {
    Hierarchy h = chain_nam();
    EXPECT_EQ(forward_subgraph(h, "A").nodes, (std::set<ObjectName>{"A", "M"}));
    EXPECT_EQ(backward_subgraph(h, "A").nodes, (std::set<ObjectName>{"N", "A"}));
    EXPECT_EQ(kind_of([&] { forward_subgraph(h, "Z"); }), ErrorKind::UnknownElement);
}

TEST(Subgraphs, SecondParentOutsideTheScope) {
    // G0 -> G1 <- X: G1 is below G0 and is rewritten with it, although X also types into it.
    Hierarchy h;
    h.add_object("G0", discrete({"a"}));
    h.add_object("G1", discrete({"b"}));
    h.add_object("X", discrete({"c"}));
    h.add_typing("G0", "G1", {{"a", "b"}});
    h.add_typing("X", "G1", {{"c", "b"}});
    EXPECT_EQ(forward_subgraph(h, "G0").nodes, (std::set<ObjectName>{"G0", "G1"}));
    EXPECT_EQ(backward_subgraph(h, "G1").nodes, (std::set<ObjectName>{"G0", "G1", "X"}));
}

void expect_unique_end(const Hierarchy& h, const SubHierarchy& sub, bool forward) {
    const std::set<ObjectName> ends = forward ? sub.sources() : sub.sinks();
    EXPECT_EQ(ends, std::set<ObjectName>{sub.root});
    for (const auto& [a, b] : sub.edges) EXPECT_TRUE(sub.contains(a) && sub.contains(b) && h.has_typing(a, b));
    for (const auto& [e, _] : h.typings())
        if (sub.contains(e.first) && sub.contains(e.second)) {
            EXPECT_TRUE(sub.edges.count(e));
        }
}

SubHierarchy with_node(const Hierarchy& h, SubHierarchy sub, const ObjectName& n) {
    sub.nodes.insert(n);
    for (const auto& [e, _] : h.typings())
        if (sub.contains(e.first) && sub.contains(e.second)) sub.edges.insert(e);
    return sub;
}

TEST(Subgraphs, RandomUniqueEndsAndMaximality) {
    gen::Rng rng(8);
    gen::Shape shape{1, 3, 0.3, 0.3, 2, 2};
    for (int i = 0; i < 60; ++i) {
        Hierarchy h = gen::random_hierarchy(rng, 2 + gen::pick(rng, 5), shape);
        ASSERT_TRUE(validate_commutativity(h).empty());
        for (const auto& [s, _] : h.objects()) {
            for (bool forward : {true, false}) {
                SubHierarchy sub = forward ? forward_subgraph(h, s) : backward_subgraph(h, s);
                expect_unique_end(h, sub, forward);
                std::set<ObjectName> adjacent;
                for (const auto& [e, __] : h.typings()) {
                    if (sub.contains(e.first) && !sub.contains(e.second)) adjacent.insert(e.second);
                    if (sub.contains(e.second) && !sub.contains(e.first)) adjacent.insert(e.first);
                }
                for (const auto& n : adjacent) {
                    SubHierarchy bigger = with_node(h, sub, n);
                    EXPECT_NE(forward ? bigger.sources() : bigger.sinks(), std::set<ObjectName>{s});
                }
            }
        }
    }
}

TEST(ComposedTyping, IdentityAndChain) {
    Hierarchy h = chain_nam();
    EXPECT_TRUE(hom_equal(composed_typing(h, "A", "A"), identity(h.object("A"))));
    EXPECT_TRUE(hom_equal(composed_typing(h, "N", "M"), compose(h.typing("A", "M"), h.typing("N", "A"))));
    EXPECT_EQ(kind_of([&] { composed_typing(h, "M", "N"); }), ErrorKind::NoPath);
}

TEST(ComposedTyping, RandomCompositionLaw) {
    gen::Rng rng(9);
    gen::Shape shape{1, 3, 0.3, 0.3, 2, 2};
    for (int i = 0; i < 40; ++i) {
        Hierarchy h = gen::random_hierarchy(rng, 3 + gen::pick(rng, 4), shape);
        for (const auto& [a, _] : h.objects())
            for (const auto& b : forward_subgraph(h, a).nodes)
                for (const auto& c : forward_subgraph(h, b).nodes)
                    EXPECT_TRUE(hom_equal(composed_typing(h, a, c),
                                          compose(composed_typing(h, b, c), composed_typing(h, a, b))));
    }
}

TEST(Waves, EveryObjectOnceAfterItsPrerequisites) {
    gen::Rng rng(10);
    for (int i = 0; i < 40; ++i) {
        Hierarchy h = gen::random_hierarchy(rng, 2 + gen::pick(rng, 5), {1, 3, 0.3, 0.3, 2, 2});
        for (const auto& [s, _] : h.objects()) {
            SubHierarchy sub = forward_subgraph(h, s);
            std::map<ObjectName, std::size_t> wave_of;
            auto ws = waves(sub, true);
            for (std::size_t w = 0; w < ws.size(); ++w)
                for (const auto& n : ws[w]) EXPECT_TRUE(wave_of.emplace(n, w).second);
            EXPECT_EQ(wave_of.size(), sub.nodes.size());
            for (const auto& [a, b] : sub.edges) EXPECT_LT(wave_of.at(b), wave_of.at(a));
        }
    }
}

} // namespace
} // namespace sqpo
