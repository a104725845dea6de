// Batch front end: validate hierarchies, list matches, rewrite and propagate.
// Exit codes: 0 success, 1 domain violation, 2 I/O or parse error.

#include <iostream>

#include <CLI11.hpp>

#include "sqpo/json_io.hpp"
#include "sqpo/propagation.hpp"

namespace {

using namespace sqpo;
namespace io = sqpo::json_io;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kIoError = 2;

int exit_code(const Error& e) {
    return e.kind() == ErrorKind::Io || e.kind() == ErrorKind::Parse ? kIoError : kViolation;
}

NodeMap parse_anchors(const std::vector<std::string>& anchors) {
    NodeMap out;
    for (const auto& a : anchors) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == a.size())
            throw Error(ErrorKind::Parse, "anchor '" + a + "' is not of the form pattern=node");
        out[a.substr(0, eq)] = a.substr(eq + 1);
    }
    return out;
}

void emit(const io::Json& j, const std::string& path) {
    if (path.empty() || path == "-")
        std::cout << io::dump(j);
    else
        io::write_file(path, j);
}

int cmd_validate(const std::string& file) {
    Hierarchy h = io::hierarchy_from_json(io::read_file(file), false);
    const auto problems = validate_structure(h);
    for (const auto& p : problems) std::cout << "STRUCTURE " << p << "\n";
    if (!problems.empty()) return kViolation;
    const auto violations = validate_commutativity(h);
    for (const auto& v : violations) std::cout << v.describe() << "\n";
    return violations.empty() ? kOk : kViolation;
}

struct MatchArgs {
    std::string hierarchy, object, rule, kind = "restrictive";
    std::vector<std::string> anchors;
};

int cmd_match(const MatchArgs& a) {
    Hierarchy h = io::hierarchy_from_json(io::read_file(a.hierarchy));
    Rule rule = io::rule_from_json(io::read_file(a.rule));
    const MatchKind kind = a.kind == "expansive" ? MatchKind::Expansive : MatchKind::Restrictive;
    io::Json out = io::Json::array();
    for (const auto& m : find_matches(rule, h.object(a.object), kind, parse_anchors(a.anchors)))
        out.push_back(io::map_to_json(m.instance.map));
    std::cout << io::dump(out);
    return kOk;
}

struct RewriteArgs {
    std::string hierarchy, object, rule, direction = "fwd";
    std::size_t match_index = 0;
    std::string plan, relation, output, report;
    bool canonical = false;
};

int report_violations(const std::vector<PlanViolation>& violations) {
    for (const auto& v : violations) std::cerr << "COMPOSABILITY " << v.where << ": " << v.message << "\n";
    return kViolation;
}

int cmd_rewrite(const RewriteArgs& a) {
    Hierarchy h = io::hierarchy_from_json(io::read_file(a.hierarchy));
    Rule rule = io::rule_from_json(io::read_file(a.rule));
    const Direction direction = a.direction == "bwd" ? Direction::Backward : Direction::Forward;
    const auto matches = find_matches(rule, h.object(a.object), MatchKind::Restrictive);
    if (a.match_index >= matches.size())
        throw Error(ErrorKind::UnknownElement, "match index " + std::to_string(a.match_index) + " out of range (" +
                                                   std::to_string(matches.size()) + " matches)");
    const Homomorphism& m = matches[a.match_index].instance;

    std::vector<RewriteReport> reports;
    if (!a.relation.empty()) {
        RelationPlan plan = plan_from_relation(h, direction, a.object, rule, m,
                                               io::relation_from_json(io::read_file(a.relation)));
        if (auto v = check_composability(h, plan.plan); !v.empty()) return report_violations(v);
        reports = propagate_with_relation(h, plan);
    } else {
        PropagationPlan plan = a.plan.empty() ? canonical_plan(h, direction, a.object, rule, m)
                                              : io::plan_from_json(io::read_file(a.plan), h, rule, m.map);
        if (plan.direction != direction) throw Error(ErrorKind::MismatchedEndpoints, "plan direction differs from --direction");
        if (plan.origin != a.object) throw Error(ErrorKind::MismatchedEndpoints, "plan origin differs from the object");
        if (auto v = check_composability(h, plan); !v.empty()) return report_violations(v);
        reports.push_back(propagate(h, plan));
    }

    emit(io::hierarchy_to_json(h), a.output);
    if (!a.report.empty()) {
        io::Json j = io::Json::array();
        for (const auto& r : reports) j.push_back(io::report_to_json(r));
        io::write_file(a.report, j);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SqPO rewriting and propagation in graph hierarchies"};
    app.require_subcommand(1);

    std::string validate_file;
    auto* validate = app.add_subcommand("validate", "Check arrows and path commutativity of a hierarchy");
    validate->add_option("hierarchy", validate_file, "Hierarchy JSON file")->required();

    MatchArgs ma;
    auto* match = app.add_subcommand("match", "List the matches of a rule in one object, as JSON");
    match->add_option("hierarchy", ma.hierarchy, "Hierarchy JSON file")->required();
    match->add_option("object", ma.object, "Object to match in")->required();
    match->add_option("rule", ma.rule, "Rule JSON file")->required();
    match->add_option("--kind", ma.kind, "Match the lhs (restrictive) or the interface (expansive)")
        ->check(CLI::IsMember({"restrictive", "expansive"}));
    match->add_option("--anchor", ma.anchors, "Pin a pattern node: pattern=node");

    RewriteArgs ra;
    auto* rewrite = app.add_subcommand("rewrite", "Rewrite one object and propagate the change");
    rewrite->add_option("hierarchy", ra.hierarchy, "Hierarchy JSON file")->required();
    rewrite->add_option("object", ra.object, "Object to rewrite")->required();
    rewrite->add_option("rule", ra.rule, "Rule JSON file")->required();
    rewrite->add_option("match-index", ra.match_index, "Index into the restrictive match list")->required();
    rewrite->add_option("--direction", ra.direction, "fwd for expansive rules, bwd for restrictive ones")
        ->check(CLI::IsMember({"fwd", "bwd"}));
    auto* plan = rewrite->add_option("--plan", ra.plan, "Propagation plan JSON file");
    auto* relation = rewrite->add_option("--relation", ra.relation, "Relation JSON file");
    auto* canonical = rewrite->add_flag("--canonical", ra.canonical, "Trivial factorization everywhere (default)");
    plan->excludes(relation)->excludes(canonical);
    relation->excludes(canonical);
    rewrite->add_option("-o,--output", ra.output, "Where to write the rewritten hierarchy (default stdout)");
    rewrite->add_option("--report", ra.report, "Where to write the rewrite reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kIoError;
    }

    try {
        if (*validate) return cmd_validate(validate_file);
        if (*match) return cmd_match(ma);
        return cmd_rewrite(ra);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "Parse: " << e.what() << "\n";
        return kIoError;
    }
}
