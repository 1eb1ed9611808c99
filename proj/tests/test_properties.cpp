#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "properties.hpp"

using namespace sess;

static const std::vector<props::Sample>& samples() {
    static const auto s = props::typable_samples(500, 2024);
    return s;
}

static void report(const props::Stats& st) {
    MESSAGE(st.summary());
    for (auto& e : st.examples) MESSAGE(e);
    CHECK(st.ok());
}

TEST_CASE("at least 500 distinct typable processes are generated") {
    CHECK(samples().size() >= 500);
    size_t with_steps = 0, with_sessions = 0;
    for (auto& s : samples()) {
        CHECK(node_count(s.proc) <= 12);
        if (!proc_transitions(s.proc, props::property_budget()).items.empty()) ++with_steps;
        if (!proc_congruent(s.typing.session, nil())) ++with_sessions;
    }
    MESSAGE(with_steps << " with transitions, " << with_sessions << " with a non-trivial session typing");
    CHECK(with_steps > samples().size() / 2);
    CHECK(with_sessions > samples().size() / 2);
}

TEST_CASE("typing is invariant under congruence") { report(props::subject_congruence(samples(), 7)); }

TEST_CASE("transitions preserve typability") {
    auto st = props::subject_reduction(samples());
    CHECK(st.cases > 500);
    report(st);
}

TEST_CASE("typing is unique up to congruence") { report(props::typing_uniqueness(samples())); }

TEST_CASE("mismatched party counts are rejected") { report(props::ill_formed_establishments(200, 5)); }

TEST_CASE("a wrong typing is caught by the reduction check") {
    // Replacing the session typing by 0 must break the clauses for any
    // process with an establishment step.
    size_t caught = 0, tried = 0;
    for (auto& s : samples()) {
        if (proc_congruent(s.typing.session, nil())) continue;
        props::Sample bad = s;
        bad.typing.session = nil();
        auto st = props::subject_reduction({bad});
        if (st.checks == 0) continue;
        ++tried;
        caught += !st.ok();
        if (tried == 50) break;
    }
    CHECK(tried == 50);
    CHECK(caught > 0);
}

TEST_CASE("well-typed systems are private and conform") {
    auto r = props::system_properties(150, 99);
    MESSAGE(r.generated << " specifications, " << r.well_typed << " well-typed systems, " << r.decided
                        << " decided verdicts, " << r.nonlocal << " with a nonlocal choice (" << r.nonlocal_fail
                        << " of them fail conformance)");
    CHECK(r.well_typed >= 150);
    CHECK(r.conformance.cases >= 50);
    report(r.privacy);
    report(r.conformance);
}

TEST_CASE("a choice a participant takes no part in can be skipped") {
    // Race-free and well-typed, yet q and p both leave the union through the
    // branch they are absent from and meet in the continuation first.
    auto f = parse(std::string(props::session_decls()) +
                   "session A = (<q,r : B1> {} (+) <r,p : B1> {}) ; <q,p : B1> {}\n"
                   "channel b1_1 : B1\nchannel b1_2 : B1\nchannel b1_3 : B1\n");
    S spec = f.session("A");
    TypeEnv env = f.env();
    REQUIRE(well_formed(spec).passed);
    REQUIRE(race_free(spec).passed);
    CHECK_FALSE(props::local_choices(spec));
    std::mt19937 g(1);
    SystemDef sys;
    for (auto& r : pid(spec)) sys.components.push_back({r, props::implement(project_integrating(spec, r, env), env, g)});
    REQUIRE(well_typed_system(sys, "A", spec, env).passed);
    CHECK(check_channel_privacy(sys).outcome == Outcome::Pass);
    auto v = check_conformance(sys, spec, env);
    CHECK(v.outcome == Outcome::Fail);
    REQUIRE(v.trace.size() == 1);
    CHECK(v.trace.front() == "q,p establish a session on b1_3");
}
