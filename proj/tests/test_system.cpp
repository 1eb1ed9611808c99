#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "corpus.hpp"
#include "sesstool/system.hpp"

using namespace sess;

static P pp(const std::string& s) { return parse_process(s); }

static const SourceFile& proto() { return corpus("protocol.sess"); }

static SystemDef replace_component(SystemDef sys, const Name& role, const P& p) {
    for (auto& [r, q] : sys.components)
        if (r == role) q = p;
    return sys;
}

// Moves the n-th send of `msg` to the other auction channel.
static P retarget(const P& p, const Name& msg, int n, int& seen, std::string& moved) {
    if (!p) return p;
    P l = p->left, r = p->right;
    if (p->kind == PK::Prefix && p->act.kind == ActKind::Send && p->act.msg == msg && seen++ == n) {
        Action a = p->act;
        const Name base = base_name(a.chan);
        a.chan = (base == "a12" ? "a13" : "a12") + a.chan.substr(base.size());
        moved = p->act.chan + " -> " + a.chan;
        return prefix(a, l);
    }
    l = retarget(l, msg, n, seen, moved);
    r = retarget(r, msg, n, seen, moved);
    auto q = std::make_shared<Proc>(*p);
    q->left = l;
    q->right = r;
    return q;
}

TEST_CASE("the protocol system is well-typed") {
    auto rep = well_typed_system(proto().system_def("SysE"), "Proto", proto().session("Proto"), proto().env());
    CHECK(rep.passed);
    CHECK(rep.participants_ok);
    CHECK(rep.marking_ok);
    CHECK(rep.problems.empty());
    REQUIRE(rep.components.size() == 5);
    for (auto& c : rep.components) CHECK(c.check.passed);
}

TEST_CASE("corpus systems are well-typed") {
    auto& cs = corpus("client_server.sess");
    CHECK(well_typed_system(cs.system_def("ClientServer"), "CSsystem", cs.session("CSsystem"), cs.env()).passed);
    auto& q = corpus("quote_request.sess");
    CHECK(well_typed_system(q.system_def("Quote"), "QuoteReq", q.session("QuoteReq"), q.env()).passed);
}

TEST_CASE("a component replaced by 0 fails with a role disagreement") {
    auto sys = replace_component(proto().system_def("SysE"), "bank", nil());
    auto rep = well_typed_system(sys, "Proto", proto().session("Proto"), proto().env());
    CHECK_FALSE(rep.passed);
    CHECK(rep.participants_ok);
    for (auto& c : rep.components) {
        CAPTURE(c.role);
        CHECK(c.check.passed == (c.role != "bank"));
        if (c.role == "bank") {
            CHECK(c.check.role_disagreement);
            CHECK(c.slices.has_value());
        }
    }
}

TEST_CASE("participant set mismatch") {
    auto sys = proto().system_def("SysE");
    std::erase_if(sys.components, [](auto& c) { return c.first == "seller"; });
    auto rep = well_typed_system(sys, "Proto", proto().session("Proto"), proto().env());
    CHECK_FALSE(rep.passed);
    CHECK_FALSE(rep.participants_ok);
    REQUIRE_FALSE(rep.problems.empty());
    CHECK(rep.problems.front().find("missing seller") != std::string::npos);
}

TEST_CASE("environment must bind exactly the marking channels") {
    TypeEnv env = proto().env();
    env.bindings.push_back({"extra", "EPay"});
    auto rep = well_typed_system(proto().system_def("SysE"), "Proto", proto().session("Proto"), env);
    CHECK_FALSE(rep.marking_ok);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("channel privacy") {
    auto v = check_channel_privacy(proto().system_def("SysE"));
    CHECK(v.outcome == Outcome::Pass);
    CHECK(v.exhaustive);
    CHECK(v.states > 10);

    SystemDef shared{{{"r1", pp("c!v.0")}, {"r2", pp("c?v.0")}, {"r3", pp("c?v.0")}}};
    auto f = check_channel_privacy(shared);
    CHECK(f.outcome == Outcome::Fail);
    CHECK(f.trace.empty());  // violated at the root
    CHECK(f.reason.find("2 other holders") != std::string::npos);

    CHECK(check_channel_privacy(SystemDef{}).outcome == Outcome::Pass);
    SystemDef pair{{{"r1", pp("c!v.0")}, {"r2", pp("c?v.0")}}};
    CHECK(check_channel_privacy(pair).outcome == Outcome::Pass);
}

TEST_CASE("privacy fails when a third component shares a channel") {
    auto f = parse(
        "session B = <1,2:v> -> end\n"
        "channel a : B\n"
        "process P1 = a!inv[2..2](c).e!v.0\n"
        "process P2 = a?acc[2](c).e?v.0\n"
        "process P3 = e?v.0\n"
        "system Clash = r1: P1 | r2: P2 | r3: P3\n");
    auto v = check_channel_privacy(f.system_def("Clash"));
    CHECK(v.outcome == Outcome::Fail);
    // session-established channels are private
    auto g = parse(
        "session B = <1,2:v> -> end\n"
        "channel a : B\n"
        "process P1 = a!inv[2..2](c).c!v.0\n"
        "process P2 = a?acc[2](c).c?v.0\n"
        "process P3 = a?acc[2](c).c?v.0\n"
        "system Two = r1: P1 | r2: P2 | r3: P3\n");
    auto w = check_channel_privacy(g.system_def("Two"));
    CHECK(w.outcome == Outcome::Pass);
    CHECK(w.states == 5);  // root, two alternative sessions, each after its message
}

TEST_CASE("conformance") {
    auto& f = proto();
    auto v = check_conformance(f.system_def("SysE"), f.session("Proto"), f.env());
    CHECK(v.outcome == Outcome::Pass);
    CHECK(v.exhaustive);

    SystemDef quiet{{{"p", pp("a!v.0")}}};
    CHECK(check_conformance(quiet, s_end(), TypeEnv{}).outcome == Outcome::Pass);

    auto& cs = corpus("client_server.sess");
    CHECK(check_conformance(cs.system_def("ClientServer"), cs.session("CSsystem"), cs.env()).outcome ==
          Outcome::Pass);
    auto& q = corpus("quote_request.sess");
    CHECK(check_conformance(q.system_def("Quote"), q.session("QuoteReq"), q.env()).outcome == Outcome::Pass);
}

TEST_CASE("a quote sent to the wrong buyer breaks conformance") {
    auto& f = proto();
    for (int n = 0; n < 4; ++n) {
        auto sys = f.system_def("SysE");
        int seen = 0;
        std::string moved;
        sys = replace_component(sys, "broker", retarget(sys.components[0].second, "quote", n, seen, moved));
        REQUIRE_FALSE(moved.empty());
        CAPTURE(moved);
        auto v = check_conformance(sys, f.session("Proto"), f.env());
        CHECK(v.outcome == Outcome::Fail);
        REQUIRE_FALSE(v.trace.empty());
        CHECK(v.trace.front().find("establish a session on auc") != std::string::npos);
        CHECK(v.trace.back().find("quote") != std::string::npos);
        CHECK(v.reason.find("no session step matches") == 0);
    }
}

TEST_CASE("a misdirected invoice only blocks") {
    // The receiving buyer always has to bid before it accepts an invoice, so
    // the retargeted send never meets a partner: no redex, no violation.
    auto& f = proto();
    for (int n = 0; n < 4; ++n) {
        auto sys = f.system_def("SysE");
        int seen = 0;
        std::string moved;
        sys = replace_component(sys, "broker", retarget(sys.components[0].second, "invoice", n, seen, moved));
        REQUIRE_FALSE(moved.empty());
        CAPTURE(moved);
        CHECK(check_conformance(sys, f.session("Proto"), f.env()).outcome == Outcome::Pass);
    }
}

TEST_CASE("an unmatched communication fails at the root") {
    auto f = parse(
        "session B = <1,2:v> -> end\n"
        "session A = <p,q:B> {}\n"
        "channel a : B\n"
        "process Send = x!m.0\n"
        "process Recv = x?m.0\n"
        "system Bad = p: Send | q: Recv\n");
    auto v = check_conformance(f.system_def("Bad"), f.session("A"), f.env());
    CHECK(v.outcome == Outcome::Fail);
    CHECK(v.trace.size() == 1);
}

TEST_CASE("verdicts are invariant under congruent systems") {
    auto& f = proto();
    auto sys = f.system_def("SysE");
    auto variant = sys;
    for (auto& [r, p] : variant.components) p = par(nil(), sum(p, nil()));
    CHECK(check_conformance(variant, f.session("Proto"), f.env()).outcome == Outcome::Pass);
    CHECK(check_channel_privacy(variant).outcome == Outcome::Pass);
}

TEST_CASE("a tight budget gives unknown rather than a wrong verdict") {
    auto& f = proto();
    ExplorationBudget b{1, 2, 3};
    CHECK(check_conformance(f.system_def("SysE"), f.session("Proto"), f.env(), b).outcome == Outcome::Unknown);
    CHECK(check_channel_privacy(f.system_def("SysE"), b).outcome == Outcome::Unknown);
}
