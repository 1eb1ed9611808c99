#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "sesstool/congruence.hpp"
#include "sesstool/parser.hpp"
#include "sesstool/semantics.hpp"

using namespace sess;

static P pp(const std::string& s) { return parse_process(s); }
static S ss(const std::string& s) { return parse_session(s); }

static bool has(const TransitionSet& ts, const Action& a, const P& target) {
    for (auto& t : ts.items)
        if (to_string(t.label) == to_string(a) && proc_congruent(t.target, target)) return true;
    return false;
}

TEST_CASE("budget parsing") {
    ExplorationBudget d;
    CHECK(d.max_rec_unfold == 4);
    CHECK(d.max_depth == 32);
    CHECK(d.max_states == 20000);
    auto b = ExplorationBudget::parse("2,10,500");
    CHECK(b.max_rec_unfold == 2);
    CHECK(b.max_depth == 10);
    CHECK(b.max_states == 500);
    CHECK_THROWS(ExplorationBudget::parse("0"));
    CHECK_THROWS(ExplorationBudget::parse("x"));
    setenv("SESSTOOL_BUDGET", "3", 1);
    CHECK(ExplorationBudget::from_env().max_rec_unfold == 3);
    unsetenv("SESSTOOL_BUDGET");
    CHECK(ExplorationBudget::from_env().max_rec_unfold == 4);
}

TEST_CASE("prefix and communication steps") {
    auto t1 = proc_transitions(pp("a!v.0"));
    REQUIRE(t1.items.size() == 1);
    CHECK(has(t1, Action::send("a", "v"), nil()));
    auto t2 = proc_transitions(pp("a!v.0 | a?v.0"));
    CHECK(has(t2, Action::tau(), nil()));
    CHECK(has(t2, Action::send("a", "v"), pp("a?v.0")));
    CHECK(has(t2, Action::recv("a", "v"), pp("a!v.0")));
    CHECK(t2.items.size() == 3);
    // message mismatch does not communicate
    auto t3 = proc_transitions(pp("a!v.0 | a?u.0"));
    for (auto& t : t3.items) CHECK(t.label.kind != ActKind::Silent);
}

TEST_CASE("session establishment") {
    auto t = proc_transitions(pp("a!inv[2..2](c).c!v.0 | a?acc[2](c).c?v.0"));
    bool found = false;
    for (auto& x : t.items)
        if (x.label.kind == ActKind::Silent && proc_congruent(x.target, pp("(new c)(c!v.0 | c?v.0)"))) found = true;
    CHECK(found);
    // three parties with distinct tuples on each side
    auto t3 = proc_transitions(pp("a!inv[2..3](c,d).c!v.0 | a?acc[2](e,f).e?v.0 | a?acc[3](g,h).h?u.0"));
    found = false;
    for (auto& x : t3.items)
        if (x.label.kind == ActKind::Silent &&
            proc_congruent(x.target, pp("(new c)(new d)(c!v.0 | c?v.0 | d?u.0)")))
            found = true;
    CHECK(found);
    // incomplete match does not fire
    auto t4 = proc_transitions(pp("a!inv[2..3](c,d).0 | a?acc[2](e,f).0"));
    for (auto& x : t4.items) CHECK(x.label.kind != ActKind::Silent);
}

TEST_CASE("hiding blocks visible steps on the hidden channel") {
    auto t = proc_transitions(pp("(new a)(a!v.0 | a?v.0 | b!u.0)"));
    for (auto& x : t.items) CHECK(x.label.chan != "a");
    CHECK(has(t, Action::tau(), pp("b!u.0")));
    CHECK(has(t, Action::send("b", "u"), pp("(new a)(a!v.0 | a?v.0)")));
}

TEST_CASE("labels and recursion") {
    auto t = proc_transitions(pp("l : a!v.0 | k : a?v.0"));
    CHECK(has(t, Action::tau(), pp("l : 0 | k : 0")));
    auto r = proc_transitions(pp("rec X . a!v.X"));
    CHECK(has(r, Action::send("a", "v"), pp("rec X . a!v.X")));
    auto u = proc_transitions(pp("rec X . X"));
    CHECK(u.items.empty());
    CHECK(u.truncated);
}

TEST_CASE("transitions respect congruence and sums") {
    const char* pairs[][2] = {{"a!v.0 | b?u.0", "b?u.0 | a!v.0"},
                              {"(new c)(c!v.0 | a?v.c?v.0)", "a?v.(new c)(c!v.0 | c?v.0)"},
                              {"rec X . (a!v.X + b!u.0)", "rec Y . (b!u.0 + a!v.Y)"}};
    for (auto& pr : pairs) {
        P a = pp(pr[0]), b = pp(pr[1]);
        if (!proc_congruent(a, b)) continue;
        auto ta = proc_transitions(a), tb = proc_transitions(b);
        CHECK(ta.items.size() == tb.items.size());
        for (auto& x : ta.items) CHECK(has(tb, x.label, x.target));
    }
    P p = pp("a!v.b!u.0"), q = pp("c?w.0 | c!w.0");
    auto ts = proc_transitions(sum(p, q));
    auto tp = proc_transitions(p), tq = proc_transitions(q);
    CHECK(ts.items.size() == tp.items.size() + tq.items.size());
    for (auto& x : tp.items) CHECK(has(ts, x.label, x.target));
    for (auto& x : tq.items) CHECK(has(ts, x.label, x.target));
}

TEST_CASE("session steps") {
    auto t = session_transitions(ss("<p,q:v> -> end"));
    REQUIRE(t.items.size() == 1);
    CHECK(t.items[0].label.str() == "p,q:v");
    CHECK(t.items[0].target->kind == SK::End);
    CHECK(session_transitions(s_end()).items.empty());

    auto f = parse(
        "session B = <1,2:m> -> end\n"
        "session A = <x,y : B> { <z,w : B> {} }\n");
    auto te = session_transitions(f.session("A"));
    REQUIRE(te.items.size() == 1);
    CHECK(te.items[0].label.kind == SessLabelKind::Establish);
    CHECK(te.items[0].label.str() == "x,y:B");
    S expected = s_prod(s_estab({"z", "w"}, "B", f.session("B"), s_end()), ss("<x,y:m> -> end"));
    CHECK(session_congruent(te.items[0].target, expected));

    // concatenation, union and product
    auto ts = session_transitions(ss("(<1,2:a> -> end (+) <1,3:b> -> end) ; <2,3:c> -> end"));
    CHECK(ts.items.size() == 2);
    auto tp = session_transitions(ss("<1,2:a> -> end (x) <3,4:b> -> end"));
    CHECK(tp.items.size() == 2);
    auto tr = session_transitions(ss("rec t . <1,2:a> -> t"));
    REQUIRE(tr.items.size() == 1);
    CHECK(session_congruent(tr.items[0].target, ss("rec t . <1,2:a> -> t")));
}

TEST_CASE("detached bodies run beside the integrating remainder") {
    auto f = parse(
        "session B = <1,2:m> -> end\n"
        "session A = <x,y : B> {} ; <y,z : B> {}\n");
    S a = f.session("A");
    auto in_place = session_transitions(a);
    REQUIRE(in_place.items.size() == 1);
    // the body stays on the left of the concatenation
    auto next = session_transitions(in_place.items[0].target);
    REQUIRE(next.items.size() == 1);
    CHECK(next.items[0].label.str() == "x,y:m");

    auto detached = session_transitions(a, {}, true);
    REQUIRE(detached.items.size() == 1);
    CHECK(session_congruent(detached.items[0].target,
                            s_prod(s_estab({"y", "z"}, "B", f.session("B"), s_end()), ss("<x,y:m> -> end"))));
    auto both = session_transitions(detached.items[0].target, {}, true);
    CHECK(both.items.size() == 2);
}

TEST_CASE("determinism") {
    CHECK(is_deterministic(pp("a!v.0")).value);
    CHECK(is_deterministic(pp("a!v.0 + a!u.0")).value);
    CHECK_FALSE(is_deterministic(pp("a!v.b!u.0 + a!v.c!w.0")).value);
    // independent communications on different channels stay deterministic
    CHECK(is_deterministic(pp("c1!v.0 | c2!v.c3!u.0 | c1?v.0 | c2?v.c3?u.0")).value);
    CHECK_FALSE(is_deterministic(pp("c!v.0 | c!v.c!u.0 | c?v.0 | c?v.c?u.0")).value);
}

TEST_CASE("stimulation") {
    P p = pp("a!v.b?u.0 | c!w.0");
    CHECK(stimulates(p, p).value);
    CHECK(stimulates(pp("a!v.0 + b!u.0"), pp("a!v.0")).value);
    CHECK_FALSE(stimulates(pp("a!v.0"), pp("a!v.0 + b!u.0")).value);
    CHECK(stimulates(pp("rec X . a!v.X"), pp("a!v.a!v.0")).value);
    CHECK_FALSE(stimulates(pp("a!v.a!v.0"), pp("rec X . a!v.X")).value);
    // invite/accept labels match up to the bound tuple names
    CHECK(stimulates(pp("a!inv[2..2](c).0"), pp("a!inv[2..2](d).0")).value);
}
