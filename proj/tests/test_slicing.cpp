#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "mutants.hpp"
#include "protocol_expectations.hpp"
#include "sesstool/congruence.hpp"
#include "sesstool/projection.hpp"
#include "sesstool/slicing.hpp"
#include "sesstool/typing.hpp"

using namespace sess;

static P pp(const std::string& s) { return parse_process(s); }

TEST_CASE("slice clauses") {
    CHECK(proc_congruent(main_slice(pp("a!v.0")), nil()));
    CHECK(proc_congruent(main_slice(pp("a!inv[2..2](c).c!v.0")), pp("a!inv[2..2](c).0")));
    CHECK(proc_congruent(channel_slice(pp("a!inv[2..2](c).c!v.0"), {"c"}), pp("c!v.0")));
    CHECK(proc_congruent(channel_slice(nil(), {"c"}), nil()));
    CHECK(proc_congruent(main_slice(pp("a!inv[2..2](c).c!v.0 | b?acc[2](d).d?u.0")),
                         pp("a!inv[2..2](c).0 | b?acc[2](d).0")));
    CHECK_THROWS_AS(main_slice(pp("(new c) c!v.0")), UnsupportedOperator);
    CHECK_THROWS_AS(channel_slice(pp("l : c!v.0"), {"c"}), UnsupportedOperator);
}

TEST_CASE("recursion variables follow their nearest prefix") {
    P p = pp("a!inv[2..2](c).rec X.(c!v.X + c!u.0)");
    CHECK(proc_congruent(channel_slice(p, {"c"}), pp("rec X.(c!v.X + c!u.0)")));
    CHECK(proc_congruent(main_slice(p), pp("a!inv[2..2](c).0")));
    P q = pp("rec X.a!inv[2..2](c).(c!v.0 | X)");
    CHECK(proc_congruent(main_slice(q), pp("rec X.a!inv[2..2](c).X")));
    CHECK(proc_congruent(channel_slice(q, {"c"}), pp("c!v.0")));
    // an explicit placement overrides the nearest prefix
    VariablePlacement vp{{"X", {}}};
    CHECK(proc_congruent(raw_channel_slice(pp("c!v.X"), {"c"}, vp), pp("c!v.0")));
    CHECK(proc_congruent(raw_main_slice(pp("c!v.X"), vp), var("X")));
}

TEST_CASE("broker slices coincide with its roles") {
    auto& f = corpus("protocol.sess");
    P broker = f.process("Broker");
    S spec = f.session("Proto");
    auto inf = infer_principal(f.env(), broker);
    REQUIRE(inf.ok());
    auto vp = inf.typing->variable_tuples;
    CHECK(congruent_modulo_absorption(main_slice(broker, vp), project_integrating(spec, "broker", f.env())));
    auto tuple = broker->act.tuple;
    CHECK(congruent_modulo_absorption(channel_slice(broker, tuple, vp),
                                      role_instance("Auction", f.session("Auction"), 1, tuple)));
}

static const auto& kSystems = expect::corpus_systems();

TEST_CASE("typable components have agreeing slices") {
    for (auto& cs : kSystems) {
        auto& f = corpus(cs.file);
        S spec = f.session(cs.spec);
        for (auto& [r, p] : f.system_def(cs.system).components) {
            CAPTURE(r);
            REQUIRE(check_against(f.env(), p, project_integrating(spec, r, f.env())).passed);
            auto rep = diagnose(f.env(), p, cs.spec, spec, r);
            CHECK(rep.all_pass);
            CHECK_FALSE(rep.caveat.empty());
            for (auto& v : rep.verdicts) CHECK_MESSAGE(v.pass, v.kind << " " << v.session << ": " << v.mismatch);
        }
    }
}

TEST_CASE("slices of the untypable counterexample agree") {
    auto& f = corpus("prop3.sess");
    auto rep = diagnose(f.env(), f.process("P1"), "A0", f.session("A0"), "p");
    CHECK(rep.all_pass);
    CHECK(rep.verdicts.size() == 3);
    CHECK(rep.caveat == kSliceCaveat);
}

TEST_CASE("single-prefix deletions flag exactly the mutated session") {
    size_t count = 0;
    for (auto& cs : kSystems) {
        auto& f = corpus(cs.file);
        S spec = f.session(cs.spec);
        for (auto& [r, p] : f.system_def(cs.system).components) {
            for (auto& [m, chan] : mutants::prefix_deletions(p)) {
                ++count;
                CAPTURE(r);
                CAPTURE(print(m));
                auto rep = diagnose(f.env(), m, cs.spec, spec, r);
                CHECK_FALSE(rep.all_pass);
                for (auto& v : rep.verdicts) {
                    bool mutated = std::find(v.tuple.begin(), v.tuple.end(), chan) != v.tuple.end();
                    CAPTURE(v.kind);
                    CAPTURE(v.session);
                    CHECK(v.pass != mutated);
                    if (!v.pass) CHECK_FALSE(v.mismatch.empty());
                }
            }
        }
    }
    CHECK(count > 50);
}

TEST_CASE("deleting an auction prefix of the broker flags only the auction") {
    auto& f = corpus("protocol.sess");
    P broker = f.process("Broker");
    auto ms = mutants::prefix_deletions(broker);
    REQUIRE_FALSE(ms.empty());
    auto rep = diagnose(f.env(), ms.front().first, "Proto", f.session("Proto"), "broker");
    for (auto& v : rep.verdicts) CHECK(v.pass == (v.session != "Auction"));
}

static P random_term(std::mt19937& g, int size) {
    static const char* chans[] = {"a", "b", "c", "d"};
    std::uniform_int_distribution<int> pick(0, 6), ch(0, 3);
    if (size <= 1) return pick(g) < 5 ? nil() : var("X");
    switch (pick(g)) {
        case 0: return prefix(Action::send(chans[ch(g)], "v"), random_term(g, size - 1));
        case 1: return prefix(Action::recv(chans[ch(g)], "v"), random_term(g, size - 1));
        case 2: return prefix(Action::invite(chans[ch(g)], 2, {"c"}), random_term(g, size - 1));
        case 3: return rec("X", random_term(g, size - 1));
        case 4: return sum(random_term(g, size / 2), random_term(g, size - size / 2));
        default: return par(random_term(g, size / 2), random_term(g, size - size / 2));
    }
}

TEST_CASE("slicing is homomorphic over parallel and sum") {
    std::mt19937 g(7);
    for (int i = 0; i < 300; ++i) {
        P a = random_term(g, 6), b = random_term(g, 6);
        CHECK(same(raw_main_slice(par(a, b)), par(raw_main_slice(a), raw_main_slice(b))));
        CHECK(same(raw_main_slice(sum(a, b)), sum(raw_main_slice(a), raw_main_slice(b))));
        CHECK(same(raw_channel_slice(par(a, b), {"c", "d"}),
                   par(raw_channel_slice(a, {"c", "d"}), raw_channel_slice(b, {"c", "d"}))));
    }
}

static void count_prefixes(const P& p, std::map<std::string, int>& out) {
    if (!p) return;
    if (p->kind == PK::Prefix) ++out[to_string(p->act)];
    count_prefixes(p->left, out);
    count_prefixes(p->right, out);
}

TEST_CASE("channel slices are disjoint") {
    std::mt19937 g(11);
    for (int i = 0; i < 300; ++i) {
        P p = random_term(g, 10);
        std::map<std::string, int> ab, cd;
        count_prefixes(raw_channel_slice(p, {"a", "b"}), ab);
        count_prefixes(raw_channel_slice(p, {"c", "d"}), cd);
        for (auto& [k, _] : ab) CHECK_FALSE(cd.count(k));
    }
}
