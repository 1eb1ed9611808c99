#include "sesstool/system.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "sesstool/congruence.hpp"
#include "sesstool/parser.hpp"
#include "sesstool/projection.hpp"

namespace sess {

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Pass: return "pass";
        case Outcome::Fail: return "fail";
        case Outcome::Unknown: return "unknown";
    }
    return "unknown";
}

SystemReport well_typed_system(const SystemDef& sys, const Name& spec_name, const S& spec, const TypeEnv& env) {
    SystemReport rep;

    NameSet roles;
    for (auto& [r, _] : sys.components)
        if (!roles.insert(r).second) rep.problems.push_back("participant " + r + " appears twice in the system");
    NameSet want = pid(spec);
    rep.participants_ok = roles == want && roles.size() == sys.components.size();
    if (roles != want) {
        std::string s = "participants of the system differ from those of " + spec_name + ":";
        for (auto& r : want)
            if (!roles.count(r)) s += " missing " + r + ";";
        for (auto& r : roles)
            if (!want.count(r)) s += " unexpected " + r + ";";
        rep.problems.push_back(s);
    }

    rep.marking_ok = true;
    auto marks = mark_session(spec, "", env).marks;
    std::set<std::pair<Name, Name>> marked;
    for (auto& m : marks) {
        if (m.prefix->kind != SK::Estab) continue;
        marked.insert({m.channel, m.prefix->body_name});
        if (env.session_name(m.channel) != m.prefix->body_name) {
            rep.marking_ok = false;
            rep.problems.push_back("establishment of " + m.prefix->body_name + " at " + m.path +
                                   " has no session channel bound to it");
        }
    }
    for (auto& [a, b] : env.bindings)
        if (!marked.count({a, b})) {
            rep.marking_ok = false;
            rep.problems.push_back("channel " + a + " is bound to " + b + " but marks no establishment of " +
                                   spec_name);
        }

    bool all = true;
    for (auto& [r, p] : sys.components) {
        ComponentCheck cc;
        cc.role = r;
        if (!want.count(r)) {
            cc.check.message = "participant " + r + " does not occur in " + spec_name;
            all = false;
            rep.components.push_back(std::move(cc));
            continue;
        }
        P expected;
        try {
            expected = project_integrating(spec, r, env);
        } catch (const std::exception& e) {
            cc.check.message = std::string("projection failed: ") + e.what();
        }
        if (expected) cc.check = check_against(env, p, expected);
        if (!cc.check.passed) {
            all = false;
            rep.problems.push_back(r + ": " + cc.check.message);
            try {
                cc.slices = diagnose(env, p, spec_name, spec, r);
            } catch (const std::exception& e) {
                cc.slice_error = e.what();
            }
        }
        rep.components.push_back(std::move(cc));
    }
    rep.passed = rep.participants_ok && rep.marking_ok && all;
    return rep;
}

namespace {

struct SysState {
    std::vector<P> comps;
    std::vector<Name> hidden;
};

P state_term(const std::vector<Name>& roles, const SysState& s) {
    std::vector<P> parts;
    for (size_t i = 0; i < roles.size(); ++i) parts.push_back(label(roles[i], s.comps[i]));
    P t = par_all(parts);
    for (size_t i = s.hidden.size(); i-- > 0;) t = hide(s.hidden[i], t);
    return t;
}

enum class RedexKind { Comm, Establish, Internal };

struct Redex {
    RedexKind kind;
    std::vector<size_t> parties;  // sender first for Comm, inviter first for Establish
    Name chan, msg;
    SysState next;
    std::string describe;
};

class SystemStepper {
public:
    SystemStepper(const SystemDef& sys, const ExplorationBudget& b) : budget_(b) {
        for (auto& [r, _] : sys.components) roles.push_back(r);
    }

    std::vector<Name> roles;
    bool truncated = false;

    std::string key(const SysState& s) const { return fingerprint(state_term(roles, s)); }

    std::vector<Redex> redexes(const SysState& s) {
        const size_t n = s.comps.size();
        std::vector<TransitionSet> ts(n);
        NameSet names(s.hidden.begin(), s.hidden.end());
        for (size_t i = 0; i < n; ++i) {
            ts[i] = proc_transitions(s.comps[i], budget_);
            truncated = truncated || ts[i].truncated;
            auto a = all_names(s.comps[i]);
            names.insert(a.begin(), a.end());
        }
        Fresh fresh(names);
        std::vector<Redex> out;
        auto with = [&](std::initializer_list<std::pair<size_t, P>> repl, const std::vector<Name>& extra) {
            SysState t = s;
            for (auto& [i, p] : repl) t.comps[i] = p;
            t.hidden.insert(t.hidden.end(), extra.begin(), extra.end());
            return prune(t);
        };
        for (size_t i = 0; i < n; ++i)
            for (auto& tr : ts[i].items) {
                if (tr.label.kind == ActKind::Silent) {
                    out.push_back({RedexKind::Internal, {i, i}, "", tr.via, with({{i, tr.target}}, {}),
                                   roles[i] + " steps internally (" + tr.via + ")"});
                } else if (tr.label.kind == ActKind::Send) {
                    for (size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        for (auto& rv : ts[j].items)
                            if (rv.label.kind == ActKind::Receive && rv.label.chan == tr.label.chan &&
                                rv.label.msg == tr.label.msg)
                                out.push_back({RedexKind::Comm, {i, j}, tr.label.chan, tr.label.msg,
                                               with({{i, tr.target}, {j, rv.target}}, {}),
                                               roles[i] + " -> " + roles[j] + " : " + tr.label.chan + "!" +
                                                   tr.label.msg});
                    }
                } else if (tr.label.kind == ActKind::Invite) {
                    establishments(s, ts, i, tr, fresh, out);
                }
            }
        return out;
    }

private:
    ExplorationBudget budget_;

    static SysState prune(SysState t) {
        NameSet live;
        for (auto& p : t.comps) {
            auto f = free_channels(p);
            live.insert(f.begin(), f.end());
        }
        std::erase_if(t.hidden, [&](const Name& h) { return !live.count(h); });
        return t;
    }

    void establishments(const SysState& s, const std::vector<TransitionSet>& ts, size_t i, const Transition& inv,
                        Fresh& fresh, std::vector<Redex>& out) {
        const int n = inv.label.num;
        std::vector<std::pair<size_t, const Transition*>> chosen;
        std::function<void(int)> pick = [&](int k) {
            if (k > n) {
                std::vector<Name> f;
                for (auto& c : inv.label.tuple) f.push_back(fresh(base_name(c)));
                auto rename = [&](const Transition& t) {
                    Renaming r;
                    for (size_t x = 0; x < f.size(); ++x) r[t.label.tuple[x]] = f[x];
                    return substitute(t.target, r);
                };
                SysState t = s;
                t.comps[i] = rename(inv);
                Redex rd{RedexKind::Establish, {i}, inv.label.chan, "", {}, ""};
                std::string who = roles[i];
                for (auto& [j, acc] : chosen) {
                    t.comps[j] = rename(*acc);
                    rd.parties.push_back(j);
                    who += "," + roles[j];
                }
                t.hidden.insert(t.hidden.end(), f.begin(), f.end());
                rd.next = prune(std::move(t));
                rd.describe = who + " establish a session on " + inv.label.chan;
                out.push_back(std::move(rd));
                return;
            }
            for (size_t j = 0; j < ts.size(); ++j) {
                if (j == i || std::any_of(chosen.begin(), chosen.end(), [&](auto& c) { return c.first == j; }))
                    continue;
                for (auto& a : ts[j].items) {
                    if (a.label.kind != ActKind::Accept || a.label.chan != inv.label.chan || a.label.num != k ||
                        a.label.tuple.size() != inv.label.tuple.size())
                        continue;
                    chosen.push_back({j, &a});
                    pick(k + 1);
                    chosen.pop_back();
                }
            }
        };
        pick(2);
    }
};

SysState initial_state(const SystemDef& sys) {
    SysState s;
    for (auto& [_, p] : sys.components) s.comps.push_back(rename_apart(p));
    return s;
}

void session_channels(const P& p, NameSet& out) {
    if (!p) return;
    if (p->kind == PK::Prefix && p->act.is_session()) out.insert(p->act.chan);
    session_channels(p->left, out);
    session_channels(p->right, out);
}

// Communication prefixes whose channel is free in p.
void free_comm_prefixes(const P& p, NameSet bound, std::vector<Action>& out) {
    if (!p) return;
    switch (p->kind) {
        case PK::Hide: bound.insert(p->name); break;
        case PK::Prefix:
            if (p->act.is_comm() && !bound.count(p->act.chan)) out.push_back(p->act);
            if (p->act.is_session()) bound.insert(p->act.tuple.begin(), p->act.tuple.end());
            break;
        default: break;
    }
    free_comm_prefixes(p->left, bound, out);
    free_comm_prefixes(p->right, bound, out);
}

}  // namespace

Verdict check_channel_privacy(const SystemDef& sys, const ExplorationBudget& budget) {
    Verdict v;
    v.budget = budget.describe();
    SystemStepper st(sys, budget);
    NameSet exempt;
    for (auto& [_, p] : sys.components) session_channels(p, exempt);

    struct Node {
        SysState s;
        size_t parent;
        std::string step;
        int depth;
    };
    std::vector<Node> nodes;
    std::map<std::string, size_t> seen;
    std::deque<size_t> queue;
    nodes.push_back({initial_state(sys), 0, "", 0});
    seen[st.key(nodes[0].s)] = 0;
    queue.push_back(0);
    bool cut = false;

    auto trace_to = [&](size_t id) {
        std::vector<std::string> t;
        for (size_t x = id; x != 0; x = nodes[x].parent) t.push_back(nodes[x].step);
        std::reverse(t.begin(), t.end());
        return t;
    };

    while (!queue.empty()) {
        size_t id = queue.front();
        queue.pop_front();
        const SysState s = nodes[id].s;
        for (size_t i = 0; i < s.comps.size(); ++i) {
            std::vector<Action> prefixes;
            free_comm_prefixes(s.comps[i], {}, prefixes);
            for (auto& a : prefixes) {
                if (exempt.count(a.chan)) continue;
                std::vector<Name> holders;
                for (size_t j = 0; j < s.comps.size(); ++j)
                    if (j != i && free_channels(s.comps[j]).count(a.chan)) holders.push_back(st.roles[j]);
                if (holders.size() == 1) continue;
                if (holders.empty()) {
                    std::string note = to_string(a) + " of " + st.roles[i] + " has no partner left";
                    if (std::find(v.notes.begin(), v.notes.end(), note) == v.notes.end()) v.notes.push_back(note);
                    continue;
                }
                v.outcome = Outcome::Fail;
                v.trace = trace_to(id);
                std::string hs;
                for (auto& h : holders) hs += (hs.empty() ? "" : ",") + h;
                v.reason = "prefix " + to_string(a) + " of " + st.roles[i] + " has " +
                           std::to_string(holders.size()) + " other holders of " + a.chan + " (" + hs +
                           ") in state " + print(state_term(st.roles, s));
                v.states = nodes.size();
                v.exhaustive = !st.truncated;
                return v;
            }
        }
        if (nodes[id].depth >= budget.max_depth) {
            cut = true;
            continue;
        }
        for (auto& r : st.redexes(s)) {
            auto k = st.key(r.next);
            if (seen.count(k)) continue;
            if (nodes.size() >= budget.max_states) {
                cut = true;
                continue;
            }
            seen[k] = nodes.size();
            nodes.push_back({r.next, id, r.describe, nodes[id].depth + 1});
            queue.push_back(nodes.size() - 1);
        }
    }
    v.states = nodes.size();
    v.exhaustive = !st.truncated;
    v.outcome = cut ? Outcome::Unknown : Outcome::Pass;
    if (cut) v.reason = "state budget exhausted before the reachable states were covered";
    return v;
}

namespace {

bool label_matches(const Redex& r, const SessLabel& l, const std::vector<Name>& roles, const TypeEnv& env) {
    if (r.kind == RedexKind::Comm)
        return l.kind == SessLabelKind::Comm && l.p == roles[r.parties[0]] && l.q == roles[r.parties[1]] &&
               l.msg == r.msg;
    if (r.kind == RedexKind::Internal)
        return l.kind == SessLabelKind::Comm && l.p == roles[r.parties[0]] && l.q == l.p;
    if (l.kind != SessLabelKind::Establish || l.parties.size() != r.parties.size()) return false;
    for (size_t x = 0; x < r.parties.size(); ++x)
        if (l.parties[x] != roles[r.parties[x]]) return false;
    S bound = env.session_of(r.chan);
    if (!bound) return false;
    if (!l.body_name.empty()) return l.body_name == env.session_name(r.chan);
    return session_congruent(l.body, bound);
}

}  // namespace

Verdict check_conformance(const SystemDef& sys, const S& spec, const TypeEnv& env, const ExplorationBudget& budget) {
    Verdict v;
    v.budget = budget.describe();
    SystemStepper st(sys, budget);

    struct Step {
        std::string describe;
        std::vector<std::pair<size_t, std::string>> succ;  // pair id, session label
        bool beyond_budget = false;  // a matching session step exists but its pair was not stored
    };
    struct Node {
        SysState s;
        S spec;
        int depth;
        bool expanded = false;
        std::vector<Step> steps;
    };
    std::vector<Node> nodes;
    std::map<std::string, size_t> seen;
    std::deque<size_t> queue;
    bool cut = false;

    auto intern = [&](SysState s, S sp, int depth) -> std::optional<size_t> {
        S ns = normalize(sp);
        std::string k = st.key(s) + "||" + fingerprint(ns);
        auto it = seen.find(k);
        if (it != seen.end()) return it->second;
        if (nodes.size() >= budget.max_states) {
            cut = true;
            return std::nullopt;
        }
        seen[k] = nodes.size();
        nodes.push_back({std::move(s), ns, depth});
        queue.push_back(nodes.size() - 1);
        return nodes.size() - 1;
    };
    intern(initial_state(sys), spec, 0);

    while (!queue.empty()) {
        size_t id = queue.front();
        queue.pop_front();
        if (nodes[id].depth >= budget.max_depth) {
            cut = true;
            continue;
        }
        SysState s = nodes[id].s;
        S sp = nodes[id].spec;
        int depth = nodes[id].depth;
        auto reds = st.redexes(s);
        auto sts = session_transitions(sp, budget, true);
        st.truncated = st.truncated || sts.truncated;
        std::vector<Step> steps;
        bool unmatched = false;
        for (auto& r : reds) {
            Step step{r.describe, {}};
            for (auto& t : sts.items) {
                if (!label_matches(r, t.label, st.roles, env)) continue;
                auto succ = intern(r.next, t.target, depth + 1);
                if (succ)
                    step.succ.push_back({*succ, t.label.str()});
                else
                    step.beyond_budget = true;
            }
            unmatched = unmatched || (step.succ.empty() && !step.beyond_budget);
            steps.push_back(std::move(step));
            if (unmatched && cut) break;
        }
        nodes[id].steps = std::move(steps);
        nodes[id].expanded = true;
    }

    // Greatest fixpoint: a pair stays related while every redex has a
    // related successor. Pairs left unexpanded by the budget count as related.
    const size_t none = static_cast<size_t>(-1);
    std::vector<size_t> bad_round(nodes.size(), none);
    for (size_t round = 0;; ++round) {
        std::vector<size_t> fresh_bad;
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (bad_round[i] != none || !nodes[i].expanded) continue;
            for (auto& step : nodes[i].steps) {
                bool ok = step.beyond_budget || std::any_of(step.succ.begin(), step.succ.end(),
                                      [&](auto& s) { return bad_round[s.first] == none; });
                if (!ok) {
                    fresh_bad.push_back(i);
                    break;
                }
            }
        }
        if (fresh_bad.empty()) break;
        for (auto i : fresh_bad) bad_round[i] = round;
    }

    v.states = nodes.size();
    v.exhaustive = !st.truncated;
    if (bad_round[0] != none) {
        v.outcome = Outcome::Fail;
        size_t cur = 0;
        while (true) {
            const Node& n = nodes[cur];
            const Step* failing = nullptr;
            for (auto& step : n.steps) {
                bool ok = step.beyond_budget || std::any_of(step.succ.begin(), step.succ.end(),
                                      [&](auto& s) { return bad_round[s.first] == none || bad_round[s.first] >= bad_round[cur]; });
                if (!ok) {
                    failing = &step;
                    break;
                }
            }
            if (!failing || failing->succ.empty()) {
                std::string what = failing ? failing->describe : "a redex";
                v.trace.push_back(what);
                v.reason = "no session step matches " + what + " in session state " + print(n.spec);
                break;
            }
            auto next = *std::min_element(failing->succ.begin(), failing->succ.end(), [&](auto& a, auto& b) {
                return bad_round[a.first] < bad_round[b.first];
            });
            v.trace.push_back(failing->describe + " [" + next.second + "]");
            cur = next.first;
        }
        return v;
    }
    v.outcome = cut ? Outcome::Unknown : Outcome::Pass;
    if (cut) v.reason = "budget exhausted before the relation was closed";
    return v;
}

}  // namespace sess
