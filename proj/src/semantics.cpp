#include "sesstool/semantics.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sesstool/congruence.hpp"
#include "sesstool/parser.hpp"

namespace sess {

ExplorationBudget ExplorationBudget::parse(const std::string& spec) {
    ExplorationBudget b;
    std::stringstream ss(spec);
    std::string part;
    std::vector<long long> vals;
    while (std::getline(ss, part, ',')) {
        size_t used = 0;
        long long v = std::stoll(part, &used);
        if (used != part.size() || v <= 0) throw std::invalid_argument("budget values must be positive integers");
        vals.push_back(v);
    }
    if (vals.empty() || vals.size() > 3) throw std::invalid_argument("budget is unfold[,depth[,states]]");
    b.max_rec_unfold = static_cast<int>(vals[0]);
    if (vals.size() > 1) b.max_depth = static_cast<int>(vals[1]);
    if (vals.size() > 2) b.max_states = static_cast<size_t>(vals[2]);
    return b;
}

ExplorationBudget ExplorationBudget::from_env() {
    const char* v = std::getenv("SESSTOOL_BUDGET");
    if (!v || !*v) return {};
    return parse(v);
}

std::string ExplorationBudget::describe() const {
    return "unfold=" + std::to_string(max_rec_unfold) + ",depth=" + std::to_string(max_depth) +
           ",states=" + std::to_string(max_states);
}

namespace {

struct Atom {
    Name tag;  // enclosing label, empty if none
    P proc;
};

P peel_hidden(const P& n, std::vector<Name>& hidden) {
    P cur = n;
    while (cur->kind == PK::Hide) {
        hidden.push_back(cur->name);
        cur = cur->left;
    }
    return cur;
}

void flatten_par(const P& p, const Name& tag, std::vector<Atom>& out) {
    if (p->kind == PK::Nil) return;
    if (p->kind == PK::Par) {
        flatten_par(p->left, tag, out);
        flatten_par(p->right, tag, out);
    } else if (p->kind == PK::Label) {
        flatten_par(p->left, p->name, out);
    } else {
        out.push_back({tag, p});
    }
}

void flatten_sum(const P& p, std::vector<P>& out) {
    if (p->kind == PK::Sum) {
        flatten_sum(p->left, out);
        flatten_sum(p->right, out);
    } else {
        out.push_back(p);
    }
}

struct Raw {
    Action label;
    P target;  // not yet normalized
    std::string via;
};

class Stepper {
public:
    explicit Stepper(const P& root) : fresh_(all_names(root)) {}
    bool truncated = false;

    std::vector<Raw> moves(const P& p, int unfold) {
        std::vector<Raw> out;
        std::vector<Name> hidden;
        P body = peel_hidden(p, hidden);
        std::vector<Atom> atoms;
        flatten_par(body, "", atoms);
        if (atoms.empty()) return out;
        const NameSet hset(hidden.begin(), hidden.end());
        std::vector<std::vector<Raw>> per(atoms.size());
        for (size_t i = 0; i < atoms.size(); ++i) per[i] = atom_moves(atoms[i].proc, unfold);

        auto rebuild = [&](const std::map<size_t, P>& repl, const std::vector<Name>& extra) {
            std::vector<P> parts;
            std::map<Name, std::vector<P>> by_tag;
            std::vector<Name> tag_order;
            for (size_t i = 0; i < atoms.size(); ++i) {
                auto it = repl.find(i);
                P x = it == repl.end() ? atoms[i].proc : it->second;
                if (atoms[i].tag.empty()) {
                    parts.push_back(x);
                } else {
                    if (!by_tag.count(atoms[i].tag)) tag_order.push_back(atoms[i].tag);
                    by_tag[atoms[i].tag].push_back(x);
                }
            }
            for (auto& t : tag_order) parts.push_back(label(t, par_all(by_tag[t])));
            P r = par_all(parts);
            for (size_t i = extra.size(); i-- > 0;) r = hide(extra[i], r);
            for (size_t i = hidden.size(); i-- > 0;) r = hide(hidden[i], r);
            return r;
        };

        // [Par] [Lab] [Hid]
        for (size_t i = 0; i < atoms.size(); ++i)
            for (auto& m : per[i]) {
                if (m.label.kind != ActKind::Silent && hset.count(m.label.chan)) continue;
                out.push_back({m.label, rebuild({{i, m.target}}, {}), m.via});
            }
        // [Com]
        for (size_t i = 0; i < atoms.size(); ++i)
            for (auto& s : per[i]) {
                if (s.label.kind != ActKind::Send) continue;
                for (size_t j = 0; j < atoms.size(); ++j) {
                    if (j == i) continue;
                    for (auto& r : per[j]) {
                        if (r.label.kind != ActKind::Receive || r.label.chan != s.label.chan ||
                            r.label.msg != s.label.msg)
                            continue;
                        out.push_back({Action::tau(), rebuild({{i, s.target}, {j, r.target}}, {}),
                                       s.label.chan + "!" + s.label.msg});
                    }
                }
            }
        // [Sess]
        for (size_t i = 0; i < atoms.size(); ++i)
            for (auto& inv : per[i]) {
                if (inv.label.kind != ActKind::Invite) continue;
                const int n = inv.label.num;
                std::vector<std::pair<size_t, const Raw*>> chosen;
                std::function<void(int)> pick = [&](int k) {
                    if (k > n) {
                        std::vector<Name> fresh_names;
                        for (auto& c : inv.label.tuple) fresh_names.push_back(fresh_(c));
                        std::map<size_t, P> repl;
                        Renaming ri;
                        for (size_t x = 0; x < fresh_names.size(); ++x) ri[inv.label.tuple[x]] = fresh_names[x];
                        repl[i] = substitute(inv.target, ri);
                        for (auto& [j, acc] : chosen) {
                            Renaming ra;
                            for (size_t x = 0; x < fresh_names.size(); ++x) ra[acc->label.tuple[x]] = fresh_names[x];
                            repl[j] = substitute(acc->target, ra);
                        }
                        out.push_back({Action::tau(), rebuild(repl, fresh_names), "sess:" + inv.label.chan});
                        return;
                    }
                    for (size_t j = 0; j < atoms.size(); ++j) {
                        if (j == i) continue;
                        bool used = false;
                        for (auto& c : chosen)
                            if (c.first == j) used = true;
                        if (used) continue;
                        for (auto& a : per[j]) {
                            if (a.label.kind != ActKind::Accept || a.label.chan != inv.label.chan ||
                                a.label.num != k || a.label.tuple.size() != inv.label.tuple.size())
                                continue;
                            chosen.push_back({j, &a});
                            pick(k + 1);
                            chosen.pop_back();
                        }
                    }
                };
                pick(2);
            }
        return out;
    }

    std::vector<Raw> atom_moves(const P& a, int unfold) {
        switch (a->kind) {
            case PK::Prefix: return {{a->act, a->left, ""}};
            case PK::Sum: {
                std::vector<P> ss;
                flatten_sum(a, ss);
                std::vector<Raw> out;
                for (auto& s : ss) {
                    auto m = moves(s, unfold);
                    out.insert(out.end(), m.begin(), m.end());
                }
                return out;
            }
            case PK::Rec: {
                if (unfold <= 0) {
                    truncated = true;
                    return {};
                }
                return moves(subst_var(a->left, a->name, a), unfold - 1);
            }
            case PK::Var:
            case PK::Nil: return {};
            default: return moves(a, unfold);
        }
    }

private:
    Fresh fresh_;
};

std::string label_key(const Action& a, const std::string& via) { return to_string(a) + (via.empty() ? "" : "@" + via); }

}  // namespace

TransitionSet proc_transitions(const P& p, const ExplorationBudget& budget) {
    P n = normalize(p);
    Stepper st(n);
    auto raw = st.moves(n, budget.max_rec_unfold);
    TransitionSet out;
    out.truncated = st.truncated;
    std::set<std::string> seen;
    for (auto& r : raw) {
        auto cf = canonical(r.target);
        std::string k = label_key(r.label, r.via) + "=>" + cf.fingerprint;
        if (!seen.insert(k).second) continue;
        out.items.push_back({r.label, cf.term, r.via});
    }
    return out;
}

// ---- sessions ----

std::string SessLabel::str() const {
    if (kind == SessLabelKind::Comm) return p + "," + q + ":" + msg;
    std::string s;
    for (size_t i = 0; i < parties.size(); ++i) s += (i ? "," : "") + parties[i];
    return s + ":" + body_name;
}

S instantiate(const S& b, const std::vector<Name>& parties) {
    auto order = participant_order(b);
    Renaming m;
    for (size_t i = 0; i < order.size() && i < parties.size(); ++i) m[order[i]] = parties[i];
    return rename_participants(b, m);
}

namespace {

void sflatten(const S& s, SK k, std::vector<S>& out) {
    if (s->kind == k) {
        sflatten(s->left, k, out);
        sflatten(s->right, k, out);
    } else {
        out.push_back(s);
    }
}

// A session move; with detached bodies, an establishment leaves its body
// in `spawned` instead of composing it in place.
struct SMove {
    SessLabel label;
    S target;
    S spawned;
};

void smoves(const S& s, int unfold, bool detach, std::vector<SMove>& out, bool& truncated) {
    switch (s->kind) {
        case SK::End:
        case SK::TVar: return;
        case SK::Comm: {
            SessLabel l;
            l.kind = SessLabelKind::Comm;
            l.p = s->p;
            l.q = s->q;
            l.msg = s->msg;
            out.push_back({l, s->left, nullptr});
            return;
        }
        case SK::Estab: {
            SessLabel l;
            l.kind = SessLabelKind::Establish;
            l.parties = s->parties;
            l.body_name = s->body_name;
            l.body = s->body;
            S inst = instantiate(s->body, s->parties);
            if (detach)
                out.push_back({l, s->left, inst});
            else
                out.push_back({l, s_prod(s->left, inst), nullptr});
            return;
        }
        case SK::Rec: {
            if (unfold <= 0) {
                truncated = true;
                return;
            }
            smoves(subst_tvar(s->left, s->var, s), unfold - 1, detach, out, truncated);
            return;
        }
        case SK::Seq: {
            std::vector<SMove> first;
            smoves(s->left, unfold, detach, first, truncated);
            for (auto& t : first) out.push_back({t.label, s_seq(t.target, s->right), t.spawned});
            // [S-eq]: a left side congruent to end lets the right side move
            if (session_congruent(s->left, s_end())) smoves(s->right, unfold, detach, out, truncated);
            return;
        }
        case SK::Union: {
            std::vector<S> parts;
            sflatten(s, SK::Union, parts);
            for (auto& p : parts) smoves(p, unfold, detach, out, truncated);
            return;
        }
        case SK::Prod: {
            std::vector<S> parts;
            sflatten(s, SK::Prod, parts);
            for (size_t i = 0; i < parts.size(); ++i) {
                std::vector<SMove> mine;
                smoves(parts[i], unfold, detach, mine, truncated);
                for (auto& t : mine) {
                    std::vector<S> rest = parts;
                    rest[i] = t.target;
                    S r = rest.back();
                    for (size_t k = rest.size() - 1; k-- > 0;) r = s_prod(rest[k], r);
                    out.push_back({t.label, r, t.spawned});
                }
            }
            return;
        }
    }
}

}  // namespace

SessTransitionSet session_transitions(const S& s, const ExplorationBudget& budget, bool detach_bodies) {
    std::vector<SMove> raw;
    SessTransitionSet out;
    smoves(normalize(s), budget.max_rec_unfold, detach_bodies, raw, out.truncated);
    std::set<std::string> seen;
    for (auto& t : raw) {
        auto cf = canonical(t.spawned ? s_prod(t.target, t.spawned) : t.target);
        std::string k = t.label.str() + "=>" + cf.fingerprint;
        if (!seen.insert(k).second) continue;
        out.items.push_back({t.label, cf.term});
    }
    return out;
}

// ---- state graphs ----

namespace {

// Renames the bound tuple of an invite/accept step to names derived from
// the source state, so equal steps from different processes compare equal.
void canonical_tuple(const P& source, Action& label, P& target) {
    if (label.tuple.empty()) return;
    int next = 1;
    for (auto& n : all_names(source))
        if (n.size() > 2 && n.rfind("_c", 0) == 0) {
            try {
                next = std::max(next, std::stoi(n.substr(2)) + 1);
            } catch (...) {
            }
        }
    NameSet tn = all_names(target);
    for (auto& n : tn)
        if (n.size() > 2 && n.rfind("_c", 0) == 0) {
            try {
                next = std::max(next, std::stoi(n.substr(2)) + 1);
            } catch (...) {
            }
        }
    Renaming m;
    for (auto& c : label.tuple) {
        Name d = "_c" + std::to_string(next++);
        m[c] = d;
        c = d;
    }
    target = normalize(substitute(target, m));
}

}  // namespace

StateGraph explore(const P& root, const ExplorationBudget& budget, bool silent_only) {
    StateGraph g;
    std::unordered_map<std::string, size_t> index;
    std::vector<int> depth;
    auto add = [&](const P& p, int d) -> size_t {
        auto cf = canonical(p);
        auto it = index.find(cf.fingerprint);
        if (it != index.end()) return it->second;
        size_t id = g.states.size();
        index[cf.fingerprint] = id;
        g.states.push_back(cf.term);
        g.fingerprints.push_back(cf.fingerprint);
        g.edges.emplace_back();
        g.expanded.push_back(false);
        depth.push_back(d);
        return id;
    };
    add(root, 0);
    std::deque<size_t> q{0};
    while (!q.empty()) {
        size_t s = q.front();
        q.pop_front();
        if (depth[s] >= budget.max_depth) {
            g.truncated = true;
            continue;
        }
        auto ts = proc_transitions(g.states[s], budget);
        if (ts.truncated) g.truncated = true;
        g.expanded[s] = true;
        for (auto& t : ts.items) {
            if (silent_only && t.label.kind != ActKind::Silent) continue;
            Action l = t.label;
            P tgt = t.target;
            canonical_tuple(g.states[s], l, tgt);
            std::string fp = fingerprint(tgt);
            size_t id;
            auto it = index.find(fp);
            if (it != index.end()) {
                id = it->second;
            } else {
                if (g.states.size() >= budget.max_states) {
                    g.truncated = true;
                    continue;
                }
                id = add(tgt, depth[s] + 1);
                q.push_back(id);
            }
            g.edges[s].push_back({l, t.via, id});
        }
    }
    return g;
}

namespace {

BoundedAnswer deterministic_graph(const StateGraph& g) {
    for (size_t s = 0; s < g.states.size(); ++s) {
        std::map<std::string, size_t> seen;
        for (auto& e : g.edges[s]) {
            auto [it, fresh] = seen.emplace(label_key(e.label, e.via), e.target);
            if (!fresh && it->second != e.target)
                return {false, true, print(g.states[s]) + " has two " + it->first + " steps"};
        }
    }
    return {true, !g.truncated, {}};
}

}  // namespace

BoundedAnswer is_deterministic(const P& p, const ExplorationBudget& budget) {
    return deterministic_graph(explore(p, budget));
}

BoundedAnswer message_flow_deterministic(const P& p, const ExplorationBudget& budget) {
    return deterministic_graph(explore(p, budget, true));
}

BoundedAnswer stimulates(const P& p, const P& q, const ExplorationBudget& budget) {
    StateGraph gp = explore(p, budget);
    StateGraph gq = explore(q, budget);
    // pairs reachable from the roots where q moves and p answers
    std::map<std::pair<size_t, size_t>, size_t> idx;
    std::vector<std::pair<size_t, size_t>> pairs;
    std::deque<size_t> work;
    auto add = [&](size_t a, size_t b) {
        auto key = std::make_pair(a, b);
        auto it = idx.find(key);
        if (it != idx.end()) return it->second;
        size_t id = pairs.size();
        idx[key] = id;
        pairs.push_back(key);
        work.push_back(id);
        return id;
    };
    add(0, 0);
    // obligations[pair] = for each q-move, the candidate successor pairs
    std::vector<std::vector<std::vector<size_t>>> obligations;
    while (!work.empty()) {
        size_t id = work.front();
        work.pop_front();
        if (obligations.size() < pairs.size()) obligations.resize(pairs.size());
        auto [a, b] = pairs[id];
        std::vector<std::vector<size_t>> obl;
        if (gq.expanded[b] && gp.expanded[a]) {
            for (auto& eq : gq.edges[b]) {
                std::vector<size_t> cands;
                std::string lq = to_string(eq.label);
                for (auto& ep : gp.edges[a])
                    if (to_string(ep.label) == lq) cands.push_back(add(ep.target, eq.target));
                obl.push_back(std::move(cands));
            }
        }
        if (obligations.size() < pairs.size()) obligations.resize(pairs.size());
        obligations[id] = std::move(obl);
    }
    obligations.resize(pairs.size());
    std::vector<bool> alive(pairs.size(), true);
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t id = 0; id < pairs.size(); ++id) {
            if (!alive[id]) continue;
            for (auto& cands : obligations[id]) {
                bool ok = false;
                for (size_t c : cands)
                    if (alive[c]) ok = true;
                if (!ok) {
                    alive[id] = false;
                    changed = true;
                    break;
                }
            }
        }
    }
    return {alive[0], !(gp.truncated || gq.truncated), {}};
}

}  // namespace sess
