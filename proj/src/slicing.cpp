#include "sesstool/slicing.hpp"

#include <algorithm>
#include <set>

#include "sesstool/congruence.hpp"
#include "sesstool/parser.hpp"
#include "sesstool/projection.hpp"
#include "sesstool/typing.hpp"

namespace sess {

const char* const kSliceCaveat =
    "slices agreeing with the projected roles do not imply that the process is typable";

namespace {

enum class Near { None, Kept, Dropped };

void reject_operators(const P& p) {
    if (!p) return;
    if (p->kind == PK::Hide) throw UnsupportedOperator("slicing needs a process without restriction");
    if (p->kind == PK::Label) throw UnsupportedOperator("slicing needs a process without labels");
    reject_operators(p->left);
    reject_operators(p->right);
}

template <class KeepPrefix, class KeepVar>
P slice(const P& p, Near near, const KeepPrefix& keep, const KeepVar& keep_var) {
    switch (p->kind) {
        case PK::Nil: return p;
        case PK::Var: return keep_var(p->name, near) ? p : nil();
        case PK::Rec: {
            P b = slice(p->left, near, keep, keep_var);
            return free_vars(b).count(p->name) ? rec(p->name, b) : b;
        }
        case PK::Prefix: {
            bool k = keep(p->act);
            P cont = slice(p->left, k ? Near::Kept : Near::Dropped, keep, keep_var);
            return k ? prefix(p->act, cont) : cont;
        }
        case PK::Par: return par(slice(p->left, near, keep, keep_var), slice(p->right, near, keep, keep_var));
        case PK::Sum: return sum(slice(p->left, near, keep, keep_var), slice(p->right, near, keep, keep_var));
        case PK::Hide:
        case PK::Label: reject_operators(p);
    }
    return p;
}

bool overlaps(const std::vector<Name>& a, const std::vector<Name>& b) {
    for (auto& x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    return false;
}

P finish(const P& raw) { return normalize(absorb_duplicates(raw)); }

void session_prefixes(const P& p, std::vector<Action>& out) {
    if (!p) return;
    if (p->kind == PK::Prefix && p->act.is_session()) out.push_back(p->act);
    session_prefixes(p->left, out);
    session_prefixes(p->right, out);
}

std::string tuple_str(const std::vector<Name>& t) {
    std::string s = "(";
    for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + t[i];
    return s + ")";
}

std::string mismatch_at(const P& a, const P& b, const std::string& path) {
    if (fingerprint(a) == fingerprint(b)) return {};
    auto here = [&] { return (path.empty() ? std::string("top") : path) + ": " + print(a) + " vs " + print(b); };
    if (a->kind != b->kind) return here();
    switch (a->kind) {
        case PK::Prefix:
            if (to_string(a->act) != to_string(b->act) && a->act.tuple.size() == b->act.tuple.size() &&
                (a->act.kind != b->act.kind || a->act.chan != b->act.chan || a->act.msg != b->act.msg ||
                 a->act.num != b->act.num))
                return here();
            return mismatch_at(a->left, b->left, path + "/" + to_string(a->act));
        case PK::Rec: return mismatch_at(a->left, subst_var(b->left, b->name, var(a->name)), path + "/rec");
        case PK::Sum:
        case PK::Par: {
            auto parts = [&](const P& x) { return a->kind == PK::Sum ? summands(x) : components(x); };
            auto xs = parts(a), ys = parts(b);
            std::vector<bool> used(ys.size(), false);
            std::vector<P> extra;
            for (auto& x : xs) {
                bool found = false;
                for (size_t j = 0; j < ys.size() && !found; ++j)
                    if (!used[j] && proc_congruent(x, ys[j])) used[j] = found = true;
                if (!found) extra.push_back(x);
            }
            std::vector<P> missing;
            for (size_t j = 0; j < ys.size(); ++j)
                if (!used[j]) missing.push_back(ys[j]);
            if (extra.size() == 1 && missing.size() == 1) return mismatch_at(extra[0], missing[0], path + "/branch");
            std::string s = (path.empty() ? std::string("top") : path) + ":";
            for (auto& x : extra) s += " unexpected " + print(x) + ";";
            for (auto& y : missing) s += " missing " + print(y) + ";";
            return s;
        }
        default: return here();
    }
}

}  // namespace

P raw_main_slice(const P& p, const VariablePlacement& vp) {
    reject_operators(p);
    auto keep = [](const Action& a) { return a.is_session(); };
    auto keep_var = [&](const Name& x, Near near) {
        auto it = vp.find(x);
        if (it != vp.end()) return it->second.empty();
        return near != Near::Dropped;
    };
    return slice(p, Near::None, keep, keep_var);
}

P raw_channel_slice(const P& p, const std::vector<Name>& tuple, const VariablePlacement& vp) {
    reject_operators(p);
    auto keep = [&](const Action& a) {
        return a.kind != ActKind::Silent && std::find(tuple.begin(), tuple.end(), a.chan) != tuple.end();
    };
    auto keep_var = [&](const Name& x, Near near) {
        auto it = vp.find(x);
        if (it != vp.end()) return overlaps(it->second, tuple);
        return near == Near::Kept;
    };
    return slice(p, Near::None, keep, keep_var);
}

P main_slice(const P& p, const VariablePlacement& vp) { return finish(raw_main_slice(p, vp)); }

P channel_slice(const P& p, const std::vector<Name>& tuple, const VariablePlacement& vp) {
    return finish(raw_channel_slice(p, tuple, vp));
}

std::string first_mismatch(const P& got, const P& want) {
    return mismatch_at(finish(got), finish(want), "");
}

namespace {

// Channel -> tuple of the session prefix binding it.
void tuple_of_channels(const P& p, std::map<Name, std::vector<Name>>& out) {
    if (!p) return;
    if (p->kind == PK::Prefix && p->act.is_session())
        for (auto& c : p->act.tuple) out[c] = p->act.tuple;
    tuple_of_channels(p->left, out);
    tuple_of_channels(p->right, out);
}

// For every variable occurrence: the tuples of the enclosing communication
// prefixes, and the placement given by the nearest enclosing prefix.
void variable_candidates(const P& p, const std::map<Name, std::vector<Name>>& tuples,
                         std::vector<std::vector<Name>>& enclosing, const std::vector<Name>* nearest,
                         std::map<Name, std::vector<std::vector<Name>>>& cands, VariablePlacement& heuristic) {
    if (!p) return;
    switch (p->kind) {
        case PK::Var: {
            auto& c = cands[p->name];
            for (auto& t : enclosing)
                if (std::find(c.begin(), c.end(), t) == c.end()) c.push_back(t);
            if (!heuristic.count(p->name)) heuristic[p->name] = nearest ? *nearest : std::vector<Name>{};
            return;
        }
        case PK::Prefix: {
            static const std::vector<Name> kMain;
            if (p->act.is_comm()) {
                auto it = tuples.find(p->act.chan);
                const std::vector<Name>* t = it == tuples.end() ? &kMain : &it->second;
                if (it != tuples.end()) enclosing.push_back(it->second);
                variable_candidates(p->left, tuples, enclosing, t, cands, heuristic);
                if (it != tuples.end()) enclosing.pop_back();
            } else {
                variable_candidates(p->left, tuples, enclosing, &kMain, cands, heuristic);
            }
            return;
        }
        default:
            variable_candidates(p->left, tuples, enclosing, nearest, cands, heuristic);
            variable_candidates(p->right, tuples, enclosing, nearest, cands, heuristic);
    }
}

}  // namespace

SliceReport diagnose(const TypeEnv& env, const P& p, const Name& spec_name, const S& spec, const Name& role) {
    reject_operators(p);
    SliceReport rep;
    rep.caveat = kSliceCaveat;

    std::vector<SliceVerdict> targets;
    SliceVerdict main;
    main.session = spec_name;
    main.kind = "main";
    try {
        main.expected = project_integrating(spec, role, env);
    } catch (const std::exception& e) {
        main.mismatch = e.what();
    }
    targets.push_back(main);

    std::vector<Action> acts;
    session_prefixes(p, acts);
    std::set<std::string> seen;
    for (auto& a : acts) {
        SliceVerdict v;
        v.kind = a.kind == ActKind::Invite ? "invite" : "accept";
        v.channel = a.chan;
        v.tuple = a.tuple;
        v.index = a.kind == ActKind::Invite ? 1 : a.num;
        if (!seen.insert(a.chan + tuple_str(a.tuple) + std::to_string(v.index)).second) continue;
        v.session = env.session_name(a.chan);
        if (v.session.empty()) {
            v.mismatch = "session channel " + a.chan + " is not bound";
        } else {
            v.expected = role_instance(v.session, env.session_of(a.chan), v.index, a.tuple);
            if (!v.expected)
                v.mismatch = "tuple " + tuple_str(a.tuple) + " does not fit role " + std::to_string(v.index) + " of " +
                             v.session;
        }
        targets.push_back(std::move(v));
    }

    // Candidate placements for each recursion variable: the main slice, the
    // tuples of its enclosing communication prefixes, and where typing put it.
    std::map<Name, std::vector<Name>> chan_tuples;
    tuple_of_channels(p, chan_tuples);
    std::map<Name, std::vector<std::vector<Name>>> cands;
    VariablePlacement start;
    std::vector<std::vector<Name>> enclosing;
    variable_candidates(p, chan_tuples, enclosing, nullptr, cands, start);
    auto inf = infer_principal(env, p);
    if (inf.ok())
        for (auto& [x, t] : inf.typing->variable_tuples)
            if (cands.count(x)) start[x] = t;
    std::vector<Name> vars;
    for (auto& [x, c] : cands) {
        vars.push_back(x);
        c.insert(c.begin(), std::vector<Name>{});
        if (std::find(c.begin(), c.end(), start[x]) == c.end()) c.push_back(start[x]);
    }

    // A slice depends only on the variables placed in it, so verdicts are
    // cached per target and variable set.
    std::map<std::string, SliceVerdict> cache;
    auto evaluate = [&](size_t ti, const VariablePlacement& vp) -> const SliceVerdict& {
        const SliceVerdict& t = targets[ti];
        std::string key = std::to_string(ti);
        for (auto& x : vars) {
            const auto& pl = vp.at(x);
            if (t.kind == "main" ? pl.empty() : overlaps(pl, t.tuple)) key += "|" + x;
        }
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        SliceVerdict v = t;
        v.slice = t.kind == "main" ? main_slice(p, vp) : channel_slice(p, t.tuple, vp);
        if (v.expected) {
            v.pass = congruent_modulo_absorption(v.slice, v.expected);
            if (!v.pass) v.mismatch = first_mismatch(v.slice, v.expected);
        }
        return cache.emplace(key, std::move(v)).first->second;
    };
    auto score = [&](const VariablePlacement& vp) {
        size_t n = 0;
        for (size_t i = 0; i < targets.size(); ++i) n += evaluate(i, vp).pass;
        return n;
    };

    VariablePlacement best = start;
    size_t best_score = score(best);
    std::vector<size_t> pos(vars.size(), 0);
    const size_t kMaxCombinations = 1024;
    for (size_t tried = 0; tried < kMaxCombinations && best_score < targets.size(); ++tried) {
        VariablePlacement vp;
        for (size_t i = 0; i < vars.size(); ++i) vp[vars[i]] = cands[vars[i]][pos[i]];
        size_t sc = score(vp);
        if (sc > best_score) {
            best_score = sc;
            best = vp;
        }
        size_t k = 0;
        while (k < vars.size() && ++pos[k] == cands[vars[k]].size()) pos[k++] = 0;
        if (k == vars.size()) break;
    }

    rep.placement = best;
    for (size_t i = 0; i < targets.size(); ++i) {
        const SliceVerdict& v = evaluate(i, best);
        rep.all_pass = rep.all_pass && v.pass;
        rep.verdicts.push_back(v);
    }
    return rep;
}

}  // namespace sess
