#include "sesstool/congruence.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace sess {

namespace {

// Flattened view of a process: a restriction block over a multiset of
// components. Sums, continuations, recursion bodies and label bodies are
// groups again.
struct Group;

struct Comp {
    enum K { Prefix, Sum, Rec, Var, Label } k = Var;
    Action act;
    Name name;
    std::vector<Group> kids;
    NameSet fc, fv;
};

struct Group {
    std::vector<Name> hidden;
    std::vector<Comp> comps;
    NameSet fc, fv;
    bool empty() const { return comps.empty(); }
};

void refresh(Group& g) {
    g.fc.clear();
    g.fv.clear();
    for (auto& c : g.comps) {
        g.fc.insert(c.fc.begin(), c.fc.end());
        g.fv.insert(c.fv.begin(), c.fv.end());
    }
    for (auto& h : g.hidden) g.fc.erase(h);
}

Group single(Comp c) {
    Group g;
    g.fc = c.fc;
    g.fv = c.fv;
    g.comps.push_back(std::move(c));
    return g;
}

void merge_labels(Group& g) {
    std::vector<Comp> out;
    std::map<Name, size_t> at;
    for (auto& c : g.comps) {
        if (c.k != Comp::Label) {
            out.push_back(std::move(c));
            continue;
        }
        auto it = at.find(c.name);
        if (it == at.end()) {
            at[c.name] = out.size();
            out.push_back(std::move(c));
            continue;
        }
        Comp& tgt = out[it->second];
        for (auto& k : c.kids[0].comps) tgt.kids[0].comps.push_back(std::move(k));
        refresh(tgt.kids[0]);
        tgt.fc = tgt.kids[0].fc;
        tgt.fv = tgt.kids[0].fv;
    }
    g.comps = std::move(out);
}

Group build(const P& p) {
    switch (p->kind) {
        case PK::Nil: return {};
        case PK::Var: {
            Comp c;
            c.k = Comp::Var;
            c.name = p->name;
            c.fv = {p->name};
            return single(std::move(c));
        }
        case PK::Prefix: {
            Comp c;
            c.k = Comp::Prefix;
            c.act = p->act;
            c.kids.push_back(build(p->left));
            c.fc = c.kids[0].fc;
            for (auto& t : c.act.tuple) c.fc.erase(t);
            if (c.act.kind != ActKind::Silent) c.fc.insert(c.act.chan);
            c.fv = c.kids[0].fv;
            return single(std::move(c));
        }
        case PK::Rec: {
            Group g = build(p->left);
            if (!g.fv.count(p->name)) return g;
            Comp c;
            c.k = Comp::Rec;
            c.name = p->name;
            c.fc = g.fc;
            c.fv = g.fv;
            c.fv.erase(p->name);
            c.kids.push_back(std::move(g));
            return single(std::move(c));
        }
        case PK::Hide: {
            Group g = build(p->left);
            if (g.fc.count(p->name)) {
                g.hidden.push_back(p->name);
                g.fc.erase(p->name);
            }
            return g;
        }
        case PK::Par: {
            Group a = build(p->left);
            Group b = build(p->right);
            for (auto& h : b.hidden) a.hidden.push_back(h);
            for (auto& c : b.comps) a.comps.push_back(std::move(c));
            merge_labels(a);
            refresh(a);
            return a;
        }
        case PK::Sum: {
            std::vector<Group> parts;
            for (const P& side : {p->left, p->right}) {
                Group g = build(side);
                if (g.empty()) continue;
                if (g.hidden.empty() && g.comps.size() == 1 && g.comps[0].k == Comp::Sum) {
                    for (auto& k : g.comps[0].kids) parts.push_back(std::move(k));
                } else {
                    parts.push_back(std::move(g));
                }
            }
            if (parts.empty()) return {};
            if (parts.size() == 1) return std::move(parts[0]);
            Comp c;
            c.k = Comp::Sum;
            for (auto& k : parts) {
                c.fc.insert(k.fc.begin(), k.fc.end());
                c.fv.insert(k.fv.begin(), k.fv.end());
            }
            c.kids = std::move(parts);
            return single(std::move(c));
        }
        case PK::Label: {
            Group g = build(p->left);
            Group body;
            for (auto& c : g.comps) {
                if (c.k == Comp::Label) {
                    for (auto& k : c.kids[0].comps) body.comps.push_back(std::move(k));
                } else {
                    body.comps.push_back(std::move(c));
                }
            }
            refresh(body);
            Comp c;
            c.k = Comp::Label;
            c.name = p->name;
            c.fc = body.fc;
            c.fv = body.fv;
            c.kids.push_back(std::move(body));
            Group out = single(std::move(c));
            out.hidden = g.hidden;
            refresh(out);
            return out;
        }
    }
    return {};
}

using Env = std::map<Name, std::string>;

struct Ser {
    std::string s;
    P term;
};

std::string map_name(const Env& env, const Name& n) {
    auto it = env.find(n);
    return it == env.end() ? n : it->second;
}

Ser ser_group(const Group& g, const Env& env, int depth);

Ser ser_comp(const Comp& c, const Env& env, int depth) {
    switch (c.k) {
        case Comp::Var: {
            auto it = env.find(c.name);
            return {"V" + (it == env.end() ? "$" + c.name : it->second), var(c.name)};
        }
        case Comp::Prefix: {
            const Action& a = c.act;
            std::string s;
            Env e2 = env;
            int d = depth;
            std::string ids;
            for (auto& t : a.tuple) {
                std::string id = "%" + std::to_string(d++);
                e2[t] = id;
                ids += ";" + id;
            }
            switch (a.kind) {
                case ActKind::Send: s = "S(" + map_name(env, a.chan) + "," + a.msg + ")"; break;
                case ActKind::Receive: s = "R(" + map_name(env, a.chan) + "," + a.msg + ")"; break;
                case ActKind::Invite: s = "I(" + map_name(env, a.chan) + "," + std::to_string(a.num) + ids + ")"; break;
                case ActKind::Accept: s = "A(" + map_name(env, a.chan) + "," + std::to_string(a.num) + ids + ")"; break;
                case ActKind::Silent: s = "T()"; break;
            }
            Ser k = ser_group(c.kids[0], e2, d);
            return {s + "." + k.s, prefix(a, k.term)};
        }
        case Comp::Rec: {
            Env e2 = env;
            e2[c.name] = "%" + std::to_string(depth);
            Ser k = ser_group(c.kids[0], e2, depth + 1);
            return {"rec(" + k.s + ")", rec(c.name, k.term)};
        }
        case Comp::Label: {
            Ser k = ser_group(c.kids[0], env, depth);
            return {"L(" + c.name + ":" + k.s + ")", label(c.name, k.term)};
        }
        case Comp::Sum: {
            std::vector<Ser> ks;
            for (auto& k : c.kids) ks.push_back(ser_group(k, env, depth));
            std::sort(ks.begin(), ks.end(), [](const Ser& x, const Ser& y) { return x.s < y.s; });
            std::string s = "+(";
            std::vector<P> terms;
            for (size_t i = 0; i < ks.size(); ++i) {
                if (i) s += ",";
                s += ks[i].s;
                terms.push_back(ks[i].term);
            }
            return {s + ")", sum_all(terms)};
        }
    }
    return {"?", nil()};
}

std::vector<Ser> ser_sorted(const std::vector<Comp>& comps, const Env& env, int depth) {
    std::vector<Ser> out;
    out.reserve(comps.size());
    for (auto& c : comps) out.push_back(ser_comp(c, env, depth));
    std::stable_sort(out.begin(), out.end(), [](const Ser& x, const Ser& y) { return x.s < y.s; });
    return out;
}

std::string join_comps(const std::vector<Ser>& v) {
    if (v.size() == 1) return v[0].s;
    std::string s = "|(";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += v[i].s;
    }
    return s + ")";
}

P par_terms(const std::vector<Ser>& v) {
    std::vector<P> ts;
    for (auto& x : v) ts.push_back(x.term);
    return par_all(ts);
}

// Partition hidden names into classes by iterated structural signatures,
// independent of how the names are spelled. Returns class index per name,
// classes numbered in signature order.
std::vector<size_t> hidden_classes(const Group& g, const Env& env, int depth) {
    const size_t k = g.hidden.size();
    std::vector<size_t> cls(k, 0);
    for (size_t round = 0; round <= k; ++round) {
        std::vector<std::string> sig(k);
        for (size_t h = 0; h < k; ++h) {
            Env e2 = env;
            for (size_t o = 0; o < k; ++o) e2[g.hidden[o]] = "%c" + std::to_string(cls[o]);
            e2[g.hidden[h]] = "%*";
            std::vector<std::string> parts;
            for (auto& c : g.comps) parts.push_back(ser_comp(c, e2, depth).s);
            std::sort(parts.begin(), parts.end());
            sig[h] = std::to_string(cls[h]) + ":";
            for (auto& x : parts) sig[h] += x + "|";
        }
        std::vector<std::string> sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<size_t> next(k);
        for (size_t h = 0; h < k; ++h)
            next[h] = static_cast<size_t>(std::lower_bound(sorted.begin(), sorted.end(), sig[h]) - sorted.begin());
        if (next == cls) break;
        cls = next;
    }
    return cls;
}

Ser ser_group(const Group& g, const Env& env, int depth) {
    if (g.comps.empty()) return {"0", nil()};
    if (g.hidden.empty()) {
        auto v = ser_sorted(g.comps, env, depth);
        return {join_comps(v), par_terms(v)};
    }
    const size_t k = g.hidden.size();
    const int inner = depth + static_cast<int>(k);
    auto attempt = [&](const std::vector<size_t>& slot) {
        Env e2 = env;
        for (size_t i = 0; i < k; ++i) e2[g.hidden[i]] = "%" + std::to_string(depth + slot[i]);
        auto v = ser_sorted(g.comps, e2, inner);
        return std::make_pair(join_comps(v), v);
    };
    std::vector<size_t> best_slot;
    std::string best;
    std::vector<Ser> best_v;
    // slots are assigned class by class; names within a class are tried in
    // every order while the search stays small
    std::vector<size_t> cls = hidden_classes(g, env, inner);
    std::vector<std::vector<size_t>> classes(*std::max_element(cls.begin(), cls.end()) + 1);
    for (size_t h = 0; h < k; ++h) classes[cls[h]].push_back(h);
    size_t combos = 1;
    for (auto& c : classes)
        for (size_t i = 2; i <= c.size() && combos <= 720; ++i) combos *= i;
    const bool exhaustive = combos <= 720;
    std::vector<size_t> slot(k);
    std::function<void(size_t, size_t)> go = [&](size_t ci, size_t base) {
        if (ci == classes.size()) {
            auto [s, v] = attempt(slot);
            if (best_slot.empty() || s < best) {
                best = s;
                best_v = v;
                best_slot = slot;
            }
            return;
        }
        std::vector<size_t> members = classes[ci];
        do {
            for (size_t i = 0; i < members.size(); ++i) slot[members[i]] = base + i;
            go(ci + 1, base + members.size());
        } while (exhaustive && std::next_permutation(members.begin(), members.end()));
    };
    go(0, 0);
    std::vector<std::pair<size_t, Name>> names;
    for (size_t i = 0; i < k; ++i) names.push_back({best_slot[i], g.hidden[i]});
    std::sort(names.begin(), names.end());
    P term = par_terms(best_v);
    for (size_t i = names.size(); i-- > 0;) term = hide(names[i].second, term);
    return {"N" + std::to_string(k) + "(" + best + ")", term};
}

Ser canonical_ser(const P& p) {
    Group g = build(rename_apart(p));
    return ser_group(g, {}, 0);
}

// ---- sessions ----

void flatten_s(const S& s, SK k, std::vector<S>& out) {
    if (s->kind == k) {
        flatten_s(s->left, k, out);
        flatten_s(s->right, k, out);
    } else {
        out.push_back(s);
    }
}

struct SSer {
    std::string s;
    S term;
};

SSer sser(const S& s, const Env& env, int depth) {
    switch (s->kind) {
        case SK::End: return {"end", s_end()};
        case SK::TVar: {
            auto it = env.find(s->var);
            return {"t" + (it == env.end() ? "$" + s->var : it->second), s};
        }
        case SK::Comm: {
            SSer k = sser(s->left, env, depth);
            return {"C(" + s->p + "," + s->q + "," + s->msg + ")." + k.s, s_comm(s->p, s->q, s->msg, k.term)};
        }
        case SK::Estab: {
            SSer k = sser(s->left, env, depth);
            std::string ps;
            for (auto& p : s->parties) ps += p + ",";
            std::string body = s->body ? sser(s->body, {}, 0).s : "";
            return {"E(" + ps + s->body_name + "=" + body + "){" + k.s + "}",
                    s_estab(s->parties, s->body_name, s->body, k.term)};
        }
        case SK::Rec: {
            if (!free_tvars(s->left).count(s->var)) return sser(s->left, env, depth);
            Env e2 = env;
            e2[s->var] = "%" + std::to_string(depth);
            SSer k = sser(s->left, e2, depth + 1);
            if (k.term->kind == SK::End) return k;
            return {"mu(" + k.s + ")", s_rec(s->var, k.term)};
        }
        case SK::Seq: {
            std::vector<S> parts;
            flatten_s(s, SK::Seq, parts);
            std::vector<SSer> ks;
            for (auto& p : parts) {
                SSer k = sser(p, env, depth);
                if (k.term->kind == SK::End) continue;
                if (k.term->kind == SK::Seq) {
                    std::vector<S> inner;
                    flatten_s(k.term, SK::Seq, inner);
                    for (auto& i : inner) ks.push_back(sser(i, env, depth));
                    continue;
                }
                ks.push_back(k);
            }
            if (ks.empty()) return {"end", s_end()};
            if (ks.size() == 1) return ks[0];
            std::string str = ";(";
            S term = ks.back().term;
            for (size_t i = 0; i < ks.size(); ++i) str += (i ? "," : "") + ks[i].s;
            for (size_t i = ks.size() - 1; i-- > 0;) term = s_seq(ks[i].term, term);
            return {str + ")", term};
        }
        case SK::Union:
        case SK::Prod: {
            std::vector<S> parts;
            flatten_s(s, s->kind, parts);
            std::vector<SSer> ks;
            for (auto& p : parts) {
                SSer k = sser(p, env, depth);
                if (k.term->kind == SK::End) continue;
                if (k.term->kind == s->kind) {
                    std::vector<S> inner;
                    flatten_s(k.term, s->kind, inner);
                    for (auto& i : inner) ks.push_back(sser(i, env, depth));
                    continue;
                }
                ks.push_back(k);
            }
            if (ks.empty()) return {"end", s_end()};
            if (ks.size() == 1) return ks[0];
            std::sort(ks.begin(), ks.end(), [](const SSer& a, const SSer& b) { return a.s < b.s; });
            std::string str = s->kind == SK::Union ? "U(" : "X(";
            for (size_t i = 0; i < ks.size(); ++i) str += (i ? "," : "") + ks[i].s;
            S term = ks.back().term;
            for (size_t i = ks.size() - 1; i-- > 0;)
                term = s->kind == SK::Union ? s_union(ks[i].term, term) : s_prod(ks[i].term, term);
            return {str + ")", term};
        }
    }
    return {"?", s};
}

}  // namespace

CanonicalForm canonical(const P& p) {
    Ser s = canonical_ser(p);
    return {s.term, s.s};
}

std::string fingerprint(const P& p) { return canonical_ser(p).s; }
P normalize(const P& p) { return canonical_ser(p).term; }

SessCanonicalForm canonical(const S& s) {
    SSer r = sser(s, {}, 0);
    return {r.term, r.s};
}

std::string fingerprint(const S& s) { return sser(s, {}, 0).s; }
S normalize(const S& s) { return sser(s, {}, 0).term; }

bool proc_congruent(const P& p, const P& q) { return fingerprint(p) == fingerprint(q); }
bool session_congruent(const S& s, const S& t) { return fingerprint(s) == fingerprint(t); }

std::vector<P> summands(const P& p) {
    P n = normalize(p);
    if (n->kind == PK::Nil) return {};
    std::vector<P> out;
    std::vector<P> stack{n};
    while (!stack.empty()) {
        P x = stack.back();
        stack.pop_back();
        if (x->kind == PK::Sum) {
            stack.push_back(x->right);
            stack.push_back(x->left);
        } else {
            out.push_back(x);
        }
    }
    return out;
}

std::vector<P> components(const P& p) {
    P n = normalize(p);
    if (n->kind == PK::Nil) return {};
    if (n->kind == PK::Hide) return {n};
    std::vector<P> out;
    std::vector<P> stack{n};
    while (!stack.empty()) {
        P x = stack.back();
        stack.pop_back();
        if (x->kind == PK::Par) {
            stack.push_back(x->right);
            stack.push_back(x->left);
        } else {
            out.push_back(x);
        }
    }
    return out;
}

namespace {

std::map<std::string, int> summand_counts(const P& p) {
    std::map<std::string, int> m;
    for (auto& s : summands(p)) m[fingerprint(s)]++;
    return m;
}

}  // namespace

bool summand_leq(const P& p, const P& q) {
    auto a = summand_counts(p);
    auto b = summand_counts(q);
    for (auto& [k, n] : a) {
        auto it = b.find(k);
        if (it == b.end() || it->second < n) return false;
    }
    return true;
}

bool summand_lt(const P& p, const P& q) { return summand_leq(p, q) && !proc_congruent(p, q); }

P join(const P& p, const P& q) {
    if (summand_leq(q, p)) return p;
    if (summand_lt(p, q)) return q;
    return sum(p, q);
}

std::vector<std::pair<P, P>> sub_par(const P& p) {
    Group g = build(rename_apart(p));
    struct Atom {
        Name lab;  // empty for unlabelled components
        const Comp* c;
    };
    std::vector<Atom> atoms;
    std::vector<Name> labels;
    auto to_p = [](const Comp& c) {
        Group one;
        one.comps.push_back(c);
        refresh(one);
        return ser_group(one, {}, 0).term;
    };
    for (auto& c : g.comps) {
        if (c.k == Comp::Label) {
            labels.push_back(c.name);
            for (auto& k : c.kids[0].comps) atoms.push_back({c.name, &k});
        } else {
            atoms.push_back({{}, &c});
        }
    }
    std::vector<std::pair<P, P>> out;
    std::set<std::pair<std::string, std::string>> seen;
    const size_t n = atoms.size();
    if (n > 16) return out;
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        std::vector<std::vector<const Atom*>> side(2);
        for (size_t i = 0; i < n; ++i) side[(mask >> i) & 1].push_back(&atoms[i]);
        NameSet fc[2];
        for (int s = 0; s < 2; ++s)
            for (auto* a : side[s]) fc[s].insert(a->c->fc.begin(), a->c->fc.end());
        std::vector<Name> hid[2];
        bool ok = true;
        for (auto& h : g.hidden) {
            bool in0 = fc[0].count(h), in1 = fc[1].count(h);
            if (in0 && in1) {
                ok = false;
                break;
            }
            hid[in1 ? 1 : 0].push_back(h);
        }
        if (!ok) continue;
        // labels missing on a side may still appear there as l:0
        std::vector<Name> missing[2];
        for (int s = 0; s < 2; ++s)
            for (auto& l : labels) {
                bool has = false;
                for (auto* a : side[s])
                    if (a->lab == l) has = true;
                if (!has) missing[s].push_back(l);
            }
        size_t m0 = missing[0].size(), m1 = missing[1].size();
        for (size_t extra = 0; extra < (size_t(1) << (m0 + m1)); ++extra) {
            P built[2];
            for (int s = 0; s < 2; ++s) {
                std::map<Name, std::vector<P>> by_label;
                std::vector<P> parts;
                for (auto* a : side[s]) {
                    if (a->lab.empty())
                        parts.push_back(to_p(*a->c));
                    else
                        by_label[a->lab].push_back(to_p(*a->c));
                }
                size_t off = s == 0 ? 0 : m0;
                for (size_t i = 0; i < missing[s].size(); ++i)
                    if ((extra >> (off + i)) & 1) by_label[missing[s][i]];
                for (auto& [l, ps] : by_label) parts.push_back(label(l, par_all(ps)));
                P body = par_all(parts);
                for (size_t i = hid[s].size(); i-- > 0;) body = hide(hid[s][i], body);
                built[s] = body;
            }
            auto key = std::make_pair(fingerprint(built[0]), fingerprint(built[1]));
            if (seen.insert(key).second) out.push_back({built[0], built[1]});
        }
    }
    return out;
}

std::vector<std::pair<P, P>> sub_sum(const P& p) {
    std::vector<P> ss = summands(p);
    std::map<std::string, std::pair<P, int>> distinct;
    for (auto& s : ss) {
        auto& e = distinct[fingerprint(s)];
        e.first = s;
        e.second++;
    }
    std::vector<std::pair<P, int>> d;
    for (auto& [k, v] : distinct) d.push_back(v);
    // all sub-multisets
    std::vector<P> subs;
    std::vector<int> pick(d.size(), 0);
    for (;;) {
        std::vector<P> parts;
        for (size_t i = 0; i < d.size(); ++i)
            for (int c = 0; c < pick[i]; ++c) parts.push_back(d[i].first);
        subs.push_back(sum_all(parts));
        size_t i = 0;
        while (i < d.size() && pick[i] == d[i].second) pick[i++] = 0;
        if (i == d.size()) break;
        pick[i]++;
    }
    std::string target = fingerprint(p);
    std::vector<std::pair<P, P>> out;
    for (auto& a : subs)
        for (auto& b : subs)
            if (fingerprint(join(a, b)) == target) out.push_back({a, b});
    return out;
}

namespace {

P absorb_rec(const P& p) {
    switch (p->kind) {
        case PK::Nil:
        case PK::Var: return p;
        case PK::Rec: return rec(p->name, absorb_rec(p->left));
        case PK::Label: return label(p->name, absorb_rec(p->left));
        case PK::Prefix: return prefix(p->act, absorb_rec(p->left));
        case PK::Hide: return hide(p->name, absorb_rec(p->left));
        case PK::Par: return par(absorb_rec(p->left), absorb_rec(p->right));
        case PK::Sum: {
            std::vector<P> flat;
            std::vector<P> stack{p};
            while (!stack.empty()) {
                P x = stack.back();
                stack.pop_back();
                if (x->kind == PK::Sum) {
                    stack.push_back(x->right);
                    stack.push_back(x->left);
                } else {
                    flat.push_back(x);
                }
            }
            std::vector<P> kept;
            std::set<std::string> seen;
            for (auto& f : flat) {
                P a = absorb_rec(f);
                if (seen.insert(fingerprint(a)).second) kept.push_back(a);
            }
            return sum_all(kept);
        }
    }
    return p;
}

}  // namespace

P absorb_duplicates(const P& p) {
    P cur = normalize(p);
    for (int i = 0; i < 8; ++i) {
        P next = normalize(absorb_rec(cur));
        if (fingerprint(next) == fingerprint(cur)) return next;
        cur = next;
    }
    return cur;
}

bool congruent_modulo_absorption(const P& p, const P& q) {
    return fingerprint(absorb_duplicates(p)) == fingerprint(absorb_duplicates(q));
}

}  // namespace sess
