#include "sesstool/ast.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace sess {

bool Action::operator<(const Action& o) const {
    return std::tie(kind, chan, msg, num, tuple) < std::tie(o.kind, o.chan, o.msg, o.num, o.tuple);
}

static std::string join_names(const std::vector<Name>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

std::string to_string(const Action& a) {
    switch (a.kind) {
        case ActKind::Send: return a.chan + "!" + a.msg;
        case ActKind::Receive: return a.chan + "?" + a.msg;
        case ActKind::Invite:
            return a.chan + "!inv[2.." + std::to_string(a.num) + "](" + join_names(a.tuple) + ")";
        case ActKind::Accept:
            return a.chan + "?acc[" + std::to_string(a.num) + "](" + join_names(a.tuple) + ")";
        case ActKind::Silent: return "tau";
    }
    return "?";
}

// ---- constructors ----

static P mk(PK k, Name n, Action a, P l, P r) {
    auto p = std::make_shared<Proc>();
    p->kind = k;
    p->name = std::move(n);
    p->act = std::move(a);
    p->left = std::move(l);
    p->right = std::move(r);
    return p;
}

P nil() {
    static const P z = mk(PK::Nil, {}, {}, nullptr, nullptr);
    return z;
}
P var(Name x) { return mk(PK::Var, std::move(x), {}, nullptr, nullptr); }
P rec(Name x, P body) { return mk(PK::Rec, std::move(x), {}, std::move(body), nullptr); }
P label(Name l, P body) { return mk(PK::Label, std::move(l), {}, std::move(body), nullptr); }
P prefix(Action a, P cont) { return mk(PK::Prefix, {}, std::move(a), std::move(cont), nullptr); }
P hide(Name a, P body) { return mk(PK::Hide, std::move(a), {}, std::move(body), nullptr); }
P par(P l, P r) { return mk(PK::Par, {}, {}, std::move(l), std::move(r)); }
P sum(P l, P r) { return mk(PK::Sum, {}, {}, std::move(l), std::move(r)); }

P par_all(const std::vector<P>& ps) {
    if (ps.empty()) return nil();
    P acc = ps.back();
    for (size_t i = ps.size() - 1; i-- > 0;) acc = par(ps[i], acc);
    return acc;
}

P sum_all(const std::vector<P>& ps) {
    if (ps.empty()) return nil();
    P acc = ps.back();
    for (size_t i = ps.size() - 1; i-- > 0;) acc = sum(ps[i], acc);
    return acc;
}

bool same(const P& a, const P& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name || !(a->act == b->act)) return false;
    return same(a->left, b->left) && same(a->right, b->right);
}

size_t node_count(const P& p) {
    if (!p) return 0;
    return 1 + node_count(p->left) + node_count(p->right);
}

// ---- free names ----

NameSet free_channels(const Action& a) {
    if (a.kind == ActKind::Silent) return {};
    return {a.chan};
}

static void fc_into(const P& p, NameSet& bound, NameSet& out) {
    switch (p->kind) {
        case PK::Nil:
        case PK::Var: return;
        case PK::Rec:
        case PK::Label: fc_into(p->left, bound, out); return;
        case PK::Prefix: {
            if (p->act.kind != ActKind::Silent && !bound.count(p->act.chan)) out.insert(p->act.chan);
            std::vector<Name> added;
            for (auto& c : p->act.tuple)
                if (bound.insert(c).second) added.push_back(c);
            fc_into(p->left, bound, out);
            for (auto& c : added) bound.erase(c);
            return;
        }
        case PK::Hide: {
            bool added = bound.insert(p->name).second;
            fc_into(p->left, bound, out);
            if (added) bound.erase(p->name);
            return;
        }
        case PK::Par:
        case PK::Sum:
            fc_into(p->left, bound, out);
            fc_into(p->right, bound, out);
            return;
    }
}

NameSet free_channels(const P& p) {
    NameSet bound, out;
    fc_into(p, bound, out);
    return out;
}

static void fv_into(const P& p, NameSet& bound, NameSet& out) {
    switch (p->kind) {
        case PK::Nil: return;
        case PK::Var:
            if (!bound.count(p->name)) out.insert(p->name);
            return;
        case PK::Rec: {
            bool added = bound.insert(p->name).second;
            fv_into(p->left, bound, out);
            if (added) bound.erase(p->name);
            return;
        }
        case PK::Label:
        case PK::Prefix:
        case PK::Hide: fv_into(p->left, bound, out); return;
        case PK::Par:
        case PK::Sum:
            fv_into(p->left, bound, out);
            fv_into(p->right, bound, out);
            return;
    }
}

NameSet free_vars(const P& p) {
    NameSet bound, out;
    fv_into(p, bound, out);
    return out;
}

static void names_into(const P& p, NameSet& out) {
    if (!p) return;
    switch (p->kind) {
        case PK::Var:
        case PK::Rec:
        case PK::Hide: out.insert(p->name); break;
        case PK::Prefix:
            if (p->act.kind != ActKind::Silent) out.insert(p->act.chan);
            out.insert(p->act.tuple.begin(), p->act.tuple.end());
            break;
        default: break;
    }
    names_into(p->left, out);
    names_into(p->right, out);
}

NameSet all_names(const P& p) {
    NameSet out;
    names_into(p, out);
    return out;
}

// ---- substitution ----

static Renaming restrict_to(const Renaming& m, const NameSet& keep) {
    Renaming r;
    for (auto& [k, v] : m)
        if (keep.count(k) && k != v) r[k] = v;
    return r;
}

static bool targets_hit(const Renaming& m, const Name& n) {
    for (auto& [k, v] : m)
        if (v == n) return true;
    return false;
}

static P subst_rec(const P& p, const Renaming& m) {
    if (m.empty()) return p;
    switch (p->kind) {
        case PK::Nil:
        case PK::Var: return p;
        case PK::Rec: return rec(p->name, subst_rec(p->left, m));
        case PK::Label: return label(p->name, subst_rec(p->left, m));
        case PK::Prefix: {
            Action a = p->act;
            if (a.kind != ActKind::Silent) {
                auto it = m.find(a.chan);
                if (it != m.end()) a.chan = it->second;
            }
            NameSet body_fc = free_channels(p->left);
            for (auto& c : a.tuple) body_fc.erase(c);
            Renaming inner = restrict_to(m, body_fc);
            for (auto& c : p->act.tuple)
                if (targets_hit(inner, c)) throw CaptureRisk("substitution captured by bound channel " + c);
            return prefix(std::move(a), subst_rec(p->left, inner));
        }
        case PK::Hide: {
            NameSet body_fc = free_channels(p->left);
            body_fc.erase(p->name);
            Renaming inner = restrict_to(m, body_fc);
            if (targets_hit(inner, p->name)) throw CaptureRisk("substitution captured by hidden channel " + p->name);
            return hide(p->name, subst_rec(p->left, inner));
        }
        case PK::Par: return par(subst_rec(p->left, m), subst_rec(p->right, m));
        case PK::Sum: return sum(subst_rec(p->left, m), subst_rec(p->right, m));
    }
    return p;
}

P substitute(const P& p, const Renaming& m) { return subst_rec(p, restrict_to(m, free_channels(p))); }

// Renames binders in p that would capture names in `danger`.
static P avoid_binders(const P& p, const NameSet& danger, Fresh& fresh) {
    switch (p->kind) {
        case PK::Nil:
        case PK::Var: return p;
        case PK::Rec: {
            if (danger.count(p->name)) {
                Name y = fresh(p->name);
                P body = subst_var(p->left, p->name, var(y));
                return rec(y, avoid_binders(body, danger, fresh));
            }
            return rec(p->name, avoid_binders(p->left, danger, fresh));
        }
        case PK::Label: return label(p->name, avoid_binders(p->left, danger, fresh));
        case PK::Prefix: {
            Action a = p->act;
            Renaming m;
            for (auto& c : a.tuple)
                if (danger.count(c)) {
                    Name d = fresh(c);
                    m[c] = d;
                    c = d;
                }
            P body = m.empty() ? p->left : substitute(p->left, m);
            return prefix(std::move(a), avoid_binders(body, danger, fresh));
        }
        case PK::Hide: {
            if (danger.count(p->name)) {
                Name d = fresh(p->name);
                P body = substitute(p->left, {{p->name, d}});
                return hide(d, avoid_binders(body, danger, fresh));
            }
            return hide(p->name, avoid_binders(p->left, danger, fresh));
        }
        case PK::Par: return par(avoid_binders(p->left, danger, fresh), avoid_binders(p->right, danger, fresh));
        case PK::Sum: return sum(avoid_binders(p->left, danger, fresh), avoid_binders(p->right, danger, fresh));
    }
    return p;
}

static P subst_var_raw(const P& p, const Name& x, const P& q) {
    switch (p->kind) {
        case PK::Nil: return p;
        case PK::Var: return p->name == x ? q : p;
        case PK::Rec: return p->name == x ? p : rec(p->name, subst_var_raw(p->left, x, q));
        case PK::Label: return label(p->name, subst_var_raw(p->left, x, q));
        case PK::Prefix: return prefix(p->act, subst_var_raw(p->left, x, q));
        case PK::Hide: return hide(p->name, subst_var_raw(p->left, x, q));
        case PK::Par: return par(subst_var_raw(p->left, x, q), subst_var_raw(p->right, x, q));
        case PK::Sum: return sum(subst_var_raw(p->left, x, q), subst_var_raw(p->right, x, q));
    }
    return p;
}

P subst_var(const P& p, const Name& x, const P& q) {
    if (!free_vars(p).count(x)) return p;
    NameSet danger = free_channels(q);
    NameSet qv = free_vars(q);
    danger.insert(qv.begin(), qv.end());
    NameSet bound = all_names(p);
    bool clash = false;
    for (auto& d : danger)
        if (bound.count(d)) clash = true;
    P base = p;
    if (clash) {
        NameSet avoid = all_names(p);
        NameSet qn = all_names(q);
        avoid.insert(qn.begin(), qn.end());
        Fresh fresh(avoid);
        base = avoid_binders(p, danger, fresh);
    }
    return subst_var_raw(base, x, q);
}

P subst_nil(const P& p, const P& q) {
    switch (p->kind) {
        case PK::Nil: return q;
        case PK::Var: return p;
        case PK::Rec: return rec(p->name, subst_nil(p->left, q));
        case PK::Label: return label(p->name, subst_nil(p->left, q));
        case PK::Prefix: return prefix(p->act, subst_nil(p->left, q));
        case PK::Hide: return hide(p->name, subst_nil(p->left, q));
        case PK::Par: return par(subst_nil(p->left, q), subst_nil(p->right, q));
        case PK::Sum: return sum(subst_nil(p->left, q), subst_nil(p->right, q));
    }
    return p;
}

// ---- fresh names ----

Name base_name(const Name& n) {
    auto pos = n.rfind('#');
    if (pos == std::string::npos || pos == 0 || pos + 1 == n.size()) return n;
    for (size_t i = pos + 1; i < n.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(n[i]))) return n;
    return n.substr(0, pos);
}

Name Fresh::operator()(const Name& base) {
    Name b = base_name(base);
    int& k = counters_[b];
    for (;;) {
        Name cand = b + "#" + std::to_string(++k);
        if (!avoid_.count(cand)) {
            avoid_.insert(cand);
            return cand;
        }
    }
}

static P apart_rec(const P& p, Fresh& fresh, const Renaming& chans, const Renaming& vars) {
    switch (p->kind) {
        case PK::Nil: return p;
        case PK::Var: {
            auto it = vars.find(p->name);
            return it == vars.end() ? p : var(it->second);
        }
        case PK::Rec: {
            Name y = fresh(p->name);
            Renaming v2 = vars;
            v2[p->name] = y;
            return rec(y, apart_rec(p->left, fresh, chans, v2));
        }
        case PK::Label: return label(p->name, apart_rec(p->left, fresh, chans, vars));
        case PK::Prefix: {
            Action a = p->act;
            if (a.kind != ActKind::Silent) {
                auto it = chans.find(a.chan);
                if (it != chans.end()) a.chan = it->second;
            }
            Renaming c2 = chans;
            for (auto& c : a.tuple) {
                Name d = fresh(c);
                c2[c] = d;
                c = d;
            }
            return prefix(std::move(a), apart_rec(p->left, fresh, c2, vars));
        }
        case PK::Hide: {
            Name d = fresh(p->name);
            Renaming c2 = chans;
            c2[p->name] = d;
            return hide(d, apart_rec(p->left, fresh, c2, vars));
        }
        case PK::Par: return par(apart_rec(p->left, fresh, chans, vars), apart_rec(p->right, fresh, chans, vars));
        case PK::Sum: return sum(apart_rec(p->left, fresh, chans, vars), apart_rec(p->right, fresh, chans, vars));
    }
    return p;
}

P rename_apart(const P& p, Fresh& fresh) {
    fresh.avoid(all_names(p));
    return apart_rec(p, fresh, {}, {});
}

P rename_apart(const P& p) {
    Fresh fresh;
    return rename_apart(p, fresh);
}

static bool apart_check(const P& p, NameSet& seen_bound) {
    switch (p->kind) {
        case PK::Nil:
        case PK::Var: return true;
        case PK::Rec:
        case PK::Hide:
            if (!seen_bound.insert(p->name).second) return false;
            return apart_check(p->left, seen_bound);
        case PK::Label: return apart_check(p->left, seen_bound);
        case PK::Prefix:
            for (auto& c : p->act.tuple)
                if (!seen_bound.insert(c).second) return false;
            return apart_check(p->left, seen_bound);
        case PK::Par:
        case PK::Sum: return apart_check(p->left, seen_bound) && apart_check(p->right, seen_bound);
    }
    return true;
}

bool is_apart(const P& p) {
    NameSet bound;
    if (!apart_check(p, bound)) return false;
    for (auto& n : free_channels(p))
        if (bound.count(n)) return false;
    for (auto& n : free_vars(p))
        if (bound.count(n)) return false;
    return true;
}

// ---- sessions ----

static S smk(SK k) {
    auto s = std::make_shared<Sess>();
    s->kind = k;
    return s;
}

S s_end() {
    static const S e = smk(SK::End);
    return e;
}

S s_comm(Name p, Name q, Name v, S cont) {
    auto s = std::make_shared<Sess>();
    s->kind = SK::Comm;
    s->p = std::move(p);
    s->q = std::move(q);
    s->msg = std::move(v);
    s->left = std::move(cont);
    return s;
}

S s_estab(std::vector<Name> parties, Name body_name, S body, S nested) {
    auto s = std::make_shared<Sess>();
    s->kind = SK::Estab;
    s->parties = std::move(parties);
    s->body_name = std::move(body_name);
    s->body = std::move(body);
    s->left = nested ? std::move(nested) : s_end();
    return s;
}

static S sbin(SK k, S l, S r) {
    auto s = std::make_shared<Sess>();
    s->kind = k;
    s->left = std::move(l);
    s->right = std::move(r);
    return s;
}

S s_seq(S l, S r) { return sbin(SK::Seq, std::move(l), std::move(r)); }
S s_union(S l, S r) { return sbin(SK::Union, std::move(l), std::move(r)); }
S s_prod(S l, S r) { return sbin(SK::Prod, std::move(l), std::move(r)); }

S s_var(Name t) {
    auto s = std::make_shared<Sess>();
    s->kind = SK::TVar;
    s->var = std::move(t);
    return s;
}

S s_rec(Name t, S body) {
    auto s = std::make_shared<Sess>();
    s->kind = SK::Rec;
    s->var = std::move(t);
    s->left = std::move(body);
    return s;
}

S s_union_all(const std::vector<S>& ss) {
    if (ss.empty()) return s_end();
    S acc = ss.back();
    for (size_t i = ss.size() - 1; i-- > 0;) acc = s_union(ss[i], acc);
    return acc;
}

bool same(const S& a, const S& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->p != b->p || a->q != b->q || a->msg != b->msg || a->parties != b->parties ||
        a->body_name != b->body_name || a->var != b->var)
        return false;
    return same(a->body, b->body) && same(a->left, b->left) && same(a->right, b->right);
}

size_t node_count(const S& s) {
    if (!s) return 0;
    return 1 + node_count(s->left) + node_count(s->right);
}

static void ftv_into(const S& s, NameSet& bound, NameSet& out) {
    if (!s) return;
    switch (s->kind) {
        case SK::TVar:
            if (!bound.count(s->var)) out.insert(s->var);
            return;
        case SK::Rec: {
            bool added = bound.insert(s->var).second;
            ftv_into(s->left, bound, out);
            if (added) bound.erase(s->var);
            return;
        }
        default:
            ftv_into(s->left, bound, out);
            ftv_into(s->right, bound, out);
    }
}

NameSet free_tvars(const S& s) {
    NameSet bound, out;
    ftv_into(s, bound, out);
    return out;
}

NameSet pid(const S& s) {
    NameSet out;
    if (!s) return out;
    switch (s->kind) {
        case SK::Comm:
            out = pid(s->left);
            out.insert(s->p);
            out.insert(s->q);
            return out;
        case SK::Estab:
            out = pid(s->left);
            out.insert(s->parties.begin(), s->parties.end());
            return out;
        case SK::End:
        case SK::TVar: return out;
        default: {
            out = pid(s->left);
            NameSet r = pid(s->right);
            out.insert(r.begin(), r.end());
            return out;
        }
    }
}

bool is_communicating(const S& s) {
    if (!s) return true;
    if (s->kind == SK::Estab) return false;
    return is_communicating(s->left) && is_communicating(s->right);
}

bool is_integrating(const S& s) {
    if (!s) return true;
    if (s->kind == SK::Comm) return false;
    if (s->kind == SK::Estab && !is_communicating(s->body)) return false;
    return is_integrating(s->left) && is_integrating(s->right);
}

S rename_participants(const S& s, const Renaming& m) {
    if (!s) return s;
    auto rn = [&](const Name& n) {
        auto it = m.find(n);
        return it == m.end() ? n : it->second;
    };
    switch (s->kind) {
        case SK::End:
        case SK::TVar: return s;
        case SK::Comm: return s_comm(rn(s->p), rn(s->q), s->msg, rename_participants(s->left, m));
        case SK::Estab: {
            std::vector<Name> ps;
            for (auto& p : s->parties) ps.push_back(rn(p));
            return s_estab(ps, s->body_name, s->body, rename_participants(s->left, m));
        }
        case SK::Rec: return s_rec(s->var, rename_participants(s->left, m));
        default: return sbin(s->kind, rename_participants(s->left, m), rename_participants(s->right, m));
    }
}

S subst_tvar(const S& s, const Name& t, const S& r) {
    if (!s) return s;
    switch (s->kind) {
        case SK::End: return s;
        case SK::TVar: return s->var == t ? r : s;
        case SK::Comm: return s_comm(s->p, s->q, s->msg, subst_tvar(s->left, t, r));
        case SK::Estab: return s_estab(s->parties, s->body_name, s->body, subst_tvar(s->left, t, r));
        case SK::Rec: return s->var == t ? s : s_rec(s->var, subst_tvar(s->left, t, r));
        default: return sbin(s->kind, subst_tvar(s->left, t, r), subst_tvar(s->right, t, r));
    }
}

static bool all_numeric(const NameSet& ns) {
    for (auto& n : ns) {
        if (n.empty()) return false;
        for (char c : n)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::vector<Name> participant_order(const S& b) {
    NameSet ns = pid(b);
    std::vector<Name> v(ns.begin(), ns.end());
    if (all_numeric(ns))
        std::sort(v.begin(), v.end(), [](const Name& x, const Name& y) { return std::stoll(x) < std::stoll(y); });
    return v;
}

P system_process(const SystemDef& sys) {
    std::vector<P> parts;
    for (auto& [r, p] : sys.components) parts.push_back(label(r, p));
    return par_all(parts);
}

}  // namespace sess

namespace sess {

bool TypeEnv::binds(const Name& chan) const { return !session_name(chan).empty(); }

Name TypeEnv::session_name(const Name& chan) const {
    for (auto& [c, s] : bindings)
        if (c == chan) return s;
    return {};
}

S TypeEnv::session_of(const Name& chan) const {
    Name s = session_name(chan);
    if (s.empty()) return nullptr;
    auto it = sessions.find(s);
    return it == sessions.end() ? nullptr : it->second;
}

std::vector<Name> TypeEnv::channels_for(const Name& session) const {
    std::vector<Name> out;
    for (auto& [c, s] : bindings)
        if (s == session) out.push_back(c);
    return out;
}

}  // namespace sess
