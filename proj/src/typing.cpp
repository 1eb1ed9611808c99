#include "sesstool/typing.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "sesstool/congruence.hpp"
#include "sesstool/parser.hpp"
#include "sesstool/projection.hpp"

namespace sess {

P ceil(const ChannelTyping& d) {
    std::vector<P> ps;
    for (auto& e : d.entries) ps.push_back(e.proc);
    return par_all(ps);
}

bool compatible(const ChannelTyping& d, const ChannelTyping& e) {
    if (d.entries.size() != e.entries.size()) return false;
    for (size_t i = 0; i < d.entries.size(); ++i)
        if (d.entries[i].label != e.entries[i].label) return false;
    return true;
}

std::string kind_name(TypeErrorKind k) {
    switch (k) {
        case TypeErrorKind::UnboundSessionChannel: return "UnboundSessionChannel";
        case TypeErrorKind::RoleMismatch: return "RoleMismatch";
        case TypeErrorKind::ArityMismatch: return "ArityMismatch";
        case TypeErrorKind::VariableSplit: return "VariableSplit";
        case TypeErrorKind::NotTypable: return "NotTypable";
    }
    return "?";
}

namespace {

constexpr int kSession = -1;  // placement of a variable in R
using Order = std::vector<int>;

// Intermediate typing: entries keyed by tuple id plus every entry order the
// rules admit so far.
struct Ty {
    P R;
    std::map<int, P> ent;
    std::set<Order> orders;
    NameSet hidden;
};

struct Fail {
    TypeError err;
};

[[noreturn]] void fail(TypeErrorKind k, const std::string& msg, const P& where, const Name& chan = {}) {
    TypeError e;
    e.kind = k;
    e.message = msg;
    e.channel = chan;
    e.where = where;
    throw Fail{e};
}

std::string tuple_str(const std::vector<Name>& t) {
    std::string s = "(";
    for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + t[i];
    return s + ")";
}

class Inferer {
public:
    Inferer(const TypeEnv& env, const P& root, const InferOptions& opts) : env_(env) {
        for (auto& t : opts.tuples) add_tuple(t);
        collect_binder_tuples(root);
        collect_hidden_chains(root, false);
        for (auto& c : free_channels(root))
            if (!env_.binds(c) && !reg_.count(c)) add_tuple({c});
        rank_.resize(tuples_.size());
        std::iota(rank_.begin(), rank_.end(), 0);
        if (opts.order_seed) std::shuffle(rank_.begin(), rank_.end(), std::mt19937(opts.order_seed));
        collect_placements(root, nullptr, {});
    }

    // Variables in first-occurrence order with their candidate positions,
    // the heuristic position first.
    struct VarInfo {
        Name name;
        std::vector<int> occurrences;
        std::vector<int> candidates;
    };
    std::vector<VarInfo> vars;

    void set_placement(const std::map<Name, int>& m) { placement_ = m; }

    Ty run(const P& p) {
        switch (p->kind) {
            case PK::Nil: return {nil(), {}, {Order{}}, {}};
            case PK::Var: {
                int pos = placement_.count(p->name) ? placement_.at(p->name) : kSession;
                if (pos == kSession) return {p, {}, {Order{}}, {}};
                return {nil(), {{pos, p}}, {Order{pos}}, {}};
            }
            case PK::Label: return run(p->left);
            case PK::Prefix: return prefix_rule(p);
            case PK::Hide: {
                Ty t = run(p->left);
                const Name& b = p->name;
                if (env_.binds(b)) fail(TypeErrorKind::NotTypable, "restriction of session channel " + b, p, b);
                for (auto& [id, q] : t.ent)
                    if (has(tuples_[id], b) && !t.hidden.count(b)) {
                        t.hidden.insert(b);  // [T-hid]: relabel in place
                        return t;
                    }
                return t;  // [T-vei]
            }
            case PK::Par:
            case PK::Sum: {
                Ty a = run(p->left), b = run(p->right);
                return merge(a, b, p);
            }
            case PK::Rec: {
                Ty t = run(p->left);
                const Name& x = p->name;
                auto close = [&](const P& q) { return free_vars(q).count(x) ? rec(x, q) : q; };
                t.R = close(t.R);
                for (auto& [id, q] : t.ent) q = close(q);
                return t;
            }
        }
        return {nil(), {}, {Order{}}, {}};
    }

    Typing finish(const Ty& t) const {
        const Order* best = nullptr;
        auto ranked = [&](const Order& o) {
            std::vector<int> r;
            for (int id : o) r.push_back(rank_[id]);
            return r;
        };
        for (auto& o : t.orders)
            if (!best || ranked(o) < ranked(*best)) best = &o;
        Typing out;
        out.session = t.R;
        for (auto& [x, pos] : placement_) out.variable_tuples[x] = pos == kSession ? std::vector<Name>{} : tuples_[pos];
        if (best)
            for (int id : *best) {
                ChannelEntry e;
                e.tuple = tuples_[id];
                for (auto& n : e.tuple)
                    if (!t.hidden.count(n)) e.label.push_back(n);
                e.proc = t.ent.at(id);
                out.channels.entries.push_back(e);
            }
        return out;
    }

private:
    static bool has(const std::vector<Name>& v, const Name& n) { return std::find(v.begin(), v.end(), n) != v.end(); }

    int add_tuple(const std::vector<Name>& t) {
        int id = static_cast<int>(tuples_.size());
        tuples_.push_back(t);
        for (auto& n : t) reg_[n] = id;
        return id;
    }

    void collect_binder_tuples(const P& p) {
        if (!p) return;
        if (p->kind == PK::Prefix && p->act.is_session() && !p->act.tuple.empty() && !reg_.count(p->act.tuple[0]))
            add_tuple(p->act.tuple);
        collect_binder_tuples(p->left);
        collect_binder_tuples(p->right);
    }

    // A chain of directly nested restrictions of uncovered names is one tuple.
    void collect_hidden_chains(const P& p, bool in_chain) {
        if (!p) return;
        if (p->kind == PK::Hide && !in_chain) {
            std::vector<Name> chain;
            P q = p;
            while (q->kind == PK::Hide) {
                if (!reg_.count(q->name) && !env_.binds(q->name)) chain.push_back(q->name);
                q = q->left;
            }
            if (!chain.empty()) add_tuple(chain);
            collect_hidden_chains(q, false);
            return;
        }
        collect_hidden_chains(p->left, false);
        collect_hidden_chains(p->right, false);
    }

    void collect_placements(const P& p, const Action* nearest, std::vector<int> path_tuples) {
        switch (p->kind) {
            case PK::Nil: return;
            case PK::Var: {
                int pos = kSession;
                if (nearest && nearest->is_comm() && reg_.count(nearest->chan)) pos = reg_.at(nearest->chan);
                auto it = std::find_if(vars.begin(), vars.end(), [&](const VarInfo& v) { return v.name == p->name; });
                if (it == vars.end()) {
                    vars.push_back({p->name, {}, {pos, kSession}});
                    it = vars.end() - 1;
                }
                it->occurrences.push_back(pos);
                for (int t : path_tuples) it->candidates.push_back(t);
                std::vector<int> uniq;
                for (int c : it->candidates)
                    if (std::find(uniq.begin(), uniq.end(), c) == uniq.end()) uniq.push_back(c);
                it->candidates = uniq;
                return;
            }
            case PK::Prefix:
                if (p->act.is_comm() && reg_.count(p->act.chan)) path_tuples.push_back(reg_.at(p->act.chan));
                collect_placements(p->left, &p->act, path_tuples);
                return;
            default:
                if (p->left) collect_placements(p->left, nearest, path_tuples);
                if (p->right) collect_placements(p->right, nearest, path_tuples);
                return;
        }
    }

    Ty prefix_rule(const P& p) {
        const Action& a = p->act;
        if (a.is_comm()) {
            if (env_.binds(a.chan))
                fail(TypeErrorKind::NotTypable, "communication on session channel " + a.chan, p, a.chan);
            const int t = reg_.at(a.chan);
            Ty ty = run(p->left);
            auto it = ty.ent.find(t);
            if (it == ty.ent.end()) {  // [T-tml] then [T-sr]
                std::set<Order> os;
                for (auto& o : ty.orders) {
                    Order w{t};
                    w.insert(w.end(), o.begin(), o.end());
                    os.insert(w);
                }
                ty.orders = std::move(os);
                ty.ent[t] = prefix(a, nil());
                return ty;
            }
            std::set<Order> os;
            for (auto& o : ty.orders)
                if (o.front() == t) os.insert(o);
            if (os.empty())
                fail(TypeErrorKind::NotTypable,
                     "prefix on " + a.chan + " while " + tuple_str(tuples_[t]) + " is not first in the channel typing", p,
                     a.chan);
            ty.orders = std::move(os);
            it->second = prefix(a, it->second);
            return ty;
        }
        // [T-inv] / [T-acc]
        if (!env_.binds(a.chan))
            fail(TypeErrorKind::UnboundSessionChannel, "session channel " + a.chan + " is not bound", p, a.chan);
        const Name bname = env_.session_name(a.chan);
        const S b = env_.session_of(a.chan);
        const int n = static_cast<int>(participant_order(b).size());
        const int k = a.kind == ActKind::Invite ? 1 : a.num;
        if (a.kind == ActKind::Invite && a.num != n)
            fail(TypeErrorKind::ArityMismatch,
                 "invitation for " + std::to_string(a.num) + " parties but " + bname + " has " + std::to_string(n), p,
                 a.chan);
        if (a.kind == ActKind::Accept && (k < 2 || k > n))
            fail(TypeErrorKind::ArityMismatch,
                 "acceptance index " + std::to_string(k) + " outside 2.." + std::to_string(n) + " of " + bname, p,
                 a.chan);
        const size_t width = signature_width(bname, b);
        if (a.tuple.size() != width)
            fail(TypeErrorKind::ArityMismatch,
                 "tuple of " + std::to_string(a.tuple.size()) + " channels for " + bname + " which uses " +
                     std::to_string(width),
                 p, a.chan);
        const int t = reg_.at(a.tuple[0]);
        Ty ty = run(p->left);
        P found = nil();
        auto it = ty.ent.find(t);
        if (it != ty.ent.end()) {
            found = it->second;
            std::set<Order> os;
            for (auto& o : ty.orders)
                if (o.front() == t) os.insert(Order(o.begin() + 1, o.end()));
            if (os.empty())
                fail(TypeErrorKind::NotTypable,
                     "session on " + a.chan + " closes while " + tuple_str(a.tuple) + " is not first in the channel typing",
                     p, a.chan);
            ty.orders = std::move(os);
            ty.ent.erase(it);
        }
        P expected = role_instance(bname, b, k, a.tuple);
        if (!proc_congruent(found, expected)) {
            TypeError e;
            e.kind = TypeErrorKind::RoleMismatch;
            e.channel = a.chan;
            e.expected = expected;
            e.found = found;
            e.where = p;
            e.message = "behaviour on " + tuple_str(a.tuple) + " is " + print(found) + " but " + bname + " role " +
                        std::to_string(k) + " is " + print(expected);
            throw Fail{e};
        }
        ty.R = prefix(a, ty.R);
        return ty;
    }

    static bool contiguous_restriction(const Order& w, const std::set<int>& keys, Order& restricted) {
        restricted.clear();
        int start = -1, end = -1;
        for (int i = 0; i < static_cast<int>(w.size()); ++i)
            if (keys.count(w[i])) {
                if (start < 0) start = i;
                end = i;
                restricted.push_back(w[i]);
            }
        return start < 0 || end - start + 1 == static_cast<int>(restricted.size());
    }

    // [T-tml]/[T-tmr] padding of both sides to a common order, then [T-com]
    // or [T-sum].
    Ty merge(const Ty& x, const Ty& y, const P& p) {
        const bool is_par = p->kind == PK::Par;
        const Ty& a = x.ent.size() >= y.ent.size() ? x : y;
        const Ty& b = x.ent.size() >= y.ent.size() ? y : x;
        std::set<int> keys_b;
        for (auto& [id, q] : b.ent) keys_b.insert(id);
        std::vector<int> missing;
        for (auto& [id, q] : b.ent)
            if (!a.ent.count(id)) missing.push_back(id);
        double count = static_cast<double>(a.orders.size()) * (missing.size() + 1);
        for (size_t i = 2; i <= missing.size(); ++i) count *= static_cast<double>(i);
        if (count > 200000) fail(TypeErrorKind::NotTypable, "channel typings too wide to align", p);
        std::set<Order> out;
        Order restricted;
        std::sort(missing.begin(), missing.end());
        for (auto& o : a.orders) {
            std::vector<int> perm = missing;
            do {
                for (size_t s = 0; s <= perm.size(); ++s) {
                    Order w(perm.begin(), perm.begin() + static_cast<long>(s));
                    w.insert(w.end(), o.begin(), o.end());
                    w.insert(w.end(), perm.begin() + static_cast<long>(s), perm.end());
                    if (contiguous_restriction(w, keys_b, restricted) && b.orders.count(restricted)) out.insert(w);
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        if (out.empty()) fail(TypeErrorKind::NotTypable, "channel typings of the two operands cannot be aligned", p);
        Ty r;
        r.orders = std::move(out);
        r.hidden = x.hidden;
        r.hidden.insert(y.hidden.begin(), y.hidden.end());
        auto combine = [&](const P& l, const P& rr) { return is_par ? par(l, rr) : join(l, rr); };
        r.R = combine(x.R, y.R);
        if (is_par) {
            if (x.R->kind == PK::Nil) r.R = y.R;
            else if (y.R->kind == PK::Nil) r.R = x.R;
        }
        for (auto& [id, q] : x.ent) r.ent[id] = q;
        for (auto& [id, q] : y.ent) {
            auto it = r.ent.find(id);
            if (it == r.ent.end()) r.ent[id] = q;
            else it->second = combine(it->second, q);
        }
        return r;
    }

    const TypeEnv& env_;
    std::vector<std::vector<Name>> tuples_;
    std::map<Name, int> reg_;
    std::vector<int> rank_;
    std::map<Name, int> placement_;
};

}  // namespace

InferResult infer_principal(const TypeEnv& env, const P& p, const InferOptions& opts) {
    InferResult out;
    Inferer inf(env, p, opts);
    std::map<Name, int> heuristic;
    bool split = false;
    Name split_var;
    for (auto& v : inf.vars) {
        heuristic[v.name] = v.occurrences.front();
        for (int o : v.occurrences)
            if (o != v.occurrences.front() && !split) {
                split = true;
                split_var = v.name;
            }
    }
    std::optional<TypeError> first_error;
    if (!split) {
        inf.set_placement(heuristic);
        try {
            out.typing = inf.finish(inf.run(p));
            return out;
        } catch (const Fail& f) {
            first_error = f.err;
        }
    } else {
        TypeError e;
        e.kind = TypeErrorKind::VariableSplit;
        e.channel = split_var;
        e.where = p;
        e.message = "variable " + split_var + " occurs both in the session typing and in a channel entry, or in two entries";
        first_error = e;
    }
    // [T-var] admits either position; try the other placements in order.
    std::vector<size_t> digit(inf.vars.size(), 0);
    for (int attempt = 0; attempt < 256; ++attempt) {
        if (attempt > 0) {
            size_t i = 0;
            while (i < digit.size() && ++digit[i] == inf.vars[i].candidates.size()) digit[i++] = 0;
            if (i == digit.size()) break;
        }
        std::map<Name, int> m;
        for (size_t j = 0; j < digit.size(); ++j) m[inf.vars[j].name] = inf.vars[j].candidates[digit[j]];
        if (!split && m == heuristic) continue;
        inf.set_placement(m);
        try {
            out.typing = inf.finish(inf.run(p));
            return out;
        } catch (const Fail&) {
        }
    }
    out.error = first_error;
    return out;
}

CheckReport check_against(const TypeEnv& env, const P& p, const P& expected, const InferOptions& opts) {
    CheckReport r;
    r.expected = expected;
    auto inf = infer_principal(env, p, opts);
    if (!inf.ok()) {
        r.error = inf.error;
        r.message = kind_name(inf.error->kind) + ": " + inf.error->message;
        return r;
    }
    r.typing = inf.typing;
    if (!proc_congruent(inf.typing->session, expected)) {
        r.role_disagreement = true;
        r.message = "RoleDisagreement: inferred " + print(inf.typing->session) + " but expected " + print(expected);
        return r;
    }
    for (auto& e : inf.typing->channels.entries)
        if (!proc_congruent(e.proc, nil())) {
            r.message = "channel entry " + tuple_str(e.label) + " : " + print(e.proc) + " is not closed";
            return r;
        }
    r.passed = true;
    return r;
}

}  // namespace sess
