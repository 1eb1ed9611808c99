#include "sesstool/session_analysis.hpp"

#include "sesstool/parser.hpp"

namespace sess {

namespace {

bool contains_prod(const S& s) {
    if (!s) return false;
    if (s->kind == SK::Prod) return true;
    return contains_prod(s->left) || contains_prod(s->right);
}

void wf(const S& s, const std::string& path, SessionReport& r) {
    if (!s) return;
    switch (s->kind) {
        case SK::Comm:
            if (s->p == s->q)
                r.violations.push_back({1, path, s, "participant " + s->p + " communicates with itself"});
            wf(s->left, path + "/cont", r);
            return;
        case SK::Estab: {
            NameSet distinct(s->parties.begin(), s->parties.end());
            size_t want = s->body ? pid(s->body).size() : 0;
            if (distinct.size() != s->parties.size())
                r.violations.push_back({2, path, s, "party list repeats a participant"});
            else if (s->parties.size() != want)
                r.violations.push_back({2, path, s,
                                        std::to_string(s->parties.size()) + " parties for " + s->body_name +
                                            " with " + std::to_string(want) + " participants"});
            if (s->body) wf(s->body, path + "/body", r);
            wf(s->left, path + "/nested", r);
            return;
        }
        case SK::Seq:
            if (contains_prod(s->left))
                r.violations.push_back({3, path, s, "left side of a concatenation contains a product"});
            wf(s->left, path + "/left", r);
            wf(s->right, path + "/right", r);
            return;
        case SK::Union:
        case SK::Prod:
            wf(s->left, path + "/left", r);
            wf(s->right, path + "/right", r);
            return;
        case SK::Rec: wf(s->left, path + "/body", r); return;
        case SK::End:
        case SK::TVar: return;
    }
}

bool all_meet(const NameSet& a, const OpidSet& hs) {
    for (auto& h : hs) {
        bool meet = false;
        for (auto& x : a)
            if (h.count(x)) meet = true;
        if (!meet) return false;
    }
    return true;
}

// Subsessions in presentation order; establishment bodies are referenced by
// name and are not part of the presentation.
void subsessions(const S& s, std::vector<S>& out) {
    if (!s) return;
    out.push_back(s);
    subsessions(s->left, out);
    subsessions(s->right, out);
}

bool rf(const S& s, const std::string& path, SessionReport& r) {
    auto fail = [&](int clause, const std::string& msg) {
        r.violations.push_back({clause, path, s, msg});
        return false;
    };
    switch (s->kind) {
        case SK::End:
        case SK::TVar: return true;
        case SK::Rec: return rf(s->left, path + "/body", r);
        case SK::Comm: {
            if (!rf(s->left, path + "/cont", r)) return false;
            if (!all_meet({s->p, s->q}, opid(s->left)))
                return fail(3, "continuation can start without " + s->p + " or " + s->q);
            return true;
        }
        case SK::Estab: {
            if (s->body && !rf(s->body, path + "/body", r)) return false;
            return rf(s->left, path + "/nested", r);
        }
        case SK::Union: {
            if (!rf(s->left, path + "/left", r) || !rf(s->right, path + "/right", r)) return false;
            OpidSet a = opid(s->left), b = opid(s->right);
            for (auto& h : a)
                if (!all_meet(h, b)) return fail(5, "branches can start with disjoint participants");
            return true;
        }
        case SK::Prod: return rf(s->left, path + "/left", r) && rf(s->right, path + "/right", r);
        case SK::Seq: {
            if (pid(s->left).empty()) return rf(s->right, path + "/right", r);
            if (!rf(s->left, path + "/left", r) || !rf(s->right, path + "/right", r)) return false;
            OpidSet t = opid(s->right);
            std::vector<S> subs;
            subsessions(s->left, subs);
            for (auto& sub : subs) {
                NameSet ps = pid(sub);
                if (ps.empty()) continue;
                if (!all_meet(ps, t))
                    return fail(8, "subsession " + print(sub) + " shares no participant with a start of the right side");
            }
            return true;
        }
    }
    return true;
}

}  // namespace

SessionReport well_formed(const S& s) {
    SessionReport r;
    wf(s, "", r);
    r.passed = r.violations.empty();
    return r;
}

OpidSet opid(const S& s) {
    switch (s->kind) {
        case SK::End:
        case SK::TVar: return {};
        case SK::Rec: return opid(s->left);
        case SK::Comm: return {{s->p, s->q}};
        case SK::Estab: return {NameSet(s->parties.begin(), s->parties.end())};
        case SK::Union:
        case SK::Prod: {
            OpidSet a = opid(s->left), b = opid(s->right);
            a.insert(b.begin(), b.end());
            return a;
        }
        case SK::Seq: {
            OpidSet a = opid(s->left);
            return a.empty() ? opid(s->right) : a;
        }
    }
    return {};
}

SessionReport race_free(const S& s) {
    SessionReport r;
    r.passed = rf(s, "", r);
    return r;
}

}  // namespace sess
