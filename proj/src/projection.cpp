#include "sesstool/projection.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <mutex>
#include <tuple>

#include "sesstool/parser.hpp"
#include "sesstool/semantics.hpp"

namespace sess {

namespace {

Name rec_var(const Name& t) { return "X_" + t; }

void mark_walk(const S& s, const std::string& path, const Name& base, const TypeEnv* env,
               std::map<Name, size_t>& used, NameSet& taken, MarkedSession& out) {
    if (!s) return;
    switch (s->kind) {
        case SK::Comm:
            if (!env) out.marks.push_back({path, base + "_" + std::to_string(out.marks.size() + 1), s});
            mark_walk(s->left, path + "/cont", base, env, used, taken, out);
            return;
        case SK::Estab: {
            if (env) {
                auto declared = env->channels_for(s->body_name);
                size_t k = used[s->body_name]++;
                Name ch;
                if (k < declared.size()) {
                    ch = declared[k];
                } else {
                    int n = static_cast<int>(k) + 1;
                    do ch = channel_base(s->body_name) + "_" + std::to_string(n++);
                    while (taken.count(ch) || env->binds(ch));
                }
                taken.insert(ch);
                out.marks.push_back({path, ch, s});
            }
            mark_walk(s->left, path + "/nested", base, env, used, taken, out);
            return;
        }
        case SK::Rec: mark_walk(s->left, path + "/body", base, env, used, taken, out); return;
        case SK::End:
        case SK::TVar: return;
        default:
            mark_walk(s->left, path + "/left", base, env, used, taken, out);
            mark_walk(s->right, path + "/right", base, env, used, taken, out);
            return;
    }
}

using PathMap = std::map<std::string, Name>;

PathMap path_map(const MarkedSession& m) {
    PathMap out;
    for (auto& mk : m.marks) out[mk.path] = mk.channel;
    return out;
}

P proj_comm(const S& s, const Name& r, const std::string& path, const PathMap& marks) {
    switch (s->kind) {
        case SK::End: return nil();
        case SK::TVar: return var(rec_var(s->var));
        case SK::Rec: return rec(rec_var(s->var), proj_comm(s->left, r, path + "/body", marks));
        case SK::Comm: {
            P cont = proj_comm(s->left, r, path + "/cont", marks);
            const Name& c = marks.at(path);
            if (r == s->p) return prefix(Action::send(c, s->msg), cont);
            if (r == s->q) return prefix(Action::recv(c, s->msg), cont);
            return cont;
        }
        case SK::Estab: throw std::invalid_argument("establishment inside a communicating session");
        case SK::Seq:
            return subst_nil(proj_comm(s->left, r, path + "/left", marks), proj_comm(s->right, r, path + "/right", marks));
        case SK::Union:
            return sum(proj_comm(s->left, r, path + "/left", marks), proj_comm(s->right, r, path + "/right", marks));
        case SK::Prod:
            return par(proj_comm(s->left, r, path + "/left", marks), proj_comm(s->right, r, path + "/right", marks));
    }
    return nil();
}

P proj_int(const S& s, const Name& r, const std::string& path, const PathMap& marks, const TypeEnv& env) {
    switch (s->kind) {
        case SK::End: return nil();
        case SK::TVar: return var(rec_var(s->var));
        case SK::Rec: return rec(rec_var(s->var), proj_int(s->left, r, path + "/body", marks, env));
        case SK::Comm: throw std::invalid_argument("communication inside an integrating session");
        case SK::Estab: {
            P cont = proj_int(s->left, r, path + "/nested", marks, env);
            auto at = std::find(s->parties.begin(), s->parties.end(), r);
            if (at == s->parties.end()) return cont;
            S body = s->body;
            if (!body) {
                auto it = env.sessions.find(s->body_name);
                if (it == env.sessions.end()) throw UnboundSession(s->body_name);
                body = it->second;
            }
            const auto& cp = communicating_projection(s->body_name, body);
            const Name& a = marks.at(path);
            const int k = static_cast<int>(at - s->parties.begin()) + 1;
            const auto& tuple = cp.pairwise.signature;
            if (k == 1) return prefix(Action::invite(a, static_cast<int>(s->parties.size()), tuple), cont);
            return prefix(Action::accept(a, k, tuple), cont);
        }
        case SK::Seq:
            return subst_nil(proj_int(s->left, r, path + "/left", marks, env),
                             proj_int(s->right, r, path + "/right", marks, env));
        case SK::Union:
            return sum(proj_int(s->left, r, path + "/left", marks, env), proj_int(s->right, r, path + "/right", marks, env));
        case SK::Prod:
            return par(proj_int(s->left, r, path + "/left", marks, env), proj_int(s->right, r, path + "/right", marks, env));
    }
    return nil();
}

Name mark_base(const MarkedSession& m) {
    if (m.marks.empty()) return "c";
    const Name& c = m.marks.front().channel;
    return c.substr(0, c.rfind('_'));
}

}  // namespace

Name channel_base(const Name& session_name) {
    Name out = session_name;
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

MarkedSession mark_session(const S& s, const Name& base) {
    MarkedSession out{s, {}};
    std::map<Name, size_t> used;
    NameSet taken;
    mark_walk(s, "", base, nullptr, used, taken, out);
    return out;
}

MarkedSession mark_session(const S& s, const Name& base, const TypeEnv& env) {
    MarkedSession out{s, {}};
    std::map<Name, size_t> used;
    NameSet taken;
    mark_walk(s, "", base, &env, used, taken, out);
    return out;
}

std::vector<P> all_roles(const MarkedSession& m) {
    std::vector<P> out;
    PathMap marks = path_map(m);
    for (auto& r : participant_order(m.sess)) out.push_back(proj_comm(m.sess, r, "", marks));
    return out;
}

void validate_substitution(const MarkedSession& m, const Renaming& subst) {
    if (subst.empty()) return;
    std::vector<P> roles;
    for (auto& r : all_roles(m)) roles.push_back(substitute(r, subst));
    auto det = message_flow_deterministic(par_all(roles), ExplorationBudget::from_env());
    if (!det.value) throw IllegalSubstitution("message flow of the substituted roles is not deterministic", det.witness);
}

P project_communicating(const MarkedSession& m, const Name& r, const Renaming& subst) {
    validate_substitution(m, subst);
    P role = proj_comm(m.sess, r, "", path_map(m));
    return subst.empty() ? role : substitute(role, subst);
}

std::vector<Name> signature(const MarkedSession& m, const Renaming& subst) {
    auto order = participant_order(m.sess);
    auto idx = [&](const Name& p) { return std::find(order.begin(), order.end(), p) - order.begin(); };
    struct Key {
        long lo, hi;
        size_t first;
        Name ch;
    };
    std::vector<Key> keys;
    NameSet seen;
    for (size_t i = 0; i < m.marks.size(); ++i) {
        auto it = subst.find(m.marks[i].channel);
        Name ch = it == subst.end() ? m.marks[i].channel : it->second;
        if (!seen.insert(ch).second) continue;
        long a = idx(m.marks[i].prefix->p), b = idx(m.marks[i].prefix->q);
        keys.push_back({std::min(a, b), std::max(a, b), i, ch});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& x, const Key& y) {
        return std::tie(x.lo, x.hi, x.first) < std::tie(y.lo, y.hi, y.first);
    });
    std::vector<Name> out;
    for (auto& k : keys) out.push_back(k.ch);
    return out;
}

PairwiseSubstitution default_pairwise_substitution(const S& b, const MarkedSession& m) {
    PairwiseSubstitution out;
    auto order = participant_order(b);
    auto idx = [&](const Name& p) { return std::find(order.begin(), order.end(), p) - order.begin(); };
    const Name base = mark_base(m);
    Renaming subst;
    for (auto& mk : m.marks) {
        long i = idx(mk.prefix->p), j = idx(mk.prefix->q);
        if (i > j) std::swap(i, j);
        subst[mk.channel] = base + "_" + order[i] + "_" + order[j];
    }
    try {
        validate_substitution(m, subst);
        out.subst = subst;
    } catch (const IllegalSubstitution& e) {
        out.fell_back = true;
        out.reason = e.trace;
    }
    out.signature = signature(m, out.subst);
    return out;
}

const CommunicatingProjection& communicating_projection(const Name& name, const S& b) {
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<CommunicatingProjection>> cache;
    const std::string key = name + "\x1f" + print(b);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto cp = std::make_unique<CommunicatingProjection>();
    cp->name = name;
    cp->sess = b;
    cp->marked = mark_session(b, channel_base(name));
    cp->pairwise = default_pairwise_substitution(b, cp->marked);
    cp->participants = participant_order(b);
    PathMap marks = path_map(cp->marked);
    for (auto& r : cp->participants) {
        P role = proj_comm(b, r, "", marks);
        cp->roles[r] = cp->pairwise.subst.empty() ? role : substitute(role, cp->pairwise.subst);
    }
    return *cache.emplace(key, std::move(cp)).first->second;
}

size_t signature_width(const Name& name, const S& b) { return communicating_projection(name, b).pairwise.signature.size(); }

P role_instance(const Name& name, const S& b, int k, const std::vector<Name>& tuple) {
    const auto& cp = communicating_projection(name, b);
    if (k < 1 || k > static_cast<int>(cp.participants.size())) return nullptr;
    const auto& sig = cp.pairwise.signature;
    if (tuple.size() != sig.size()) return nullptr;
    Renaming ren;
    for (size_t i = 0; i < sig.size(); ++i) ren[sig[i]] = tuple[i];
    return substitute(cp.roles.at(cp.participants[k - 1]), ren);
}

P project_integrating(const S& a, const Name& r, const TypeEnv& env) {
    MarkedSession m = mark_session(a, "", env);
    return proj_int(a, r, "", path_map(m), env);
}

}  // namespace sess
