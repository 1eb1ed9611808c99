#pragma once
// Brute-force rewrite oracle for process congruence. Enumerates small terms,
// closes them under one-step applications of the congruence laws and compares
// the resulting classes with fingerprint equality.

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sesstool/ast.hpp"
#include "sesstool/congruence.hpp"

namespace oracle {

using namespace sess;

inline std::string key(const P& p) {
    switch (p->kind) {
        case PK::Nil: return "0";
        case PK::Var: return p->name;
        case PK::Rec: return "r" + p->name + "(" + key(p->left) + ")";
        case PK::Label: return "l" + p->name + "(" + key(p->left) + ")";
        case PK::Hide: return "n" + p->name + "(" + key(p->left) + ")";
        case PK::Prefix: return to_string(p->act) + "(" + key(p->left) + ")";
        case PK::Par: return "|(" + key(p->left) + "," + key(p->right) + ")";
        case PK::Sum: return "+(" + key(p->left) + "," + key(p->right) + ")";
    }
    return "?";
}

// All terms with exactly n nodes, for n = 1..max. Leaves 0 and X; unary
// a!v a?v b!v b?v (new a) (new b) rec X l:; binary | and +.
inline std::vector<std::vector<P>> enumerate(int max) {
    std::vector<std::vector<P>> by(max + 1);
    by[1] = {nil(), var("X")};
    for (int n = 2; n <= max; ++n) {
        for (auto& t : by[n - 1]) {
            by[n].push_back(prefix(Action::send("a", "v"), t));
            by[n].push_back(prefix(Action::recv("a", "v"), t));
            by[n].push_back(prefix(Action::send("b", "v"), t));
            by[n].push_back(prefix(Action::recv("b", "v"), t));
            by[n].push_back(hide("a", t));
            by[n].push_back(hide("b", t));
            by[n].push_back(rec("X", t));
            by[n].push_back(label("l", t));
        }
        for (int i = 1; i + 1 < n; ++i)
            for (auto& l : by[i])
                for (auto& r : by[n - 1 - i]) {
                    by[n].push_back(par(l, r));
                    by[n].push_back(sum(l, r));
                }
    }
    return by;
}

inline P rebuild(const P& t, const P& l, const P& r) {
    switch (t->kind) {
        case PK::Rec: return rec(t->name, l);
        case PK::Label: return label(t->name, l);
        case PK::Hide: return hide(t->name, l);
        case PK::Prefix: return prefix(t->act, l);
        case PK::Par: return par(l, r);
        case PK::Sum: return sum(l, r);
        default: return t;
    }
}

inline const std::vector<Name>& channel_pool() {
    static const std::vector<Name> pool{"a", "b", "c"};
    return pool;
}

inline void root_rewrites(const P& t, bool grow, std::vector<P>& out) {
    const bool is_par = t->kind == PK::Par, is_sum = t->kind == PK::Sum;
    if (is_par || is_sum) {
        auto mk = [&](P l, P r) { return is_par ? par(l, r) : sum(l, r); };
        out.push_back(mk(t->right, t->left));
        if (t->left->kind == t->kind) out.push_back(mk(t->left->left, mk(t->left->right, t->right)));
        if (t->right->kind == t->kind) out.push_back(mk(mk(t->left, t->right->left), t->right->right));
        if (t->right->kind == PK::Nil) out.push_back(t->left);
    }
    if (is_par) {
        if (t->left->kind == PK::Label && t->right->kind == PK::Label && t->left->name == t->right->name)
            out.push_back(label(t->left->name, par(t->left->left, t->right->left)));
        if (t->left->kind == PK::Hide && !free_channels(t->right).count(t->left->name))
            out.push_back(hide(t->left->name, par(t->left->left, t->right)));
    }
    if (t->kind == PK::Hide) {
        const Name& a = t->name;
        const P& b = t->left;
        if (b->kind == PK::Nil) out.push_back(nil());
        // derived: (new a)P = (new a)(P|0) = (new a)0 | P = 0 | P = P
        if (!free_channels(b).count(a)) out.push_back(b);
        if (b->kind == PK::Hide) out.push_back(hide(b->name, hide(a, b->left)));
        if (b->kind == PK::Par && !free_channels(b->right).count(a)) out.push_back(par(hide(a, b->left), b->right));
        if (b->kind == PK::Label) out.push_back(label(b->name, hide(a, b->left)));
        NameSet used = all_names(b);
        for (auto& c : channel_pool())
            if (c != a && !used.count(c)) out.push_back(hide(c, substitute(b, {{a, c}})));
    }
    if (t->kind == PK::Rec) {
        NameSet fv = free_vars(t->left);
        if (!fv.count(t->name)) out.push_back(t->left);
        NameSet used = all_names(t->left);
        for (const Name y : {"X", "Y"})
            if (y != t->name && !used.count(y)) out.push_back(rec(y, subst_var(t->left, t->name, var(y))));
    }
    if (t->kind == PK::Label) {
        const P& b = t->left;
        if (b->kind == PK::Label) out.push_back(label(t->name, b->left));
        if (b->kind == PK::Par) out.push_back(par(label(t->name, b->left), label(t->name, b->right)));
        if (b->kind == PK::Hide) out.push_back(hide(b->name, label(t->name, b->left)));
    }
    if (grow) {
        out.push_back(par(t, nil()));
        out.push_back(sum(t, nil()));
        NameSet fc = free_channels(t);
        for (auto& c : channel_pool())
            if (!fc.count(c)) out.push_back(hide(c, t));
        NameSet fv = free_vars(t);
        for (const Name y : {"X", "Y"})
            if (!fv.count(y)) out.push_back(rec(y, t));
        if (t->kind == PK::Label) out.push_back(label(t->name, label("l", t->left)));
    }
}

// One-step rewrites at any position; results larger than max_size dropped.
inline std::vector<P> rewrites(const P& t, bool grow, size_t max_size) {
    std::vector<P> out;
    root_rewrites(t, grow, out);
    if (t->left) {
        for (auto& l : rewrites(t->left, grow, max_size)) out.push_back(rebuild(t, l, t->right));
    }
    if (t->right) {
        for (auto& r : rewrites(t->right, grow, max_size)) out.push_back(rebuild(t, t->left, r));
    }
    out.erase(std::remove_if(out.begin(), out.end(), [&](const P& p) { return node_count(p) > max_size; }),
              out.end());
    return out;
}

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    size_t find(size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

// Bidirectional search between two terms through rewrites of bounded size.
// Every step taken is checked to preserve the fingerprint.
inline bool connected(const P& s, const P& t, bool grow, size_t max_size, size_t max_states, size_t& unsound,
                      const std::string& fp) {
    std::unordered_map<std::string, int> side;  // 1 from s, 2 from t
    std::deque<std::pair<P, int>> q;
    side[key(s)] = 1;
    side[key(t)] = 2;
    q.push_back({s, 1});
    q.push_back({t, 2});
    while (!q.empty() && side.size() < max_states) {
        auto [cur, from] = q.front();
        q.pop_front();
        for (auto& n : rewrites(cur, grow, max_size)) {
            std::string k = key(n);
            auto it = side.find(k);
            if (it != side.end()) {
                if (it->second != from) return true;
                continue;
            }
            if (fingerprint(n) != fp) ++unsound;
            side[k] = from;
            q.push_back({n, from});
        }
    }
    return false;
}

struct Result {
    size_t terms = 0;
    size_t internal_edges = 0;
    size_t boundary_edges = 0;
    size_t fingerprint_classes = 0;
    size_t rewrite_components = 0;
    size_t bridged_by_search = 0;
    size_t soundness_violations = 0;
    size_t completeness_violations = 0;
    std::vector<std::string> examples;
    bool agree() const { return soundness_violations == 0 && completeness_violations == 0; }
};

// max_nodes: universe bound. boundary_max: terms up to this size also have
// their size-growing rewrites checked. search_max: intermediate size bound
// for the bridging search.
inline Result run(int max_nodes = 7, int boundary_max = 6, size_t search_max = 9) {
    Result res;
    auto by = enumerate(max_nodes);
    std::vector<P> all;
    for (auto& v : by)
        for (auto& t : v) all.push_back(t);
    by.clear();
    res.terms = all.size();
    std::unordered_map<std::string, size_t> index;
    index.reserve(all.size() * 2);
    for (size_t i = 0; i < all.size(); ++i) index.emplace(key(all[i]), i);
    std::vector<std::string> fps(all.size());
    for (size_t i = 0; i < all.size(); ++i) fps[i] = fingerprint(all[i]);

    UnionFind uf(all.size());
    for (size_t i = 0; i < all.size(); ++i) {
        const size_t sz = node_count(all[i]);
        const bool grow = static_cast<int>(sz) <= boundary_max;
        for (auto& r : rewrites(all[i], grow, search_max)) {
            auto it = index.find(key(r));
            if (it != index.end()) {
                ++res.internal_edges;
                if (fps[it->second] != fps[i]) {
                    ++res.soundness_violations;
                    if (res.examples.size() < 10) res.examples.push_back("unsound: " + key(all[i]) + " -> " + key(r));
                }
                uf.unite(i, it->second);
            } else {
                ++res.boundary_edges;
                if (fingerprint(r) != fps[i]) {
                    ++res.soundness_violations;
                    if (res.examples.size() < 10) res.examples.push_back("unsound: " + key(all[i]) + " -> " + key(r));
                }
            }
        }
    }
    // fingerprint classes that span several rewrite components
    std::unordered_map<std::string, std::vector<size_t>> roots;
    for (size_t i = 0; i < all.size(); ++i) {
        auto& v = roots[fps[i]];
        size_t r = uf.find(i);
        if (std::find(v.begin(), v.end(), r) == v.end()) v.push_back(r);
    }
    res.fingerprint_classes = roots.size();
    for (auto& [fp, v] : roots) {
        res.rewrite_components += v.size();
        for (size_t j = 1; j < v.size(); ++j) {
            if (uf.find(v[0]) == uf.find(v[j])) continue;
            const size_t own = std::max(node_count(all[v[0]]), node_count(all[v[j]]));
            if (connected(all[v[0]], all[v[j]], false, own, 50000, res.soundness_violations, fp) ||
                connected(all[v[0]], all[v[j]], true, search_max, 50000, res.soundness_violations, fp)) {
                ++res.bridged_by_search;
                uf.unite(v[0], v[j]);
            } else {
                ++res.completeness_violations;
                if (res.examples.size() < 10)
                    res.examples.push_back("unconnected: " + key(all[v[0]]) + " vs " + key(all[v[j]]));
            }
        }
    }
    return res;
}

}  // namespace oracle
