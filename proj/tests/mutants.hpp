#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sesstool/ast.hpp"

namespace mutants {

using namespace sess;

// Every term obtained by deleting one communication prefix, with the
// channel of the deleted prefix.
inline void prefix_deletions(const P& p, const std::function<P(const P&)>& wrap,
                             std::vector<std::pair<P, Name>>& out) {
    switch (p->kind) {
        case PK::Prefix:
            if (p->act.is_comm()) out.push_back({wrap(p->left), p->act.chan});
            prefix_deletions(p->left, [&](const P& x) { return wrap(prefix(p->act, x)); }, out);
            break;
        case PK::Rec: prefix_deletions(p->left, [&](const P& x) { return wrap(rec(p->name, x)); }, out); break;
        case PK::Par:
            prefix_deletions(p->left, [&](const P& x) { return wrap(par(x, p->right)); }, out);
            prefix_deletions(p->right, [&](const P& x) { return wrap(par(p->left, x)); }, out);
            break;
        case PK::Sum:
            prefix_deletions(p->left, [&](const P& x) { return wrap(sum(x, p->right)); }, out);
            prefix_deletions(p->right, [&](const P& x) { return wrap(sum(p->left, x)); }, out);
            break;
        default: break;
    }
}

inline std::vector<std::pair<P, Name>> prefix_deletions(const P& p) {
    std::vector<std::pair<P, Name>> out;
    prefix_deletions(p, [](const P& x) { return x; }, out);
    return out;
}

}  // namespace mutants
