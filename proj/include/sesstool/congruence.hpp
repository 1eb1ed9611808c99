#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

// Normalized term plus the string used for congruence checks.
struct CanonicalForm {
    P term;
    std::string fingerprint;
};

struct SessCanonicalForm {
    S term;
    std::string fingerprint;
};

CanonicalForm canonical(const P& p);
std::string fingerprint(const P& p);
P normalize(const P& p);

SessCanonicalForm canonical(const S& s);
std::string fingerprint(const S& s);
S normalize(const S& s);

bool proc_congruent(const P& p, const P& q);
bool session_congruent(const S& s, const S& t);

// Top-level summands of the normal form (empty for 0).
std::vector<P> summands(const P& p);
// Top-level parallel components of the normal form, with restrictions kept
// outside (empty for 0).
std::vector<P> components(const P& p);

bool summand_leq(const P& p, const P& q);
bool summand_lt(const P& p, const P& q);
P join(const P& p, const P& q);

std::vector<std::pair<P, P>> sub_par(const P& p);
std::vector<std::pair<P, P>> sub_sum(const P& p);

// Recursive duplicate-summand absorption (set semantics for +).
P absorb_duplicates(const P& p);
bool congruent_modulo_absorption(const P& p, const P& q);

}  // namespace sess
