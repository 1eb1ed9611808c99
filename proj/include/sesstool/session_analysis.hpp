#pragma once

#include <set>
#include <string>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

using OpidSet = std::set<NameSet>;

struct ClauseViolation {
    int clause = 0;
    std::string path;  // steps from the root, e.g. "/cont/left"
    S subterm;
    std::string message;
};

struct SessionReport {
    bool passed = true;
    std::vector<ClauseViolation> violations;
};

// Every violated well-formedness clause (1 self-communication, 2 bad party
// list, 3 product on the left of a concatenation), in preorder.
SessionReport well_formed(const S& s);

OpidSet opid(const S& s);

// Checks the race-freedom clauses; a failure cites the clause that could
// not be applied at the shallowest failing subterm.
SessionReport race_free(const S& s);

}  // namespace sess
