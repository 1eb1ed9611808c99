#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sesstool/ast.hpp"
#include "sesstool/semantics.hpp"
#include "sesstool/slicing.hpp"
#include "sesstool/typing.hpp"

namespace sess {

struct ComponentCheck {
    Name role;
    CheckReport check;
    std::optional<SliceReport> slices;  // attached when the check fails
    std::string slice_error;            // set when slicing could not run
};

struct SystemReport {
    bool passed = false;
    bool participants_ok = false;
    bool marking_ok = false;
    std::vector<std::string> problems;  // one line per failed condition
    std::vector<ComponentCheck> components;
};

// Participants equal pid(spec), env binds exactly the marking channels, and
// every component checks against its projected role.
SystemReport well_typed_system(const SystemDef& sys, const Name& spec_name, const S& spec, const TypeEnv& env);

enum class Outcome { Pass, Fail, Unknown };
std::string outcome_name(Outcome o);

struct Verdict {
    Outcome outcome = Outcome::Pass;
    std::vector<std::string> trace;  // steps from the root to the violation on Fail
    std::string reason;
    size_t states = 0;
    bool exhaustive = true;  // false when some derivation hit the unfolding bound
    std::string budget;
    // Privacy: prefixes whose channel no other component holds any more
    // (a partner that left the session). They cannot interfere and do not fail.
    std::vector<std::string> notes;
};

// Fails when a communication prefix on a communicating channel has two or
// more other components holding that channel free.
Verdict check_channel_privacy(const SystemDef& sys, const ExplorationBudget& budget = {});
// Every communication and establishment redex of the system must be matched
// by a step of the session state. Established bodies run as separate
// factors of the session state, beside the integrating remainder.
Verdict check_conformance(const SystemDef& sys, const S& spec, const TypeEnv& env,
                          const ExplorationBudget& budget = {});

}  // namespace sess
