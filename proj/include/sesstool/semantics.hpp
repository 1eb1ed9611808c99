#pragma once

#include <string>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

struct ExplorationBudget {
    int max_rec_unfold = 4;
    int max_depth = 32;
    size_t max_states = 20000;

    // Defaults overridden by SESSTOOL_BUDGET="unfold,depth,states".
    static ExplorationBudget from_env();
    static ExplorationBudget parse(const std::string& spec);  // throws std::invalid_argument
    std::string describe() const;
};

// A process transition. `via` names the channel and message of a
// communication (or the session channel of an establishment) that produced
// a silent step; empty for visible steps.
struct Transition {
    Action label;
    P target;
    std::string via;
};

struct TransitionSet {
    std::vector<Transition> items;
    bool truncated = false;  // some derivation needed more recursion unfoldings
};

// One-step transitions, targets normalized and deduplicated modulo ≡.
TransitionSet proc_transitions(const P& p, const ExplorationBudget& budget = {});

enum class SessLabelKind { Comm, Establish };

struct SessLabel {
    SessLabelKind kind = SessLabelKind::Comm;
    Name p, q, msg;             // Comm
    std::vector<Name> parties;  // Establish
    Name body_name;
    S body;
    std::string str() const;
};

struct SessTransition {
    SessLabel label;
    S target;
};

struct SessTransitionSet {
    std::vector<SessTransition> items;
    bool truncated = false;
};

// With detach_bodies, an establishment anywhere in s composes its body with
// the whole successor state rather than in place, so a body established on
// the left of a concatenation does not hold back the right side.
SessTransitionSet session_transitions(const S& s, const ExplorationBudget& budget = {}, bool detach_bodies = false);

// B<p~>: participants of b, taken in numeric order, renamed to p~.
S instantiate(const S& b, const std::vector<Name>& parties);

// Bounded reachable state graph of a process.
struct StateGraph {
    struct Edge {
        Action label;  // tuple names canonicalized
        std::string via;
        size_t target;
    };
    std::vector<P> states;
    std::vector<std::string> fingerprints;
    std::vector<std::vector<Edge>> edges;
    std::vector<bool> expanded;
    bool truncated = false;
};

// With silent_only, only silent steps are followed.
StateGraph explore(const P& root, const ExplorationBudget& budget = {}, bool silent_only = false);

struct BoundedAnswer {
    bool value = false;
    bool exhaustive = true;  // false when the budget cut exploration short
    std::string witness;     // offending state and label when value is false
};

// No reachable state has two equally labelled steps to non-congruent states.
// Silent steps are distinguished by the communication that caused them.
BoundedAnswer is_deterministic(const P& p, const ExplorationBudget& budget = {});
// Determinism of the internal communications only: silent steps reachable
// through silent steps.
BoundedAnswer message_flow_deterministic(const P& p, const ExplorationBudget& budget = {});

// p ≻ q: every move of q is matched by an equally labelled move of p.
BoundedAnswer stimulates(const P& p, const P& q, const ExplorationBudget& budget = {});

}  // namespace sess
