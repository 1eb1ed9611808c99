#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

// One marked prefix occurrence: a communication of a communicating session
// or an establishment of an integrating session.
struct Mark {
    std::string path;  // steps from the root, e.g. "/left/cont"
    Name channel;
    S prefix;
};

struct MarkedSession {
    S sess;
    std::vector<Mark> marks;  // preorder
};

// Communications are marked base_1, base_2, ... in preorder.
MarkedSession mark_session(const S& s, const Name& base);
// Establishments take the channels bound to their body in env, in
// declaration order per body; generated names fill any shortfall.
MarkedSession mark_session(const S& s, const Name& base, const TypeEnv& env);

class IllegalSubstitution : public std::runtime_error {
public:
    IllegalSubstitution(const std::string& msg, std::string trace)
        : std::runtime_error(msg), trace(std::move(trace)) {}
    std::string trace;
};

class UnboundSession : public std::runtime_error {
public:
    explicit UnboundSession(Name n) : std::runtime_error("session '" + n + "' is not bound"), name(std::move(n)) {}
    Name name;
};

// B|r for a marked communicating session, then subst applied. A non-empty
// subst is validated first: the substituted roles of all participants must
// keep a deterministic message flow in parallel.
P project_communicating(const MarkedSession& m, const Name& r, const Renaming& subst = {});

// Roles of every participant, unsubstituted, in participant order.
std::vector<P> all_roles(const MarkedSession& m);
void validate_substitution(const MarkedSession& m, const Renaming& subst);  // throws IllegalSubstitution

struct PairwiseSubstitution {
    Renaming subst;               // empty when falling back to identity
    bool fell_back = false;
    std::string reason;           // why the pairwise merge was rejected
    std::vector<Name> signature;  // channel tuple order used by B|k<c~>
};

// Every mark between participants i and j becomes base_i_j.
PairwiseSubstitution default_pairwise_substitution(const S& b, const MarkedSession& m);

// Distinct channels of the substituted roles in their canonical order.
std::vector<Name> signature(const MarkedSession& m, const Renaming& subst);

// Cached projection data for a named communicating session.
struct CommunicatingProjection {
    Name name;
    S sess;
    MarkedSession marked;
    PairwiseSubstitution pairwise;
    std::vector<Name> participants;  // participant order
    std::map<Name, P> roles;         // substituted, keyed by participant
};

const CommunicatingProjection& communicating_projection(const Name& name, const S& b);

// B|k<c~>: the k-th participant's role with the signature renamed to c~.
// Returns null when |c~| differs from the signature width or k is out of range.
P role_instance(const Name& name, const S& b, int k, const std::vector<Name>& tuple);
size_t signature_width(const Name& name, const S& b);

// A|r for an integrating session. Establishment bodies come from the session
// itself or, when unresolved, from env.
P project_integrating(const S& a, const Name& r, const TypeEnv& env);

// Session name as used in channel names: lower case.
Name channel_base(const Name& session_name);

}  // namespace sess
