#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

class UnsupportedOperator : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Recursion variable positions: a channel tuple, or empty for the main
// slice. Variables not listed follow their nearest enclosing prefix: an
// occurrence stays in the slice that keeps that prefix (the main slice when
// there is none) and becomes 0 elsewhere.
using VariablePlacement = std::map<Name, std::vector<Name>>;

// Slices before normalization.
P raw_main_slice(const P& p, const VariablePlacement& vp = {});
P raw_channel_slice(const P& p, const std::vector<Name>& tuple, const VariablePlacement& vp = {});

// Slices normalized by duplicate-summand absorption and the canonical form.
// Throw UnsupportedOperator on hiding or labelling.
P main_slice(const P& p, const VariablePlacement& vp = {});
P channel_slice(const P& p, const std::vector<Name>& tuple, const VariablePlacement& vp = {});

struct SliceVerdict {
    std::string session;      // integrating session name or communicating session name
    std::string kind;         // "main", "invite" or "accept"
    Name channel;             // session channel of the prefix; empty for main
    std::vector<Name> tuple;  // empty for main
    int index = 0;            // participant index used for the role
    P slice;
    P expected;  // null when no role could be formed
    bool pass = false;
    std::string mismatch;  // first point of difference, empty on pass
};

struct SliceReport {
    std::vector<SliceVerdict> verdicts;
    bool all_pass = true;
    std::string caveat;
    VariablePlacement placement;  // the placement the verdicts were computed with
};

extern const char* const kSliceCaveat;

// Recursion variables are placed where typing put them; when slices then
// disagree, other placements (the main slice or the tuple of an enclosing
// communication prefix) are tried and the one with most agreeing slices wins.
SliceReport diagnose(const TypeEnv& env, const P& p, const Name& spec_name, const S& spec, const Name& role);

// Describes where two processes first differ after normalization.
std::string first_mismatch(const P& got, const P& want);

}  // namespace sess
