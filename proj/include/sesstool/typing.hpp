#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

// One channel-typing entry c~ : Q. `label` is the tuple without the names
// hidden around the typed process.
struct ChannelEntry {
    std::vector<Name> tuple;
    std::vector<Name> label;
    P proc;
};

struct ChannelTyping {
    std::vector<ChannelEntry> entries;
};

struct Typing {
    P session;  // R
    ChannelTyping channels;  // Delta
    // Where each recursion variable was typed: a channel tuple, or empty
    // for the session typing.
    std::map<Name, std::vector<Name>> variable_tuples;
};

P ceil(const ChannelTyping& d);
// Same tuple labels in the same order, so the entries can be merged pointwise.
bool compatible(const ChannelTyping& d, const ChannelTyping& e);

enum class TypeErrorKind { UnboundSessionChannel, RoleMismatch, ArityMismatch, VariableSplit, NotTypable };
std::string kind_name(TypeErrorKind k);

struct TypeError {
    TypeErrorKind kind = TypeErrorKind::NotTypable;
    std::string message;
    Name channel;
    P expected;  // RoleMismatch
    P found;     // RoleMismatch
    P where;     // subterm at which inference stopped
};

struct InferOptions {
    // Channel tuples to use in addition to those read from the process
    // (for open subterms whose binders lie outside).
    std::vector<std::vector<Name>> tuples;
    // Nonzero: permute the canonical tuple order with this seed.
    unsigned order_seed = 0;
};

struct InferResult {
    std::optional<Typing> typing;
    std::optional<TypeError> error;
    bool ok() const { return typing.has_value(); }
};

InferResult infer_principal(const TypeEnv& env, const P& p, const InferOptions& opts = {});

struct CheckReport {
    bool passed = false;
    std::optional<Typing> typing;
    std::optional<TypeError> error;  // inference failure or RoleDisagreement
    bool role_disagreement = false;
    P expected;
    std::string message;
};

// Infers and compares the session typing with the expected role; every
// remaining channel entry must be congruent to 0.
CheckReport check_against(const TypeEnv& env, const P& p, const P& expected, const InferOptions& opts = {});

}  // namespace sess
