#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sess {

using Name = std::string;
using NameSet = std::set<Name>;
using Renaming = std::map<Name, Name>;

enum class ActKind { Send, Receive, Invite, Accept, Silent };

// Prefix or transition label. For Invite `num` is the party count n, for
// Accept it is the index k. `tuple` holds the bound communicating channels.
struct Action {
    ActKind kind = ActKind::Silent;
    Name chan;
    Name msg;
    int num = 0;
    std::vector<Name> tuple;

    static Action send(Name a, Name v) { return {ActKind::Send, std::move(a), std::move(v), 0, {}}; }
    static Action recv(Name a, Name v) { return {ActKind::Receive, std::move(a), std::move(v), 0, {}}; }
    static Action invite(Name a, int n, std::vector<Name> c) { return {ActKind::Invite, std::move(a), {}, n, std::move(c)}; }
    static Action accept(Name a, int k, std::vector<Name> c) { return {ActKind::Accept, std::move(a), {}, k, std::move(c)}; }
    static Action tau() { return {}; }

    bool is_session() const { return kind == ActKind::Invite || kind == ActKind::Accept; }
    bool is_comm() const { return kind == ActKind::Send || kind == ActKind::Receive; }
    bool operator==(const Action& o) const = default;
    bool operator<(const Action& o) const;
};

std::string to_string(const Action& a);

enum class PK { Nil, Var, Rec, Label, Prefix, Hide, Par, Sum };

struct Proc;
using P = std::shared_ptr<const Proc>;

struct Proc {
    PK kind = PK::Nil;
    Name name;   // variable, recursion binder, label or hidden channel
    Action act;  // Prefix only
    P left;      // body / continuation / left operand
    P right;     // right operand of Par and Sum
};

P nil();
P var(Name x);
P rec(Name x, P body);
P label(Name l, P body);
P prefix(Action a, P cont);
P hide(Name a, P body);
P par(P l, P r);
P sum(P l, P r);
P par_all(const std::vector<P>& ps);  // right-nested, 0 when empty
P sum_all(const std::vector<P>& ps);

// Structural (syntactic) equality, names compared literally.
bool same(const P& a, const P& b);
size_t node_count(const P& p);

NameSet free_channels(const P& p);
NameSet free_channels(const Action& a);
NameSet free_vars(const P& p);
NameSet all_names(const P& p);  // every channel and variable name, bound or free

class CaptureRisk : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simultaneous channel substitution. Throws CaptureRisk if a target name
// would be captured by a binder.
P substitute(const P& p, const Renaming& m);
// Replaces free occurrences of variable x by q (capture of q's free channels
// is avoided by renaming binders).
P subst_var(const P& p, const Name& x, const P& q);
// Replaces every Nil leaf by q.
P subst_nil(const P& p, const P& q);

// Fresh-name generator producing base#N names.
class Fresh {
public:
    explicit Fresh(NameSet avoid = {}) : avoid_(std::move(avoid)) {}
    Name operator()(const Name& base);
    void avoid(const NameSet& s) { avoid_.insert(s.begin(), s.end()); }
    void avoid(const Name& s) { avoid_.insert(s); }

private:
    NameSet avoid_;
    std::map<Name, int> counters_;
};

Name base_name(const Name& n);  // strips a trailing #N suffix

P rename_apart(const P& p);
P rename_apart(const P& p, Fresh& fresh);
// True when no name is bound twice and no name is both free and bound.
bool is_apart(const P& p);

// ---- sessions ----

enum class SK { Comm, Estab, End, Seq, Union, Prod, TVar, Rec };

struct Sess;
using S = std::shared_ptr<const Sess>;

struct Sess {
    SK kind = SK::End;
    Name p, q, msg;              // Comm
    std::vector<Name> parties;   // Estab
    Name body_name;              // Estab: name of the communicating session
    S body;                      // Estab: the communicating session itself
    Name var;                    // TVar and Rec
    S left;                      // continuation / nested / left operand / rec body
    S right;
};

S s_end();
S s_comm(Name p, Name q, Name v, S cont);
S s_estab(std::vector<Name> parties, Name body_name, S body, S nested);
S s_seq(S l, S r);
S s_union(S l, S r);
S s_prod(S l, S r);
S s_var(Name t);
S s_rec(Name t, S body);
S s_union_all(const std::vector<S>& ss);

bool same(const S& a, const S& b);
size_t node_count(const S& s);
NameSet free_tvars(const S& s);

// pid of an establishment is its party list plus the nested session; the
// participants of the established body are local to it.
NameSet pid(const S& s);
bool is_communicating(const S& s);
bool is_integrating(const S& s);
// B<p~>: participants of s renamed by m.
S rename_participants(const S& s, const Renaming& m);
S subst_tvar(const S& s, const Name& t, const S& r);
// Sorted participants of a communicating session, numerically when possible.
std::vector<Name> participant_order(const S& b);

struct SystemDef {
    std::vector<std::pair<Name, P>> components;
};

P system_process(const SystemDef& sys);

}  // namespace sess

namespace sess {

// Gamma: session channels bound to named communicating sessions.
struct TypeEnv {
    std::vector<std::pair<Name, Name>> bindings;  // channel -> session name, declaration order
    std::map<Name, S> sessions;                   // session name -> definition

    bool binds(const Name& chan) const;
    Name session_name(const Name& chan) const;  // empty when unbound
    S session_of(const Name& chan) const;        // null when unbound
    std::vector<Name> channels_for(const Name& session) const;
};

}  // namespace sess
