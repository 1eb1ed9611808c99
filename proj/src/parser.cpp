#include "sesstool/parser.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sess {

std::string kind_name(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::Syntax: return "SyntaxError";
        case ParseErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
        case ParseErrorKind::UnknownSessionName: return "UnknownSessionName";
        case ParseErrorKind::SessionKind: return "SessionKindError";
    }
    return "ParseError";
}

namespace {

enum class T { Ident, Int, Sym, End };

struct Tok {
    T type;
    std::string text;
    int line;
    int col;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '\'';
}

std::vector<Tok> lex(const std::string& s) {
    std::vector<Tok> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        int l = line, co = col;
        if (ident_start(c)) {
            size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            out.push_back({T::Ident, s.substr(i, j - i), l, co});
            adv(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            // participant or message names such as 1a are not allowed; 0 is inaction
            out.push_back({T::Int, s.substr(i, j - i), l, co});
            adv(j - i);
            continue;
        }
        static const char* multi[] = {"->", "..", nullptr};
        bool matched = false;
        for (int k = 0; multi[k]; ++k) {
            size_t n = std::char_traits<char>::length(multi[k]);
            if (s.compare(i, n, multi[k]) == 0) {
                out.push_back({T::Sym, multi[k], l, co});
                adv(n);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string("(){}[]<>,.:;|+!?=").find(c) != std::string::npos) {
            out.push_back({T::Sym, std::string(1, c), l, co});
            adv(1);
            continue;
        }
        throw ParseError(ParseErrorKind::Syntax, l, co, "token", "unexpected character '" + std::string(1, c) + "'");
    }
    out.push_back({T::End, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Tok> toks) : t_(std::move(toks)) {}

    const Tok& peek(size_t k = 0) const { return t_[std::min(pos_ + k, t_.size() - 1)]; }
    bool at_sym(const char* s, size_t k = 0) const { return peek(k).type == T::Sym && peek(k).text == s; }
    bool at_ident(const char* s, size_t k = 0) const { return peek(k).type == T::Ident && peek(k).text == s; }
    bool at_end() const { return peek().type == T::End; }

    [[noreturn]] void fail(const std::string& expected) const {
        const Tok& k = peek();
        std::string found = k.type == T::End ? "end of input" : "'" + k.text + "'";
        throw ParseError(ParseErrorKind::Syntax, k.line, k.col, expected,
                         std::to_string(k.line) + ":" + std::to_string(k.col) + ": expected " + expected + ", found " +
                             found);
    }

    Tok take() { return t_[pos_ < t_.size() - 1 ? pos_++ : pos_]; }

    void expect_sym(const char* s) {
        if (!at_sym(s)) fail(std::string("'") + s + "'");
        take();
    }

    std::string ident(const char* what = "identifier") {
        if (peek().type != T::Ident) fail(what);
        return take().text;
    }

    std::string name_or_int(const char* what) {
        if (peek().type != T::Ident && peek().type != T::Int) fail(what);
        return take().text;
    }

    int integer(const char* what) {
        if (peek().type != T::Int) fail(what);
        return std::stoi(take().text);
    }

    std::vector<Name> name_list(const char* what) {
        std::vector<Name> out;
        out.push_back(ident(what));
        while (at_sym(",")) {
            take();
            out.push_back(ident(what));
        }
        return out;
    }

    // ---- processes: '|' lowest, then '+', then unary forms ----

    P process() {
        P l = proc_sum();
        while (at_sym("|")) {
            take();
            l = par(l, proc_sum());
        }
        return l;
    }

    P proc_sum() {
        P l = proc_unary();
        while (at_sym("+")) {
            take();
            l = sum(l, proc_unary());
        }
        return l;
    }

    P proc_unary() {
        const Tok& k = peek();
        if (k.type == T::Int) {
            if (k.text != "0") fail("process");
            take();
            return nil();
        }
        if (at_sym("(")) {
            if (at_ident("new", 1)) {
                take();
                take();
                Name a = ident("channel name");
                expect_sym(")");
                return hide(a, proc_unary());
            }
            take();
            P p = process();
            expect_sym(")");
            return p;
        }
        if (at_ident("rec")) {
            take();
            Name x = ident("process variable");
            expect_sym(".");
            return rec(x, proc_unary());
        }
        if (k.type != T::Ident) fail("process");
        if (at_sym(":", 1)) {
            Name l = take().text;
            take();
            return label(l, proc_unary());
        }
        if (at_sym("!", 1) || at_sym("?", 1)) {
            Action a = action();
            expect_sym(".");
            return prefix(std::move(a), proc_unary());
        }
        return var(take().text);
    }

    Action action() {
        Name chan = take().text;
        bool out = take().text == "!";
        if (out && at_ident("inv") && at_sym("[", 1)) {
            take();
            take();
            int two = integer("2");
            if (two != 2) fail("2");
            expect_sym("..");
            int n = integer("party count");
            if (n < 2) fail("party count >= 2");
            expect_sym("]");
            return Action::invite(chan, n, tuple());
        }
        if (!out && at_ident("acc") && at_sym("[", 1)) {
            take();
            take();
            int k = integer("acceptance index");
            if (k < 2) fail("acceptance index >= 2");
            expect_sym("]");
            return Action::accept(chan, k, tuple());
        }
        Name msg = name_or_int("message");
        return out ? Action::send(chan, msg) : Action::recv(chan, msg);
    }

    std::vector<Name> tuple() {
        expect_sym("(");
        std::vector<Name> c;
        if (!at_sym(")")) c = name_list("channel name");
        expect_sym(")");
        NameSet seen;
        for (auto& n : c)
            if (!seen.insert(n).second) fail("pairwise distinct channel tuple");
        return c;
    }

    // ---- sessions: (+) lowest, then (x), then ';', then unary forms ----

    bool at_binop(const char* op) const { return at_sym("(") && at_sym(")", 2) && peek(1).text == op; }

    S session() {
        S l = sess_prod();
        while (at_binop("+")) {
            pos_ += 3;
            l = s_union(l, sess_prod());
        }
        return l;
    }

    S sess_prod() {
        S l = sess_seq();
        while (at_binop("x")) {
            pos_ += 3;
            l = s_prod(l, sess_seq());
        }
        return l;
    }

    S sess_seq() {
        S l = sess_unary();
        while (at_sym(";")) {
            take();
            l = s_seq(l, sess_unary());
        }
        return l;
    }

    S sess_unary() {
        if (at_ident("end")) {
            take();
            return s_end();
        }
        if (at_ident("rec")) {
            take();
            Name t = ident("type variable");
            expect_sym(".");
            return s_rec(t, sess_unary());
        }
        if (at_sym("(")) {
            take();
            S s = session();
            expect_sym(")");
            return s;
        }
        if (at_sym("<")) {
            const Tok start = take();
            std::vector<Name> ps;
            ps.push_back(name_or_int("participant"));
            while (at_sym(",")) {
                take();
                ps.push_back(name_or_int("participant"));
            }
            expect_sym(":");
            Name what = name_or_int("message or session name");
            expect_sym(">");
            if (at_sym("->")) {
                take();
                if (ps.size() != 2) fail("exactly two participants in a communication");
                return s_comm(ps[0], ps[1], what, sess_unary());
            }
            if (at_sym("{")) {
                take();
                S nested = at_sym("}") ? s_end() : session();
                expect_sym("}");
                estab_pos_.push_back({start.line, start.col});
                return s_estab(ps, what, nullptr, nested);
            }
            fail("'->' or '{'");
        }
        if (peek().type == T::Ident) return s_var(take().text);
        fail("session");
    }

    std::vector<std::pair<int, int>> estab_pos_;
    size_t pos_ = 0;

private:
    std::vector<Tok> t_;
};

// Process references are parsed as free variables and expanded afterwards.
P expand_refs(const P& p, const std::function<P(const Name&)>& lookup, NameSet& bound) {
    switch (p->kind) {
        case PK::Nil: return p;
        case PK::Var: {
            if (bound.count(p->name)) return p;
            P q = lookup(p->name);
            return q ? q : p;
        }
        case PK::Rec: {
            bool added = bound.insert(p->name).second;
            P b = expand_refs(p->left, lookup, bound);
            if (added) bound.erase(p->name);
            return rec(p->name, b);
        }
        case PK::Label: return label(p->name, expand_refs(p->left, lookup, bound));
        case PK::Prefix: return prefix(p->act, expand_refs(p->left, lookup, bound));
        case PK::Hide: return hide(p->name, expand_refs(p->left, lookup, bound));
        case PK::Par: return par(expand_refs(p->left, lookup, bound), expand_refs(p->right, lookup, bound));
        case PK::Sum: return sum(expand_refs(p->left, lookup, bound), expand_refs(p->right, lookup, bound));
    }
    return p;
}

S resolve_bodies(const S& s, const std::map<Name, S>& comm, int line, int col) {
    if (!s) return s;
    switch (s->kind) {
        case SK::Estab: {
            auto it = comm.find(s->body_name);
            if (it == comm.end())
                throw ParseError(ParseErrorKind::UnknownSessionName, line, col, "declared session",
                                 "unknown session name '" + s->body_name + "'");
            return s_estab(s->parties, s->body_name, it->second, resolve_bodies(s->left, comm, line, col));
        }
        case SK::Comm: return s_comm(s->p, s->q, s->msg, resolve_bodies(s->left, comm, line, col));
        case SK::Rec: return s_rec(s->var, resolve_bodies(s->left, comm, line, col));
        case SK::End:
        case SK::TVar: return s;
        case SK::Seq: return s_seq(resolve_bodies(s->left, comm, line, col), resolve_bodies(s->right, comm, line, col));
        case SK::Union:
            return s_union(resolve_bodies(s->left, comm, line, col), resolve_bodies(s->right, comm, line, col));
        case SK::Prod:
            return s_prod(resolve_bodies(s->left, comm, line, col), resolve_bodies(s->right, comm, line, col));
    }
    return s;
}

bool has_estab(const S& s) { return !is_communicating(s); }
bool has_comm(const S& s) {
    if (!s) return false;
    if (s->kind == SK::Comm) return true;
    return has_comm(s->left) || has_comm(s->right);
}

}  // namespace

SourceFile parse(const std::string& text) {
    Parser ps(lex(text));
    SourceFile f;
    struct Pending {
        Name name;
        P raw;
        int line, col;
    };
    std::vector<Pending> procs;
    struct SessPending {
        Name name;
        S raw;
        int line, col;
    };
    std::vector<SessPending> sessions;
    std::map<std::string, std::pair<int, int>> chan_pos;
    NameSet seen_sess, seen_proc, seen_sys, seen_chan;
    auto dup = [](const Tok& k, const std::string& what, const Name& n) {
        throw ParseError(ParseErrorKind::DuplicateDeclaration, k.line, k.col, "unique " + what + " name",
                         "duplicate " + what + " declaration '" + n + "'");
    };

    while (!ps.at_end()) {
        Tok kw = ps.peek();
        if (ps.at_ident("session")) {
            ps.take();
            Tok nt = ps.peek();
            Name n = ps.ident("session name");
            if (!seen_sess.insert(n).second) dup(nt, "session", n);
            ps.expect_sym("=");
            sessions.push_back({n, ps.session(), nt.line, nt.col});
        } else if (ps.at_ident("channel")) {
            ps.take();
            Tok nt = ps.peek();
            Name a = ps.ident("channel name");
            if (!seen_chan.insert(a).second) dup(nt, "channel", a);
            ps.expect_sym(":");
            Tok st = ps.peek();
            Name s = ps.ident("session name");
            f.channels.push_back({a, s});
            chan_pos[a] = {st.line, st.col};
        } else if (ps.at_ident("process")) {
            ps.take();
            Tok nt = ps.peek();
            Name n = ps.ident("process name");
            if (!seen_proc.insert(n).second) dup(nt, "process", n);
            ps.expect_sym("=");
            procs.push_back({n, ps.process(), nt.line, nt.col});
        } else if (ps.at_ident("system")) {
            ps.take();
            Tok nt = ps.peek();
            Name n = ps.ident("system name");
            if (!seen_sys.insert(n).second) dup(nt, "system", n);
            ps.expect_sym("=");
            SystemDecl sd{n, {}};
            NameSet parts;
            for (;;) {
                Tok pt = ps.peek();
                Name r = ps.name_or_int("participant");
                if (!parts.insert(r).second) dup(pt, "participant", r);
                ps.expect_sym(":");
                Name pn = ps.ident("process name");
                sd.components.push_back({r, pn});
                if (!ps.at_sym("|")) break;
                ps.take();
            }
            f.systems.push_back(std::move(sd));
        } else {
            ps.fail("declaration (session, channel, process or system)");
        }
        (void)kw;
    }

    // sessions: communicating ones first so establishments can refer to them
    std::map<Name, S> comm;
    for (auto& sp : sessions) {
        bool e = has_estab(sp.raw), c = has_comm(sp.raw);
        if (e && c)
            throw ParseError(ParseErrorKind::SessionKind, sp.line, sp.col, "communicating or integrating session",
                             "session '" + sp.name + "' mixes communications and establishments");
        if (!e) comm[sp.name] = sp.raw;
    }
    for (auto& sp : sessions) {
        S s = sp.raw;
        if (has_estab(s)) s = resolve_bodies(s, comm, sp.line, sp.col);
        f.sessions.push_back({sp.name, s});
    }
    for (auto& c : f.channels) {
        if (!comm.count(c.session)) {
            auto [l, co] = chan_pos[c.chan];
            throw ParseError(ParseErrorKind::UnknownSessionName, l, co, "declared communicating session",
                             "channel '" + c.chan + "' refers to unknown communicating session '" + c.session + "'");
        }
    }

    // processes: expand references to other declared processes
    std::map<Name, const Pending*> by_name;
    for (auto& p : procs) by_name[p.name] = &p;
    std::map<Name, P> done;
    std::vector<Name> stack;
    std::function<P(const Name&)> resolve = [&](const Name& n) -> P {
        auto d = done.find(n);
        if (d != done.end()) return d->second;
        auto it = by_name.find(n);
        if (it == by_name.end()) return nullptr;
        for (auto& s : stack)
            if (s == n)
                throw ParseError(ParseErrorKind::Syntax, it->second->line, it->second->col, "non-cyclic process references",
                                 "process '" + n + "' refers to itself; use rec");
        stack.push_back(n);
        NameSet bound;
        P r = expand_refs(it->second->raw, resolve, bound);
        stack.pop_back();
        done[n] = r;
        return r;
    };
    for (auto& p : procs) f.processes.push_back({p.name, rename_apart(resolve(p.name))});

    for (auto& sd : f.systems)
        for (auto& [r, pn] : sd.components)
            if (!seen_proc.count(pn))
                throw ParseError(ParseErrorKind::Syntax, 0, 0, "declared process",
                                 "system '" + sd.name + "' refers to unknown process '" + pn + "'");
    return f;
}

SourceFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

P parse_process(const std::string& text) {
    Parser ps(lex(text));
    P p = ps.process();
    if (!ps.at_end()) ps.fail("end of process");
    return p;
}

S parse_session(const std::string& text) {
    Parser ps(lex(text));
    S s = ps.session();
    if (!ps.at_end()) ps.fail("end of session");
    return s;
}

// ---- SourceFile lookups ----

S SourceFile::session(const Name& n) const {
    for (auto& s : sessions)
        if (s.name == n) return s.sess;
    throw std::out_of_range("no session named " + n);
}

P SourceFile::process(const Name& n) const {
    for (auto& p : processes)
        if (p.name == n) return p.proc;
    throw std::out_of_range("no process named " + n);
}

const SystemDecl& SourceFile::system(const Name& n) const {
    for (auto& s : systems)
        if (s.name == n) return s;
    throw std::out_of_range("no system named " + n);
}

bool SourceFile::has_session(const Name& n) const {
    for (auto& s : sessions)
        if (s.name == n) return true;
    return false;
}

bool SourceFile::has_process(const Name& n) const {
    for (auto& p : processes)
        if (p.name == n) return true;
    return false;
}

bool SourceFile::has_system(const Name& n) const {
    for (auto& s : systems)
        if (s.name == n) return true;
    return false;
}

TypeEnv SourceFile::env() const {
    TypeEnv e;
    for (auto& c : channels) e.bindings.push_back({c.chan, c.session});
    for (auto& s : sessions)
        if (is_communicating(s.sess)) e.sessions[s.name] = s.sess;
    return e;
}

SystemDef SourceFile::system_def(const Name& n) const {
    SystemDef d;
    for (auto& [r, pn] : system(n).components) d.components.push_back({r, process(pn)});
    return d;
}

// ---- printing ----

namespace {

void pp(const P& p, int level, std::string& out) {
    auto open = [&](int need) {
        if (level > need) out += "(";
    };
    auto close = [&](int need) {
        if (level > need) out += ")";
    };
    switch (p->kind) {
        case PK::Nil: out += "0"; return;
        case PK::Var: out += p->name; return;
        case PK::Rec:
            out += "rec " + p->name + " . ";
            pp(p->left, 2, out);
            return;
        case PK::Label:
            out += p->name + " : ";
            pp(p->left, 2, out);
            return;
        case PK::Prefix:
            out += to_string(p->act) + ".";
            pp(p->left, 2, out);
            return;
        case PK::Hide:
            out += "(new " + p->name + ") ";
            pp(p->left, 2, out);
            return;
        case PK::Par:
            open(0);
            pp(p->left, 0, out);
            out += " | ";
            pp(p->right, 1, out);
            close(0);
            return;
        case PK::Sum:
            open(1);
            pp(p->left, 1, out);
            out += " + ";
            pp(p->right, 2, out);
            close(1);
            return;
    }
}

void ps(const S& s, int level, std::string& out) {
    auto open = [&](int need) {
        if (level > need) out += "(";
    };
    auto close = [&](int need) {
        if (level > need) out += ")";
    };
    switch (s->kind) {
        case SK::End: out += "end"; return;
        case SK::TVar: out += s->var; return;
        case SK::Rec:
            out += "rec " + s->var + " . ";
            ps(s->left, 3, out);
            return;
        case SK::Comm:
            out += "<" + s->p + "," + s->q + ":" + s->msg + "> -> ";
            ps(s->left, 3, out);
            return;
        case SK::Estab: {
            out += "<";
            for (size_t i = 0; i < s->parties.size(); ++i) {
                if (i) out += ",";
                out += s->parties[i];
            }
            out += " : " + s->body_name + "> {";
            if (s->left && s->left->kind != SK::End) {
                out += " ";
                ps(s->left, 0, out);
                out += " ";
            }
            out += "}";
            return;
        }
        case SK::Union:
            open(0);
            ps(s->left, 0, out);
            out += " (+) ";
            ps(s->right, 1, out);
            close(0);
            return;
        case SK::Prod:
            open(1);
            ps(s->left, 1, out);
            out += " (x) ";
            ps(s->right, 2, out);
            close(1);
            return;
        case SK::Seq:
            open(2);
            ps(s->left, 2, out);
            out += " ; ";
            ps(s->right, 3, out);
            close(2);
            return;
    }
}

}  // namespace

std::string print(const P& p) {
    std::string out;
    pp(p, 0, out);
    return out;
}

std::string print(const S& s) {
    std::string out;
    ps(s, 0, out);
    return out;
}

std::string print(const SourceFile& f) {
    std::string out;
    for (auto& s : f.sessions) out += "session " + s.name + " = " + print(s.sess) + "\n";
    for (auto& c : f.channels) out += "channel " + c.chan + " : " + c.session + "\n";
    for (auto& p : f.processes) out += "process " + p.name + " = " + print(p.proc) + "\n";
    for (auto& s : f.systems) {
        out += "system " + s.name + " =";
        for (size_t i = 0; i < s.components.size(); ++i)
            out += std::string(i ? " |" : "") + " " + s.components[i].first + ": " + s.components[i].second;
        out += "\n";
    }
    return out;
}

}  // namespace sess
