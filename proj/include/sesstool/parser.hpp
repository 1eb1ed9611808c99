#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sesstool/ast.hpp"

namespace sess {

enum class ParseErrorKind { Syntax, DuplicateDeclaration, UnknownSessionName, SessionKind };

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, int line, int col, std::string expected, const std::string& msg)
        : std::runtime_error(msg), kind(kind), line(line), col(col), expected(std::move(expected)) {}
    ParseErrorKind kind;
    int line;
    int col;
    std::string expected;
};

std::string kind_name(ParseErrorKind k);

struct SessionDecl {
    Name name;
    S sess;
};

struct ChannelDecl {
    Name chan;
    Name session;
};

struct ProcessDecl {
    Name name;
    P proc;
};

struct SystemDecl {
    Name name;
    std::vector<std::pair<Name, Name>> components;  // participant -> process name
};

struct SourceFile {
    std::vector<SessionDecl> sessions;
    std::vector<ChannelDecl> channels;
    std::vector<ProcessDecl> processes;
    std::vector<SystemDecl> systems;

    S session(const Name& n) const;  // throws std::out_of_range
    P process(const Name& n) const;
    const SystemDecl& system(const Name& n) const;
    bool has_session(const Name& n) const;
    bool has_process(const Name& n) const;
    bool has_system(const Name& n) const;
    TypeEnv env() const;
    SystemDef system_def(const Name& n) const;
};

SourceFile parse(const std::string& text);
SourceFile parse_file(const std::string& path);
// Standalone expressions; process references are not resolved.
P parse_process(const std::string& text);
S parse_session(const std::string& text);

std::string print(const P& p);
std::string print(const S& s);
std::string print(const SourceFile& f);

}  // namespace sess
