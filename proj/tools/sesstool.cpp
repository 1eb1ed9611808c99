#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sesstool/congruence.hpp"
#include "sesstool/parser.hpp"
#include "sesstool/projection.hpp"
#include "sesstool/report.hpp"
#include "sesstool/session_analysis.hpp"
#include "sesstool/slicing.hpp"
#include "sesstool/system.hpp"
#include "sesstool/typing.hpp"

using namespace sess;
using nlohmann::json;

namespace {

constexpr int kPass = 0, kFail = 1, kUnknown = 2, kUsage = 3;

struct Config {
    std::string file;
    std::string format = "text";
    std::string budget;
    std::string session, role, process, system, spec, tuple;
    bool show_env = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ExplorationBudget budget_of(const Config& c) {
    if (c.budget.empty()) return ExplorationBudget::from_env();
    try {
        return ExplorationBudget::parse(c.budget);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("bad --budget: ") + e.what());
    }
}

S need_session(const SourceFile& f, const std::string& n) {
    if (!f.has_session(n)) throw UsageError("no session named " + n);
    return f.session(n);
}
P need_process(const SourceFile& f, const std::string& n) {
    if (!f.has_process(n)) throw UsageError("no process named " + n);
    return f.process(n);
}
SystemDef need_system(const SourceFile& f, const std::string& n) {
    if (!f.has_system(n)) throw UsageError("no system named " + n);
    return f.system_def(n);
}

std::vector<Name> split_tuple(const std::string& s) {
    std::vector<Name> out;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');)
        if (!x.empty()) out.push_back(x);
    return out;
}

std::string join_names(const std::vector<Name>& v) {
    std::string s;
    for (auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

void print_report(const std::string& title, const SessionReport& r) {
    std::cout << title << ": " << (r.passed ? "pass" : "fail") << "\n";
    for (auto& v : r.violations)
        std::cout << "  clause " << v.clause << " at " << (v.path.empty() ? "/" : v.path) << ": " << v.message << "\n";
}

void print_typing(const Typing& t) {
    std::cout << "session typing: " << print(t.session) << "\n";
    for (auto& e : t.channels.entries) std::cout << "  (" << join_names(e.tuple) << ") : " << print(e.proc) << "\n";
}

void print_error(const TypeError& e) { std::cout << kind_name(e.kind) << ": " << e.message << "\n"; }

void print_slices(const SliceReport& r) {
    for (auto& v : r.verdicts) {
        std::cout << "  " << (v.pass ? "PASS " : "FAIL ") << v.kind << " " << v.session;
        if (!v.tuple.empty()) std::cout << " (" << join_names(v.tuple) << ") as participant " << v.index;
        std::cout << "\n";
        if (!v.pass) {
            std::cout << "    slice:    " << print(v.slice) << "\n";
            if (v.expected) std::cout << "    expected: " << print(v.expected) << "\n";
            std::cout << "    mismatch: " << v.mismatch << "\n";
        }
    }
    std::cout << "note: " << r.caveat << "\n";
}

int verdict_code(const Verdict& v) {
    return v.outcome == Outcome::Pass ? kPass : v.outcome == Outcome::Fail ? kFail : kUnknown;
}

void print_verdict(const std::string& what, const Verdict& v) {
    std::cout << what << ": " << outcome_name(v.outcome);
    if (v.outcome == Outcome::Pass && !v.exhaustive) std::cout << " up to budget";
    std::cout << " (" << v.states << " states, budget " << v.budget << ")\n";
    if (!v.reason.empty()) std::cout << "  " << v.reason << "\n";
    for (size_t i = 0; i < v.trace.size(); ++i) std::cout << "  " << i + 1 << ". " << v.trace[i] << "\n";
    for (auto& n : v.notes) std::cout << "  note: " << n << "\n";
}

int cmd_parse(const Config& c, const SourceFile& f) {
    if (c.format == "json") {
        json j = {{"sessions", json::array()}, {"channels", json::array()}, {"processes", json::array()},
                  {"systems", json::array()}};
        for (auto& s : f.sessions) j["sessions"].push_back({{"name", s.name}, {"session", print(s.sess)}});
        for (auto& ch : f.channels) j["channels"].push_back({{"channel", ch.chan}, {"session", ch.session}});
        for (auto& p : f.processes) j["processes"].push_back({{"name", p.name}, {"process", print(p.proc)}});
        for (auto& s : f.systems) {
            json comps = json::array();
            for (auto& [r, p] : s.components) comps.push_back({{"role", r}, {"process", p}});
            j["systems"].push_back({{"name", s.name}, {"components", comps}});
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << print(f);
    }
    return kPass;
}

int cmd_wellformed(const Config& c, const SourceFile& f) {
    S s = need_session(f, c.session);
    auto wf = well_formed(s);
    auto rf = wf.passed ? race_free(s) : SessionReport{false, {}};
    if (c.format == "json") {
        std::cout << json{{"session", c.session}, {"well_formed", to_json(wf)},
                          {"race_free", wf.passed ? to_json(rf) : json(nullptr)}}
                         .dump(2)
                  << "\n";
    } else {
        print_report("well-formed", wf);
        if (wf.passed) print_report("race-free", rf);
    }
    return wf.passed && rf.passed ? kPass : kFail;
}

int cmd_project(const Config& c, const SourceFile& f) {
    S s = need_session(f, c.session);
    P role;
    if (is_communicating(s)) {
        auto order = participant_order(s);
        auto it = std::find(order.begin(), order.end(), c.role);
        if (it == order.end()) throw UsageError(c.role + " is not a participant of " + c.session);
        if (!c.tuple.empty()) {
            role = role_instance(c.session, s, static_cast<int>(it - order.begin()) + 1, split_tuple(c.tuple));
            if (!role)
                throw UsageError("--tuple needs " + std::to_string(signature_width(c.session, s)) + " channels");
        } else {
            role = communicating_projection(c.session, s).roles.at(c.role);
        }
    } else {
        if (!pid(s).count(c.role)) throw UsageError(c.role + " is not a participant of " + c.session);
        role = project_integrating(s, c.role, f.env());
    }
    role = normalize(role);
    if (c.format == "json")
        std::cout << json{{"session", c.session}, {"role", c.role}, {"projection", print(role)}}.dump(2) << "\n";
    else
        std::cout << print(role) << "\n";
    return kPass;
}

int cmd_infer(const Config& c, const SourceFile& f) {
    P p = need_process(f, c.process);
    TypeEnv env = f.env();
    json j = {{"process", c.process}};
    if (c.show_env) {
        json g = json::array();
        for (auto& [a, b] : env.bindings) g.push_back({{"channel", a}, {"session", b}});
        j["env"] = g;
        if (c.format != "json")
            for (auto& [a, b] : env.bindings) std::cout << a << " : " << b << "\n";
    }
    int code;
    if (!c.spec.empty()) {
        if (c.role.empty()) throw UsageError("--spec needs --role");
        S spec = need_session(f, c.spec);
        auto rep = check_against(env, p, project_integrating(spec, c.role, env));
        j["check"] = to_json(rep);
        if (c.format != "json") {
            std::cout << (rep.passed ? "pass" : "fail") << ": " << rep.message << "\n";
            if (rep.typing) print_typing(*rep.typing);
        }
        code = rep.passed ? kPass : kFail;
    } else {
        auto r = infer_principal(env, p);
        j["inference"] = to_json(r);
        if (c.format != "json") {
            if (r.typing) print_typing(*r.typing);
            if (r.error) print_error(*r.error);
        }
        code = r.ok() ? kPass : kFail;
    }
    if (c.format == "json") std::cout << j.dump(2) << "\n";
    return code;
}

int cmd_check(const Config& c, const SourceFile& f) {
    auto sys = need_system(f, c.system);
    S spec = need_session(f, c.spec);
    auto rep = well_typed_system(sys, c.spec, spec, f.env());
    if (c.format == "json") {
        std::cout << to_json(rep).dump(2) << "\n";
    } else {
        std::cout << c.system << " is " << (rep.passed ? "" : "not ") << "well-typed by " << c.spec << "\n";
        for (auto& p : rep.problems) std::cout << "  " << p << "\n";
        for (auto& comp : rep.components) {
            std::cout << "  " << comp.role << ": " << (comp.check.passed ? "pass" : "fail") << "\n";
            if (comp.slices) print_slices(*comp.slices);
            if (!comp.slice_error.empty()) std::cout << "    slicing unavailable: " << comp.slice_error << "\n";
        }
    }
    return rep.passed ? kPass : kFail;
}

int cmd_slice(const Config& c, const SourceFile& f) {
    P p = need_process(f, c.process);
    S spec = need_session(f, c.spec);
    SliceReport rep;
    try {
        rep = diagnose(f.env(), p, c.spec, spec, c.role);
    } catch (const UnsupportedOperator& e) {
        throw UsageError(e.what());
    }
    if (c.format == "json") {
        std::cout << to_json(rep).dump(2) << "\n";
    } else {
        std::cout << "slices of " << c.process << " against " << c.spec << " as " << c.role << ": "
                  << (rep.all_pass ? "all pass" : "mismatch") << "\n";
        print_slices(rep);
    }
    return rep.all_pass ? kPass : kFail;
}

int cmd_privacy(const Config& c, const SourceFile& f) {
    auto v = check_channel_privacy(need_system(f, c.system), budget_of(c));
    if (c.format == "json")
        std::cout << to_json(v).dump(2) << "\n";
    else
        print_verdict("channel privacy of " + c.system, v);
    return verdict_code(v);
}

int cmd_conform(const Config& c, const SourceFile& f) {
    auto sys = need_system(f, c.system);
    S spec = need_session(f, c.spec);
    auto v = check_conformance(sys, spec, f.env(), budget_of(c));
    if (c.format == "json")
        std::cout << to_json(v).dump(2) << "\n";
    else
        print_verdict("conformance of " + c.system + " to " + c.spec, v);
    return verdict_code(v);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Checker for multiparty session specifications and process implementations"};
    app.require_subcommand(1, 1);
    Config c;
    auto add_common = [&](CLI::App* s) {
        s->add_option("file", c.file, "input .sess file")->required()->check(CLI::ExistingFile);
        s->add_option("--format", c.format, "output format")->check(CLI::IsMember({"text", "json"}));
    };
    auto with_budget = [&](CLI::App* s) {
        s->add_option("--budget", c.budget, "exploration budget unfold,depth,states (default from SESSTOOL_BUDGET)");
    };

    auto* parse_cmd = app.add_subcommand("parse", "parse a file and print it back");
    add_common(parse_cmd);

    auto* wf = app.add_subcommand("wellformed", "check well-formedness and race-freedom of a session");
    add_common(wf);
    wf->add_option("--session", c.session)->required();

    auto* proj = app.add_subcommand("project", "project a session onto a participant");
    add_common(proj);
    proj->add_option("--session", c.session)->required();
    proj->add_option("--role", c.role)->required();
    proj->add_option("--tuple", c.tuple, "channel names for a communicating role, comma separated");

    auto* inf = app.add_subcommand("infer", "infer the principal typing of a process");
    add_common(inf);
    inf->add_option("--process", c.process)->required();
    inf->add_flag("--env", c.show_env, "print the type environment used");
    inf->add_option("--spec", c.spec, "check against this integrating session");
    inf->add_option("--role", c.role, "participant of --spec");

    auto* chk = app.add_subcommand("check", "check that a system is well-typed by a session");
    add_common(chk);
    chk->add_option("--system", c.system)->required();
    chk->add_option("--spec", c.spec)->required();

    auto* sl = app.add_subcommand("slice", "compare the slices of a process with projected roles");
    add_common(sl);
    sl->add_option("--process", c.process)->required();
    sl->add_option("--spec", c.spec)->required();
    sl->add_option("--role", c.role)->required();

    auto* pv = app.add_subcommand("privacy", "check channel privacy of a system");
    add_common(pv);
    pv->add_option("--system", c.system)->required();
    with_budget(pv);

    auto* cf = app.add_subcommand("conform", "check conformance of a system to a session");
    add_common(cf);
    cf->add_option("--system", c.system)->required();
    cf->add_option("--spec", c.spec)->required();
    with_budget(cf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        SourceFile f = parse_file(c.file);
        auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "parse") return cmd_parse(c, f);
        if (name == "wellformed") return cmd_wellformed(c, f);
        if (name == "project") return cmd_project(c, f);
        if (name == "infer") return cmd_infer(c, f);
        if (name == "check") return cmd_check(c, f);
        if (name == "slice") return cmd_slice(c, f);
        if (name == "privacy") return cmd_privacy(c, f);
        if (name == "conform") return cmd_conform(c, f);
    } catch (const ParseError& e) {
        std::cerr << c.file << ":" << e.line << ":" << e.col << ": " << kind_name(e.kind) << ": " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
