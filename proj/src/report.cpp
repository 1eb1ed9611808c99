#include "sesstool/report.hpp"

#include "sesstool/parser.hpp"

namespace sess {

using nlohmann::json;

namespace {

json opt_proc(const P& p) { return p ? json(print(p)) : json(nullptr); }

}  // namespace

json to_json(const SessionReport& r) {
    json v = json::array();
    for (auto& x : r.violations)
        v.push_back({{"clause", x.clause}, {"path", x.path}, {"subterm", x.subterm ? print(x.subterm) : ""},
                     {"message", x.message}});
    return {{"passed", r.passed}, {"violations", v}};
}

json to_json(const Typing& t) {
    json entries = json::array();
    for (auto& e : t.channels.entries) entries.push_back({{"tuple", e.tuple}, {"process", print(e.proc)}});
    json vars = json::object();
    for (auto& [x, tup] : t.variable_tuples) vars[x] = tup;
    return {{"session", print(t.session)}, {"channels", entries}, {"variables", vars}};
}

json to_json(const TypeError& e) {
    return {{"kind", kind_name(e.kind)},   {"message", e.message},         {"channel", e.channel},
            {"expected", opt_proc(e.expected)}, {"found", opt_proc(e.found)}, {"where", opt_proc(e.where)}};
}

json to_json(const InferResult& r) {
    return {{"ok", r.ok()},
            {"typing", r.typing ? to_json(*r.typing) : json(nullptr)},
            {"error", r.error ? to_json(*r.error) : json(nullptr)}};
}

json to_json(const CheckReport& r) {
    return {{"passed", r.passed},
            {"message", r.message},
            {"expected", opt_proc(r.expected)},
            {"role_disagreement", r.role_disagreement},
            {"typing", r.typing ? to_json(*r.typing) : json(nullptr)},
            {"error", r.error ? to_json(*r.error) : json(nullptr)}};
}

json to_json(const SliceReport& r) {
    json vs = json::array();
    for (auto& v : r.verdicts)
        vs.push_back({{"session", v.session},
                      {"kind", v.kind},
                      {"channel", v.channel},
                      {"tuple", v.tuple},
                      {"index", v.index},
                      {"slice", opt_proc(v.slice)},
                      {"expected", opt_proc(v.expected)},
                      {"pass", v.pass},
                      {"mismatch", v.mismatch}});
    json placement = json::object();
    for (auto& [x, t] : r.placement) placement[x] = t;
    return {{"all_pass", r.all_pass}, {"verdicts", vs}, {"caveat", r.caveat}, {"placement", placement}};
}

json to_json(const SystemReport& r) {
    json comps = json::array();
    for (auto& c : r.components) {
        json j = {{"role", c.role}, {"check", to_json(c.check)}};
        j["slices"] = c.slices ? to_json(*c.slices) : json(nullptr);
        if (!c.slice_error.empty()) j["slice_error"] = c.slice_error;
        comps.push_back(j);
    }
    return {{"passed", r.passed},
            {"participants_ok", r.participants_ok},
            {"marking_ok", r.marking_ok},
            {"problems", r.problems},
            {"components", comps}};
}

json to_json(const Verdict& v) {
    return {{"outcome", outcome_name(v.outcome)}, {"trace", v.trace},         {"reason", v.reason},
            {"states", v.states},                 {"exhaustive", v.exhaustive}, {"budget", v.budget},
            {"notes", v.notes}};
}

}  // namespace sess
