#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

// Runs the CLI from the corpus directory's parent; returns exit code and stdout.
static std::pair<int, std::string> run(const std::string& args) {
    std::string cmd = std::string("cd ") + SESSTOOL_SOURCE_DIR + " && " + SESSTOOL_CLI + " " + args + " 2>/dev/null";
    FILE* f = popen(cmd.c_str(), "r");
    REQUIRE(f);
    std::string out;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, f)) out.append(buf, n);
    int status = pclose(f);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

static std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Compares JSON output with a committed golden file. SESSTOOL_UPDATE_GOLDEN=1
// rewrites the golden files instead.
static void golden(const std::string& name, const std::string& args, int expected_code) {
    auto [code, out] = run(args + " --format json");
    CAPTURE(args);
    CHECK(code == expected_code);
    auto got = nlohmann::json::parse(out);
    std::string path = std::string(SESSTOOL_SOURCE_DIR) + "/tests/golden/" + name + ".json";
    if (std::getenv("SESSTOOL_UPDATE_GOLDEN")) {
        std::ofstream(path) << got.dump(2) << "\n";
        return;
    }
    auto want = nlohmann::json::parse(read_file(path));
    CHECK(got == want);
}

TEST_CASE("exit codes follow the verdict") {
    CHECK(run("check corpus/protocol.sess --system SysE --spec Proto").first == 0);
    CHECK(run("wellformed corpus/protocol.sess --session Proto").first == 0);
    CHECK(run("infer corpus/prop3.sess --process P1 --spec A0 --role p").first == 1);
    CHECK(run("infer corpus/prop3.sess --process P1").first == 1);
    CHECK(run("infer corpus/protocol.sess --process Broker --env").first == 0);
    CHECK(run("privacy corpus/protocol.sess --system SysE").first == 0);
    CHECK(run("conform corpus/protocol.sess --system SysE --spec Proto").first == 0);
    CHECK(run("conform corpus/protocol.sess --system SysE --spec Proto --budget 1,2,3").first == 2);
}

TEST_CASE("usage and parse errors exit with 3") {
    CHECK(run("").first == 3);
    CHECK(run("frobnicate corpus/protocol.sess").first == 3);
    CHECK(run("project corpus/protocol.sess --session Proto").first == 3);
    CHECK(run("project corpus/protocol.sess --session Nope --role bank").first == 3);
    CHECK(run("project corpus/protocol.sess --session Proto --role nobody").first == 3);
    CHECK(run("privacy corpus/protocol.sess --system SysE --budget x").first == 3);
    CHECK(run("parse does/not/exist.sess").first == 3);
    CHECK(run("parse tests/test_cli.cpp").first == 3);
}

TEST_CASE("project prints the bank's role") {
    auto [code, out] = run("project corpus/protocol.sess --session Proto --role bank");
    CHECK(code == 0);
    CHECK(out.find("epay1?acc[3]") != std::string::npos);
    CHECK(out.find("epay2?acc[3]") != std::string::npos);
}

TEST_CASE("slice reports agreement and the caveat for the counterexample") {
    auto [code, out] = run("slice corpus/prop3.sess --process P1 --spec A0 --role p");
    CHECK(code == 0);
    CHECK(out.find("all pass") != std::string::npos);
    CHECK(out.find("note: ") != std::string::npos);
}

TEST_CASE("every corpus file parses and prints back") {
    for (auto f : {"protocol", "client_server", "quote_request", "prop3"}) {
        auto [code, out] = run(std::string("parse corpus/") + f + ".sess");
        CHECK(code == 0);
        CHECK_FALSE(out.empty());
    }
}

TEST_CASE("json reports match the golden files") {
    golden("project_bank", "project corpus/protocol.sess --session Proto --role bank", 0);
    golden("wellformed_proto", "wellformed corpus/protocol.sess --session Proto", 0);
    golden("infer_p1", "infer corpus/prop3.sess --process P1 --spec A0 --role p --env", 1);
    golden("check_syse", "check corpus/protocol.sess --system SysE --spec Proto", 0);
    golden("slice_p1", "slice corpus/prop3.sess --process P1 --spec A0 --role p", 0);
    golden("privacy_quote", "privacy corpus/quote_request.sess --system Quote", 0);
    golden("conform_quote", "conform corpus/quote_request.sess --system Quote --spec QuoteReq", 0);
    golden("parse_prop3", "parse corpus/prop3.sess", 0);
}
