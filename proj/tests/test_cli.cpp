#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace {

struct Run {
    int status;
    std::string out;
};

Run eds(const std::string& args) {
    std::string cmd = std::string(EDS_CLI) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(eds("check --system /nonexistent.eds").status == 2);
    CHECK(eds("example nope").status == 2);
    CHECK(eds("check").status == 2);
    CHECK(eds("frobnicate").status == 2);
    CHECK(eds("check --example crstandard").status == 0);
    CHECK(eds("list-examples").status == 0);
}

TEST_CASE("json report of the Laplace entry") {
    Run r = eds("example laplace --json");
    REQUIRE(r.status == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["darboux_integrable"] == true);
    CHECK(j["q"] == 3);
    CHECK(j["system"] == "laplace");
    CHECK(j["checks"].size() == 16);
    CHECK(eds("example laplace --json").out == r.out);
    CHECK(eds("--seed 43 example laplace --json").out != r.out);
}

TEST_CASE("vessiot stage from an exported file with a chosen base point") {
    Run printed = eds("example benequation --print");
    REQUIRE(printed.status == 0);
    std::size_t at = printed.out.find("name: ben-coframe");
    REQUIRE(at != std::string::npos);
    std::size_t start = printed.out.rfind("[system]", at);
    std::size_t end = printed.out.find("[system]", at);
    std::string path = "ben-coframe.eds";
    std::ofstream(path) << printed.out.substr(start, end == std::string::npos ? std::string::npos : end - start);

    Run r = eds("vessiot --system " + path + " --basepoint \"z=0,xi=0,W=i\"");
    CHECK(r.status == 0);
    CHECK(r.out.find("pass  constants C^2_12 = -1") != std::string::npos);
    CHECK(r.out.find("pass  killing 1 0 1") != std::string::npos);
    Run j = eds("--json vessiot --system " + path + " --basepoint \"z=0,xi=0,W=i\"");
    auto rep = nlohmann::json::parse(j.out);
    CHECK(rep["constants"] == nlohmann::json::array({"C^2_12 = -1"}));
    std::remove(path.c_str());
}
