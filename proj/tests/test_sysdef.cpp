#include <doctest.h>

#include "eds/catalog.hpp"

using namespace eds;

namespace {

const char* kLaplace = R"(
[system]
name: laplace-file
[coords]
real x1 x2 u u1 u2 u11 u12
[forms]
I: du - u1*dx1 - u2*dx2, du1 - u11*dx1 - u12*dx2, du2 - u12*dx1 + u11*dx2
[fields]
D1 = d_x1 + u1*d_u + u11*d_u1 + u12*d_u2
D2 = d_x2 + u2*d_u + u12*d_u1 - u11*d_u2
[dplus]
D1 - i*D2
d_u11 + i*d_u12
[expect]
elliptic
darboux m=7 q=3 class=neither
invariant u1 - i*u2   # trailing comment
dflag 4 6 7
)";

const Check* check_named(const Report& r, const std::string& name) {
    for (const Check& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string error_of(const std::string& text) {
    try {
        parse_system(text);
    } catch (const DefinitionError& e) {
        return e.what();
    }
    return "";
}

// The named system of a catalog entry.
std::string entry_system(const std::string& entry, const std::string& name) {
    for (const std::string& s : find_entry(entry).systems)
        if (s.find("name: " + name + "\n") != std::string::npos) return s;
    FAIL("no system " << name);
    return "";
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    std::size_t at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("a hand-written system runs") {
    SystemDef def = parse_system(kLaplace);
    CHECK(def.name == "laplace-file");
    CHECK(def.system.size() == 3);
    CHECK(def.dplus.size() == 2);
    CHECK(def.expects.size() == 4);
    Report r = run_system(def, {});
    CHECK(r.pass());
    CHECK(r.facts["q"] == 3);

    RunOptions flags_only;
    flags_only.stages = StageFlags;
    Report f = run_system(def, flags_only);
    const Check* dflag = check_named(f, "dflag 4 6 7");
    REQUIRE(dflag);
    CHECK(dflag->pass);
    CHECK(f.checks.size() > 1);
    CHECK_FALSE(check_named(f, "elliptic"));
}

TEST_CASE("parse errors carry line numbers") {
    CHECK(error_of("[coords]\nreal x\n[bogus]\n").find("line 3") != std::string::npos);
    CHECK(error_of("[coords]\nreal x u\n[forms]\nI: du - (u*dx\n").find("line 4") != std::string::npos);
    CHECK(error_of("[coords]\nreal x u\n[expect]\nfrobnicate\n").find("line 4") != std::string::npos);
    CHECK(error_of("[forms]\nI: dx\n").find("[coords]") != std::string::npos);
    CHECK_THROWS_AS(load_system("/nonexistent/system.eds"), DefinitionError);
}

TEST_CASE("every catalog text parses back") {
    for (const CatalogEntry& e : catalog()) {
        CHECK(!e.systems.empty());
        for (const std::string& text : e.systems) CHECK_NOTHROW(parse_system(text));
    }
    CHECK_THROWS_AS(find_entry("nope"), Error);
}

TEST_CASE("laplace report facts and determinism") {
    RunOptions o;
    Report a = run_entry("laplace", o), b = run_entry("laplace", o);
    Json j = a.json();
    CHECK(j["darboux_integrable"] == true);
    CHECK(j["q"] == 3);
    CHECK(j["pass"] == true);
    CHECK(j["seed"] == 42);
    CHECK(a.json().dump() == b.json().dump());
    CHECK(a.text().find("all 16 checks passed") != std::string::npos);
}

TEST_CASE("verdicts do not move with the tolerance") {
    for (double tol : {1e-10, 1e-9, 1e-7}) {
        RunOptions o;
        o.settings.tol_abs = o.settings.tol_rel = tol;
        o.settings.seed = 7;
        CAPTURE(tol);
        CHECK(run_entry("laplace", o).pass());
        CHECK(run_entry("crstandard", o).pass());
    }
}

TEST_CASE("EB2 with the opposite sign on the conj Uz term loses its invariant") {
    const std::string good = entry_system("eb2", "eb2-quotient");
    const std::string bad = replace_once(good, "- (U + U~)/(z~ - z)^2*d_Uz~", "+ (U + U~)/(z~ - z)^2*d_Uz~");
    RunOptions o;
    o.stages = StageCheck;
    const std::string inv = "invariant Uz + U/(z - z~)";
    Report base = run_system(parse_system(good), o);
    const Check* ok = check_named(base, inv);
    REQUIRE(ok);
    CHECK(ok->pass);
    Report r = run_system(parse_system(bad), o);
    const Check* c = check_named(r, inv);
    REQUIRE(c);
    CHECK_FALSE(c->pass);
}

TEST_CASE("biharmonic D+ without the fibre correction is not elliptic") {
    const std::string good = entry_system("biharmonic", "biharmonic-jets");
    const std::string bad = replace_once(good, "Dx - i*Dy + (v1 + i*v2)/2*(d_r - i*d_u12)", "Dx - i*Dy");
    RunOptions o;
    o.stages = StageCheck;
    Report r = run_system(parse_system(bad), o);
    const Check* c = check_named(r, "elliptic");
    REQUIRE(c);
    CHECK_FALSE(c->pass);
    REQUIRE(!c->witnesses.empty());
    CHECK(c->witnesses[0].find("mixed brackets in D") != std::string::npos);
    const Check* inv = check_named(r, "invariant r - i*u12 - (x - i*y)*(v1 - i*v2)/2");
    REQUIRE(inv);
    CHECK_FALSE(inv->pass);
}
