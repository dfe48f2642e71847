// One line per acceptance criterion; exit status 1 if any line fails.
#include <iostream>
#include <regex>
#include <sstream>

#include "eds/catalog.hpp"
#include "fuzz.hpp"

using namespace eds;

namespace {

// residual tolerances of the closed-form solutions
constexpr double kSolutionTol = 1e-8;
constexpr double kBiharmonicTol = 1e-7;
constexpr double kCartanHilbertTol = 1e-7;
// Wirtinger derivative against a contour (complex-step) difference, relative
constexpr double kWirtingerTol = 1e-6;

struct Result {
    bool pass = true;
    std::vector<std::string> why;

    void fail(const std::string& w) {
        pass = false;
        why.push_back(w);
    }
    void expect(bool ok, const std::string& w) {
        if (!ok) fail(w);
    }
};

const Check* find(const Report& r, const std::string& prefix) {
    for (const Check& c : r.checks)
        if (c.name.compare(0, prefix.size(), prefix) == 0) return &c;
    return nullptr;
}

// The check must exist and pass.
const Check* need(const Report& r, const std::string& prefix, Result& out) {
    const Check* c = find(r, prefix);
    if (!c)
        out.fail(r.system + ": no check '" + prefix + "'");
    else if (!c->pass)
        out.fail(r.system + ": '" + c->name + "' failed");
    return c;
}

void need_all(const Report& r, const std::vector<std::string>& prefixes, Result& out) {
    out.expect(r.pass(), r.system + ": report has failures");
    for (const std::string& p : prefixes) need(r, p, out);
}

void need_solution(const Report& r, const std::string& prefix, double tol, int min_points, Result& out) {
    const Check* c = need(r, prefix, out);
    if (!c) return;
    double res = c->ranks.value("max_residual", 1.0);
    int pts = c->ranks.value("points", 0);
    int skipped = c->ranks.value("skipped_samples", -1);
    std::ostringstream os;
    os << r.system << ": residual " << res << " over " << pts << " points, " << skipped << " samples skipped";
    out.expect(res < tol && pts >= min_points && skipped == 0, os.str());
}

Report run(const std::string& name, std::uint64_t seed = 42) {
    RunOptions o;
    o.settings.seed = seed;
    o.long_stage = true;
    return run_entry(name, o);
}

// "C^2_12 = -1; C^1_23 = 1/2" as written in check names
StructureConstants parse_table(const std::string& text) {
    static const std::regex entry(R"(C\^(\d)_(\d)(\d) = (-?\d+(?:/\d+)?))");
    std::vector<std::tuple<int, int, int, Rational>> got;
    int n = 0;
    for (std::sregex_iterator it(text.begin(), text.end(), entry), end; it != end; ++it) {
        int i = std::stoi((*it)[1]) - 1, j = std::stoi((*it)[2]) - 1, k = std::stoi((*it)[3]) - 1;
        got.emplace_back(i, j, k, Rational((*it)[4].str()));
        n = std::max({n, i + 1, j + 1, k + 1});
    }
    StructureConstants c(n);
    for (auto& [i, j, k, v] : got) c.set(i, j, k, v);
    return c;
}

Result laplace() {
    Result out;
    std::string shape;
    for (std::uint64_t seed : {1u, 42u, 777u}) {
        Report r = run("laplace", seed);
        need_all(r,
                 {"elliptic", "decomposable", "dflag 4 6 7", "vrank 5", "darboux m=7 d=2 q=3 n=1 numeta=1 class=neither",
                  "invariant x1 + i*x2", "invariant u1 - i*u2", "invariant u11 - i*u12"},
                 out);
        Json ranks = Json::array();
        for (const Check& c : r.checks) ranks.push_back({c.name, c.pass, c.ranks});
        if (shape.empty())
            shape = ranks.dump();
        else
            out.expect(shape == ranks.dump(), "rank table differs at seed " + std::to_string(seed));
    }
    return out;
}

Result benequation(const Report& r) {
    Result out;
    need_all(r,
             {"ben-jet: darboux m=6 d=2 q=2 numeta=0 class=minimal", "ben-jets: g-invariant", "ben-coframe: invariant xi",
              "ben-coframe: one-adapted", "ben-coframe: vessiot", "ben-coframe: constants C^2_12 = -1",
              "ben-coframe: omega", "ben-coframe: extension: invariant under right multiplication",
              "ben-coframe: extension: transversality", "ben-coframe: extension: H^(inf) = 0",
              "ben-coframe: extension-span dc1 - c1*xi*dz; dc2 - c1*(1 - i*xi)*dz",
              "benequation: quotient diagram: diagram commutes"},
             out);
    need_solution(r, "ben-coframe: solution", kSolutionTol, 60, out);
    return out;
}

Result liouville(const Report& plus, const Report& minus) {
    Result out;
    need_all(plus, {"liouville-plus-jets: action-killing 2 1 0", "liouville-plus-jets: symmetry"}, out);
    need_all(minus,
             {"liouville-minus-jets: action-killing 0 3 0", "liouville-minus-jets: symmetry",
              "liouville-minus: sl(2,R) and su(2) generator algebras are not isomorphic"},
             out);
    need_solution(plus, "liouville-plus-quotient: solution", kSolutionTol, 60, out);
    need_solution(minus, "liouville-minus-quotient: solution", kSolutionTol, 60, out);
    return out;
}

Result crstandard(const Report& r) {
    Result out;
    need_all(r, {"darboux m=6 d=2 q=3 n=0 class=maximal", "span V =", "span Vinf =", "normal"}, out);
    return out;
}

Result eb2(const Report& r) {
    Result out;
    need_all(r, {"eb2-quotient: darboux m=6 d=2 q=2 class=minimal", "eb2-quotient: invariant Uz + U/(z - z~)"}, out);
    need_solution(r, "eb2-quotient: solution", kSolutionTol, 60, out);
    return out;
}

Result goursat(const Report& r) {
    Result out;
    need_all(r,
             {"symbol elliptic", "one-adapted", "vessiot", "kinv", "killing 2 1 0", "isomorphic sl2 yes", "isomorphic su2 no",
              "smatrix", "omega"},
             out);
    return out;
}

Result biharmonic(const Report& r) {
    Result out;
    need_all(r,
             {"biharmonic-jets: darboux m=12 d=3 q=4 class=neither", "biharmonic-coframe: constants zero",
              "biharmonic-extension: extension-span dc1", "biharmonic-extension: extension-span dk0"},
             out);
    need_solution(r, "biharmonic-extension: solution", kBiharmonicTol, 60, out);
    return out;
}

Result cartan_hilbert(const Report& r) {
    Result out;
    int identities = 0;
    for (const Check& c : r.checks)
        if (c.name.rfind("identity ", 0) == 0) {
            ++identities;
            out.expect(c.pass, "'" + c.name.substr(0, 60) + "...' failed");
        }
    out.expect(identities == 4, std::to_string(identities) + " identities instead of 4");
    need_all(r, {"symmetry"}, out);
    need_solution(r, "solution", kCartanHilbertTol, 60, out);
    return out;
}

Result properties(const std::vector<Report>& reports) {
    Result out;
    Settings s;

    ChartPtr c = make_chart("complex z, w; real t");
    std::mt19937_64 rng(21);
    int closed = 0;
    for (int k = 0; k < 200; ++k) {
        Form f = testing::fuzz_form(rng, c, static_cast<int>(rng() % 3));
        Form dd = d(d(f));
        closed += dd.empty() || is_zero(coefficients(dd), c->domain(), s).zero;
    }
    out.expect(closed == 200, "d^2 != 0 on " + std::to_string(200 - closed) + " of 200 forms");

    int tables = 0;
    for (const Report& r : reports)
        for (const Check& ch : r.checks) {
            if (ch.name.find("C^") == std::string::npos) continue;
            StructureConstants cc = parse_table(ch.name);
            ++tables;
            out.expect(cc.antisymmetric() && cc.jacobi(), r.system + ": Jacobi fails for '" + ch.name + "'");
        }
    out.expect(tables > 0, "no structure-constant tables");

    // ∂/∂z from the contour integral in the z slot, ∂/∂t from both t slots
    Domain dom({{"z", false}, {"w", false}, {"t", true}}, {});
    std::mt19937_64 erng(3);
    int compared = 0;
    double worst = 0;
    for (int k = 0; compared < 100 && k < 1000; ++k) {
        Expr e = testing::fuzz(erng, 4);
        Samples smp = sample(expr_fn({e}, dom), dom, 1000 + k, 0, 1);
        std::vector<cd> slots = dom.slots(smp.points[0]);
        Tape f = dom.compile({e}), g = dom.compile({wirtinger(e, "z"), wirtinger(e, "z", true), wirtinger(e, "t")});
        auto fn = [&](std::span<const cd> x, std::vector<cd>& v) {
            double sc;
            return f.run(x, v, sc);
        };
        std::vector<cd> exact, dz, dzb, dt;
        double sc;
        std::vector<cd> ez(6, 0), ezb(6, 0), et(6, 0);
        ez[0] = 1;
        ezb[1] = 1;
        et[4] = et[5] = 1;
        if (!g.run(slots, exact, sc) || !directional_derivative(fn, slots, ez, dz) ||
            !directional_derivative(fn, slots, ezb, dzb) || !directional_derivative(fn, slots, et, dt))
            continue;
        const cd approx[3] = {dz[0], dzb[0], dt[0]};
        for (int j = 0; j < 3; ++j)
            worst = std::max(worst, std::abs(approx[j] - exact[j]) / std::max(1.0, std::abs(exact[j])));
        ++compared;
    }
    std::ostringstream os;
    os << "wirtinger vs complex step: " << compared << " expressions, worst relative error " << worst;
    out.expect(compared == 100 && worst < kWirtingerTol, os.str());

    int di = 0;
    for (const Report& r : reports)
        for (std::size_t k = 0; k < r.checks.size(); ++k) {
            const Check& ch = r.checks[k];
            std::size_t at = ch.name.find("darboux ");
            if (at == std::string::npos || !ch.pass) continue;
            ++di;
            std::string pre = ch.name.substr(0, at);
            const Check* bounds = find(r, pre + "rank bounds");
            const Check* dual = find(r, pre + "form and field Darboux tests agree");
            out.expect(bounds && bounds->pass, r.system + ": rank bounds for " + ch.name);
            out.expect(dual && dual->pass, r.system + ": dual tests for " + ch.name);
        }
    out.expect(di >= 8, "only " + std::to_string(di) + " Darboux integrable systems");

    for (const Report& r : reports) {
        Report again = run(r.system);
        out.expect(again.json().dump() == r.json().dump(), r.system + ": JSON differs between runs");
    }
    return out;
}

Result schwarzian_check(const Report& minus) {
    Result out;
    need(minus, "liouville-minus-quotient: schwarzian", out);
    Settings s;
    ChartPtr plane = make_chart("complex z", {"z + 3 != 0"});
    out.expect(is_zero(schwarzian(plane->parse("(2*z + 1)/(z + 3)")), plane->domain(), s).zero,
               "Mobius map has non-zero Schwarzian");
    out.expect(!is_zero(schwarzian(plane->parse("z^3")), plane->domain(), s).zero, "z^3 has zero Schwarzian");
    std::vector<DataSample> samples;
    for (const char* f : {"(2*z + 1)/(z + 3)", "exp(2*z)", "z^3 + z"}) samples.push_back({{"f", plane->parse(f)}});
    out.expect(verify_schwarzian(samples, s), "u_zz - u_z^2/2 differs from the Schwarzian");
    return out;
}

}  // namespace

int main() {
    std::vector<Report> reports;
    for (const CatalogEntry& e : catalog()) reports.push_back(run(e.name));
    auto get = [&](const std::string& name) -> const Report& {
        for (const Report& r : reports)
            if (r.system == name) return r;
        throw Error("missing report " + name);
    };

    struct Line {
        const char* name;
        Result result;
    };
    std::vector<Line> lines{
        {"Laplace: ranks, invariants, classification at seeds 1, 42, 777", laplace()},
        {"ben chain: minimal DI, xi, Vessiot coframe, omega, extension, quotient, solution", benequation(get("benequation"))},
        {"Liouville pair: solutions, Killing signatures, non-isomorphic algebras",
         liouville(get("liouville-plus"), get("liouville-minus"))},
        {"CR standard: maximal DI, V and V(inf) spans, normality", crstandard(get("crstandard"))},
        {"EB2: minimal DI, invariant, solution", eb2(get("eb2"))},
        {"Goursat: symbol, polarized Vessiot coframe, sl2, S, omega", goursat(get("goursat"))},
        {"biharmonic: q = 4, abelian, contact normal form, solution", biharmonic(get("biharmonic"))},
        {"Cartan-Hilbert: identities, PDE for U, prolonged symmetries", cartan_hilbert(get("cartan-hilbert"))},
        {"properties: d^2, Jacobi, Wirtinger, rank bounds, dual DI tests, determinism", properties(reports)},
        {"Schwarzian: u- identity, Mobius maps", schwarzian_check(get("liouville-minus"))},
    };
    bool all = true;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const Line& l = lines[k];
        all = all && l.result.pass;
        std::cout << (l.result.pass ? "PASS" : "FAIL") << "  " << (k + 1) << ". " << l.name << "\n";
        for (const std::string& w : l.result.why) std::cout << "        " << w << "\n";
    }
    return all ? 0 : 1;
}
