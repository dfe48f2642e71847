#include <doctest.h>

#include "eds/extension.hpp"

using namespace eds;

namespace {

ExprMatrix rows_of(const ChartPtr& c, const std::vector<std::vector<std::string>>& rows) {
    ExprMatrix out;
    for (const auto& r : rows) {
        std::vector<Expr> row;
        for (const std::string& e : r) row.push_back(c->parse(e));
        out.push_back(row);
    }
    return out;
}

ExprMatrix constant(const std::vector<std::vector<std::string>>& rows) {
    ExprMatrix out;
    for (const auto& r : rows) {
        std::vector<Expr> row;
        for (const std::string& e : r) row.push_back(parse(e));
        out.push_back(row);
    }
    return out;
}

std::vector<Form> forms(const ChartPtr& c, const std::vector<std::string>& text) {
    std::vector<Form> out;
    for (const std::string& t : text) out.push_back(parse_form(c, t));
    return out;
}

std::vector<VectorField> fields(const ChartPtr& c, const std::vector<std::string>& text) {
    std::vector<VectorField> out;
    for (const std::string& t : text) out.push_back(parse_field(c, t));
    return out;
}

// Lower-triangular group {[[c1, 0], [c2, 1]]} on a chart that also carries z, xi.
LieGroupModel affine_group(const ChartPtr& c, const Settings& s) {
    return matrix_group(c, {"c1", "c2"}, rows_of(c, {{"c1", "0"}, {"c2", "1"}}),
                        {constant({{"1", "0"}, {"0", "0"}}), constant({{"0", "0"}, {"1", "0"}})}, s);
}

const char* kLiouville[] = {
    "d_w0",
    "w0*d_w0 + w1*d_w1 + w2*d_w2 + w3*d_w3",
    "w0^2/2*d_w0 + w0*w1*d_w1 + (w0*w2 + w1^2)*d_w2 + (w0*w3 + 3*w1*w2)*d_w3",
};

std::vector<DataSample> samples(const std::vector<std::string>& fs) {
    std::vector<DataSample> out;
    for (const std::string& f : fs) out.push_back({{"f", parse(f)}});
    return out;
}

}  // namespace

TEST_CASE("affine group model") {
    ChartPtr c = make_chart("complex c1 c2", {"c1 != 0"});
    Settings s;
    LieGroupModel g = affine_group(c, s);
    CHECK(g.c.table() == std::vector<std::string>{"C^2_12 = -1"});
    CHECK(same_forms(g.mu_l, forms(c, {"dc1/c1", "dc2 - c2/c1*dc1"}), s));
    CHECK(same_forms(g.mu_r, forms(c, {"dc1/c1", "dc2/c1"}), s));
    CHECK(same_matrix(c, g.lambda, rows_of(c, {{"1", "0"}, {"-c2", "c1"}}), s));
    for (const Certificate& cert : verify_group_model(g, s)) CHECK_MESSAGE(cert.pass, cert.name << ": " << cert.witness);

    std::vector<VectorField> x = left_invariant_fields(g, s);
    REQUIRE(x.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(is_zero(pairing(g.mu_l[i], x[j]) - Expr(i == j ? 1 : 0), c->domain(), s).zero);
    for (const Certificate& cert : verify_action(x, g.c, s)) CHECK_MESSAGE(cert.pass, cert.name << ": " << cert.witness);

    // A wrong Lambda breaks the model.
    LieGroupModel bad = g;
    bad.lambda[1][0] = c->parse("c2");
    CHECK_FALSE(all_pass(verify_group_model(bad, s)));
}

TEST_CASE("SL2 group model") {
    ChartPtr c = make_chart("complex a b c", {"a != 0"});
    Settings s;
    ExprMatrix g = rows_of(c, {{"a", "b"}, {"c", "(1 + b*c)/a"}});
    LieGroupModel m = matrix_group(c, {"a", "b", "c"}, g,
                                   {constant({{"1", "0"}, {"0", "-1"}}), constant({{"0", "1"}, {"0", "0"}}),
                                    constant({{"0", "0"}, {"1", "0"}})},
                                   s);
    CHECK(m.c.jacobi());
    AlgebraInvariants inv = algebra_invariants(m.c);
    CHECK(inv.semisimple);
    CHECK(inv.positive == 2);
    CHECK(inv.negative == 1);
    for (const Certificate& cert : verify_group_model(m, s)) CHECK_MESSAGE(cert.pass, cert.name << ": " << cert.witness);
    CHECK_THROWS_AS(matrix_group(c, {"a", "b", "c"}, g,
                                 {constant({{"1", "0"}, {"0", "0"}}), constant({{"0", "1"}, {"0", "0"}}),
                                  constant({{"0", "0"}, {"1", "0"}})},
                                 s),
                    Error);
}

TEST_CASE("contact prolongation") {
    ChartPtr c = make_chart("complex z w0 w1 w2 w3", {"w1 != 0"});
    JetSpec jet{"z", {{"w0", "w1", "w2", "w3"}}, parse_field(c, "d_z + w1*d_w0 + w2*d_w1 + w3*d_w2")};
    VectorField z = parse_field(c, "w0^2/2*d_w0");
    VectorField p = prolong_contact_vf(z, jet);
    VectorField want = parse_field(c, kLiouville[2]);
    for (std::size_t j = 0; j < c->dim(); ++j) CHECK(is_zero(p[static_cast<int>(j)] - want[static_cast<int>(j)], c->domain(), Settings{}).zero);

    ChartPtr eb = make_chart("complex z w0 w1 w2");
    JetSpec short_jet{"z", {{"w0", "w1", "w2"}}, parse_field(eb, "d_z + w1*d_w0 + w2*d_w1")};
    VectorField q = prolong_contact_vf(parse_field(eb, "z*d_w0"), short_jet);
    VectorField q_want = parse_field(eb, "z*d_w0 + d_w1");
    for (std::size_t j = 0; j < eb->dim(); ++j) CHECK(is_zero(q[static_cast<int>(j)] - q_want[static_cast<int>(j)], eb->domain(), Settings{}).zero);
    CHECK_THROWS_AS(prolong_contact_vf(parse_field(eb, "w2*d_w0"), short_jet), Error);
}

TEST_CASE("Liouville generators: symmetry, action, invariants") {
    ChartPtr c = make_chart("complex z w0 w1 w2 w3", {"w1 != 0", "w0 - w0~ != 0"});
    Settings s;
    SubBundle h = make_bundle(c, forms(c, {"dw0 - w1*dz", "dw1 - w2*dz", "dw2 - w3*dz"}), s);
    std::vector<VectorField> z = fields(c, {kLiouville[0], kLiouville[1], kLiouville[2]});
    CHECK(verify_symmetry(z, h, s).pass);
    CHECK(check_transversality(z, h, s).pass);
    StructureConstants sl2(3);
    sl2.set(0, 0, 1, 1);
    sl2.set(1, 0, 2, 1);
    sl2.set(2, 1, 2, 1);
    for (const Certificate& cert : verify_action(z, sl2, s)) CHECK_MESSAGE(cert.pass, cert.name << ": " << cert.witness);

    std::vector<VectorField> broken = fields(c, {kLiouville[0], "w0*d_w0 + w1*d_w1 + w2*d_w2", kLiouville[2]});
    Certificate bad = verify_symmetry(broken, h, s);
    CHECK_FALSE(bad.pass);
    CHECK(bad.witness.find("Z2") != std::string::npos);
    CHECK_FALSE(check_transversality({z[0], z[0]}, h, s).pass);

    CHECK(verify_invariant(c->parse("w3/w1 - 3/2*(w2/w1)^2"), z, InvarianceMode::Holomorphic, s));
    CHECK(verify_invariant(c->parse("ln(-4*w1*w1~/(w0 - w0~)^2)"), z, InvarianceMode::Real, s));
    CHECK_FALSE(verify_invariant(c->parse("w1*w1~"), z, InvarianceMode::Real, s));
    // su2 real form: 1/2 Z1 + Z3, i Z2, i(1/2 Z1 - Z3) preserve the spherical potential.
    Expr half = Expr(Coef(Rational(1, 2))), i = Expr::imag_unit();
    std::vector<VectorField> su2 = {half * z[0] + z[2], i * z[1], i * (half * z[0] - z[2])};
    CHECK(verify_invariant(c->parse("ln(4*w1*w1~/(1 + w0*w0~)^2)"), su2, InvarianceMode::Real, s));
    CHECK_FALSE(verify_invariant(c->parse("ln(4*w1*w1~/(1 + w0*w0~)^2)"), z, InvarianceMode::Real, s));
}

TEST_CASE("extension of the equation with W_zb = |W|^2/2") {
    ChartPtr c = make_chart("complex z xi c1 c2", {"c1 != 0"});
    Settings s;
    LieGroupModel g = affine_group(c, s);
    ExtensionReport rep = build_extension(g, forms(c, {"xi*dz", "(1 - i*xi)*dz"}), {}, s);
    for (const Certificate& cert : rep.checks) CHECK_MESSAGE(cert.pass, cert.name << ": " << cert.witness);
    CHECK(same_span(rep.h, make_bundle(c, forms(c, {"dc1 - c1*xi*dz", "dc2 - c1*(1 - i*xi)*dz"}), s), s));

    // A psi with a conjugate term is not holomorphic.
    ExtensionReport bad = build_extension(g, forms(c, {"xi*dz", "(1 - i*xi~)*dz"}), {}, s);
    CHECK_FALSE(bad.pass());
    CHECK(bad.checks[0].name == "holomorphic");
    CHECK_FALSE(bad.checks[0].pass);
}

TEST_CASE("quotient diagram") {
    Settings s;
    ChartPtr jets = make_chart("complex z w0 w1 w2", {"w1 + w1~ != 0", "w0 - w0~ != 0"});
    ChartPtr ext = make_chart("complex z xi c1 c2", {"c1 != 0"});
    ChartPtr wchart = make_chart("complex z W W1", {"W != 0", "W - W~ != 0"});
    ChartPtr base = make_chart("complex z xi; real r s");
    auto im = [](const std::string& x) { return "(((" + x + ") - (" + x + ")~)/(2*i))"; };
    auto re = [](const std::string& x) { return "(((" + x + ") + (" + x + ")~)/2)"; };
    auto map = [](const ChartPtr& a, const ChartPtr& b, const std::map<std::string, std::string>& m) {
        std::map<std::string, Expr> images;
        for (const auto& [k, v] : m) images[k] = a->parse(v);
        return CoordinateMap(a, b, images);
    };
    QuotientDiagram q{
        map(jets, wchart, {{"z", "z"}, {"W", "2*w1/(w0~ - w0)"}, {"W1", "2*w2/(w0~ - w0) + 2*w1^2/(w0~ - w0)^2"}}),
        map(jets, ext, {{"z", "z"}, {"xi", "w2/w1"}, {"c1", "w1"}, {"c2", "w0 - i*w1"}}),
        map(wchart, base, {{"z", "z"}, {"xi", "W1/W - W/2"}, {"r", "-" + re("W") + "/" + im("W")}, {"s", "1/" + im("W") + " - 1"}}),
        map(ext, base, {{"z", "z"}, {"xi", "xi"}, {"r", im("c1") + "/" + re("c1")}, {"s", im("c2") + "/" + re("c1")}}),
        forms(ext, {"dc1 - c1*xi*dz", "dc2 - c1*(1 - i*xi)*dz"}),
        forms(jets, {"dw0 - w1*dz", "dw1 - w2*dz"}),
        forms(wchart, {"dW - W1*dz - W*W~/2*dz~"}),
        make_bundle(jets, forms(jets, {"dw0 - w1*dz", "dw1 - w2*dz", "dw0~ - w1~*dz~", "dw1~ - w2~*dz~"}), s),
    };
    for (const Certificate& cert : verify_quotient_diagram(q, s)) CHECK_MESSAGE(cert.pass, cert.name << ": " << cert.witness);

    QuotientDiagram wrong = q;
    wrong.q_g = map(ext, base, {{"z", "z"}, {"xi", "xi"}, {"r", re("c1") + "/" + im("c1")}, {"s", im("c2") + "/" + re("c1")}});
    CHECK_FALSE(all_pass(verify_quotient_diagram(wrong, s)));
    QuotientDiagram wrong_sign = q;
    wrong_sign.quotient = forms(wchart, {"dW - W1*dz + W*W~/2*dz~"});
    CHECK_FALSE(all_pass(verify_quotient_diagram(wrong_sign, s)));
}

TEST_CASE("solution formulas") {
    Settings s;
    const double tol = 1e-8;
    std::vector<DataSample> data = samples({"z^2 + 3*z", "exp(z)", "(z + 2)/(z - 3*i)", "z^3 - i*z"});

    SolutionFormula plus{{"f"}, {{"u", parse("ln(-4*f1*f1~/(f - f~)^2)")}}, {parse("f1"), parse("f - f~")},
                         {parse("u_zb - exp(u)/2")}};
    ResidualReport r = verify_solution_formula(plus, data, tol, s);
    CHECK_MESSAGE(r.pass, r.max_residual);
    CHECK(r.points == 80);
    SolutionFormula plus_wrong = plus;
    plus_wrong.residuals = {parse("u_zb + exp(u)/2")};
    CHECK_FALSE(verify_solution_formula(plus_wrong, data, tol, s).pass);

    SolutionFormula minus{{"f"}, {{"u", parse("ln(4*f1*f1~/(1 + f*f~)^2)")}}, {parse("f1")}, {parse("u_zb + exp(u)/2")}};
    CHECK(verify_solution_formula(minus, data, tol, s).pass);
    CHECK(verify_restricted_holomorphy(parse("u_zz - u_z^2/2"), minus, data, s));
    CHECK(verify_restricted_holomorphy(parse("u_zz - u_z^2/2"), plus, data, s));
    CHECK_FALSE(verify_restricted_holomorphy(parse("u_z"), minus, data, s));

    SolutionFormula eb2{{"f"}, {{"U", parse("f1 - (f - f~)/(z - z~)")}}, {}, {parse("U_b - U~/(z - z~)")}};
    CHECK(verify_solution_formula(eb2, data, tol, s).pass);
    CHECK(verify_restricted_holomorphy(parse("U_z + U/(z - z~)"), eb2, data, s));

    SolutionFormula ben{{"f"}, {{"W", parse("-2*f1/(f - f~)")}}, {parse("f1"), parse("f - f~")}, {parse("W_b - W*W~/2")}};
    CHECK(verify_solution_formula(ben, data, tol, s).pass);
    CHECK(verify_restricted_holomorphy(parse("W_z/W - W/2"), ben, data, s));

    std::vector<DataSample> pairs = {{{"f", parse("z^2")}, {"g", parse("exp(z)")}}, {{"f", parse("1/(z - 2)")}, {"g", parse("z^4")}}};
    SolutionFormula bh{{"f", "g"}, {{"u", parse("(g + z~*f + g~ + z*f~)/2")}}, {}, {parse("u_zzbb"), parse("u - u~")}};
    CHECK(verify_solution_formula(bh, pairs, tol, s).pass);
    SolutionFormula not_bh = bh;
    not_bh.fields["u"] = parse("(g + z~^2*f + g~ + z^2*f~)/2");
    CHECK_FALSE(verify_solution_formula(not_bh, pairs, tol, s).pass);

    // A constant datum kills the guard f1 != 0 everywhere.
    ResidualReport skipped = verify_solution_formula(minus, samples({"1", "z^2"}), tol, s);
    CHECK(skipped.skipped_samples == 1);
    CHECK(skipped.pass);
    ResidualReport none = verify_solution_formula(minus, samples({"1"}), tol, s);
    CHECK_FALSE(none.pass);
}

TEST_CASE("Schwarzian") {
    Settings s;
    ChartPtr plane = plane_chart({parse("z + 3")});
    CHECK(is_zero(schwarzian(plane->parse("(2*z + 1)/(z + 3)")), plane->domain(), s).zero);
    CHECK(is_zero(schwarzian(plane->parse("exp(z)")) + Expr(Coef(Rational(1, 2))), plane->domain(), s).zero);
    CHECK(verify_schwarzian(samples({"(2*z + 1)/(z + 3)", "z^3 + z", "exp(2*z)", "tan(z)"}), s));
}
