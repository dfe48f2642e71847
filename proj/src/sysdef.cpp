#include "eds/sysdef.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace eds {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

unsigned stage_of(const std::string& kind);

// Split at sep outside parentheses.
std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

using Defines = std::vector<std::pair<std::string, std::string>>;

// Whole-identifier textual substitution of the [define] macros.
std::string expand(const std::string& text, const Defines& defs) {
    if (defs.empty()) return text;
    std::string out;
    for (std::size_t i = 0; i < text.size();) {
        if (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_') {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            std::string id = text.substr(i, j - i);
            bool hit = false;
            for (const auto& [name, body] : defs)
                if (name == id) {
                    out += "(" + body + ")";
                    hit = true;
                    break;
                }
            if (!hit) out += id;
            i = j;
        } else {
            out += text[i++];
        }
    }
    return out;
}

struct Line {
    std::string text;
    int no = 0;
};

// "key: value" or "key = value"; returns false when sep is absent.
bool key_value(const std::string& text, char sep, std::string& key, std::string& value) {
    std::size_t k = text.find(sep);
    if (k == std::string::npos) return false;
    key = trim(text.substr(0, k));
    value = trim(text.substr(k + 1));
    return !key.empty();
}

[[noreturn]] void fail(const Line& l, const std::string& what) {
    throw DefinitionError("line " + std::to_string(l.no) + ": " + what);
}

ExprMatrix parse_matrix(const ChartPtr& c, const std::string& text) {
    ExprMatrix m;
    for (const std::string& row : split(text, ';')) {
        std::vector<Expr> r;
        for (const std::string& e : split(row, ',')) r.push_back(c->parse(e));
        if (!m.empty() && r.size() != m[0].size()) throw Error("ragged matrix");
        m.push_back(r);
    }
    return m;
}

std::vector<Form> parse_forms(const ChartPtr& c, const std::string& text, const std::map<std::string, Form>& named) {
    std::vector<Form> out;
    for (const std::string& f : split(text, ';'))
        if (!f.empty()) out.push_back(parse_form(c, f, named));
    return out;
}

}  // namespace

SystemDef parse_system(const std::string& text) {
    std::map<std::string, std::vector<Line>> sections;
    static const std::vector<std::string> known{"system", "coords", "guards", "define", "forms",  "fields",   "dplus",
                                                "coframe", "group", "extension", "jet", "action", "solution", "expect"};
    std::string current;
    std::istringstream is(text);
    std::string raw;
    int no = 0;
    while (std::getline(is, raw)) {
        ++no;
        std::size_t hash = raw.find('#');
        std::string t = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (t.empty()) continue;
        if (t.front() == '[' && t.back() == ']') {
            current = t.substr(1, t.size() - 2);
            if (std::find(known.begin(), known.end(), current) == known.end())
                fail(Line{t, no}, "unknown section [" + current + "]");
            continue;
        }
        if (current.empty()) fail(Line{t, no}, "text before the first section");
        sections[current].push_back(Line{t, no});
    }

    SystemDef def;
    Defines defs;
    std::string key, value;
    auto lines = [&](const std::string& s) -> const std::vector<Line>& {
        static const std::vector<Line> none;
        auto it = sections.find(s);
        return it == sections.end() ? none : it->second;
    };
    // Runs body for each line, turning library errors into line-numbered ones.
    auto each = [&](const std::string& s, const std::function<void(const Line&)>& body) {
        for (const Line& l : lines(s)) {
            try {
                body(l);
            } catch (const DefinitionError&) {
                throw;
            } catch (const std::exception& e) {
                fail(l, e.what());
            }
        }
    };

    each("system", [&](const Line& l) {
        if (!key_value(l.text, ':', key, value)) fail(l, "expected 'name:' or 'ref:'");
        if (key == "name")
            def.name = value;
        else if (key == "ref")
            def.ref = value;
        else
            fail(l, "unknown key " + key);
    });

    std::string decl;
    for (const Line& l : lines("coords")) decl += (decl.empty() ? "" : "; ") + l.text;
    if (decl.empty()) throw DefinitionError("missing [coords]");
    each("define", [&](const Line& l) {
        if (!key_value(l.text, '=', key, value)) fail(l, "expected 'name = expression'");
        defs.emplace_back(key, expand(value, defs));
    });
    std::vector<std::string> guards;
    for (const Line& l : lines("guards")) guards.push_back(expand(l.text, defs));
    try {
        def.chart = make_chart(decl, guards);
    } catch (const std::exception& e) {
        throw DefinitionError(std::string("[coords]/[guards]: ") + e.what());
    }
    const ChartPtr& c = def.chart;

    each("forms", [&](const Line& l) {
        std::string body = expand(l.text, defs);
        if (body.rfind("I:", 0) == 0 || body.rfind("H:", 0) == 0) {
            std::vector<Form>& dst = body[0] == 'I' ? def.system : def.holo;
            for (const std::string& f : split(body.substr(2), ','))
                if (!f.empty()) dst.push_back(parse_form(c, f, def.forms));
            return;
        }
        if (!key_value(body, '=', key, value)) fail(l, "expected 'name = form', 'I: ...' or 'H: ...'");
        def.forms[key] = parse_form(c, value, def.forms);
    });

    each("fields", [&](const Line& l) {
        if (!key_value(expand(l.text, defs), '=', key, value)) fail(l, "expected 'name = field'");
        def.fields[key] = parse_field(c, value, def.fields);
    });
    each("dplus", [&](const Line& l) { def.dplus.push_back(parse_field(c, expand(l.text, defs), def.fields)); });

    if (!lines("coframe").empty()) {
        CoframeSpec cs;
        cs.coframe.chart = c;
        each("coframe", [&](const Line& l) {
            if (!key_value(l.text, ':', key, value)) fail(l, "expected 'key: value'");
            value = expand(value, defs);
            if (key == "basepoint")
                cs.coframe.base = parse_basepoint(c, value);
            else if (key == "theta")
                cs.coframe.theta.push_back(parse_form(c, value, def.forms));
            else if (key == "eta")
                cs.coframe.eta.push_back(parse_form(c, value, def.forms));
            else if (key == "sigma")
                cs.coframe.sigma.push_back(parse_form(c, value, def.forms));
            else if (key == "adjust") {
                std::vector<std::string> w = words(value);
                if (w.empty() || (w[0] != "imaginary" && w[0] != "polarize")) fail(l, "adjust is 'imaginary' or 'polarize <coords>'");
                cs.adjust = w[0];
                cs.invariants.assign(w.begin() + 1, w.end());
            } else if (key == "R")
                cs.r = parse_matrix(c, value);
            else if (key == "S")
                cs.s = parse_matrix(c, value);
            else
                fail(l, "unknown key " + key);
        });
        if (cs.coframe.theta.empty()) throw DefinitionError("[coframe] needs theta lines");
        def.coframe = cs;
    }

    def.ext_chart = c;
    std::string ext_decl;
    std::vector<std::string> ext_guards;
    for (const Line& l : lines("extension")) {
        if (!key_value(l.text, ':', key, value)) fail(l, "expected 'key: value'");
        if (key == "coords") ext_decl += (ext_decl.empty() ? "" : "; ") + value;
        if (key == "guard") ext_guards.push_back(expand(value, defs));
    }
    if (!ext_decl.empty()) {
        try {
            def.ext_chart = make_chart(ext_decl, ext_guards);
        } catch (const std::exception& e) {
            throw DefinitionError(std::string("[extension] chart: ") + e.what());
        }
    }
    each("extension", [&](const Line& l) {
        key_value(l.text, ':', key, value);
        if (key == "psi")
            def.psi.push_back(parse_form(def.ext_chart, expand(value, defs)));
        else if (key == "eta")
            def.eta.push_back(parse_form(def.ext_chart, expand(value, defs)));
        else if (key != "coords" && key != "guard")
            fail(l, "unknown key " + key);
    });

    if (!lines("group").empty()) {
        GroupSpec g;
        each("group", [&](const Line& l) {
            if (!key_value(l.text, ':', key, value)) fail(l, "expected 'key: value'");
            if (key == "coords")
                g.coords = words(value);
            else if (key == "matrix")
                g.matrix = parse_matrix(def.ext_chart, expand(value, defs));
            else if (key == "basis")
                for (const std::string& m : split(value, '|')) g.basis.push_back(parse_matrix(def.ext_chart, m));
            else
                fail(l, "unknown key " + key);
        });
        if (g.coords.empty() || g.matrix.empty() || g.basis.empty()) throw DefinitionError("[group] needs coords, matrix and basis");
        def.group = g;
    }

    if (!lines("jet").empty()) {
        JetSpec j;
        each("jet", [&](const Line& l) {
            if (!key_value(l.text, ':', key, value)) fail(l, "expected 'key: value'");
            if (key == "independent")
                j.independent = value;
            else if (key == "chain")
                j.chains.push_back(words(value));
            else if (key == "total")
                j.total = parse_field(c, expand(value, defs), def.fields);
            else
                fail(l, "unknown key " + key);
        });
        if (!j.total.chart()) throw DefinitionError("[jet] needs a total derivative");
        def.jet = j;
    }

    each("action", [&](const Line& l) {
        if (!key_value(expand(l.text, defs), '=', key, value)) fail(l, "expected 'Z1 = field'");
        VectorField z;
        if (value.rfind("prolong ", 0) == 0) {
            if (!def.jet) fail(l, "prolong needs a [jet] section");
            z = prolong_contact_vf(parse_field(c, value.substr(8), def.fields), *def.jet);
        } else {
            z = parse_field(c, value, def.fields);
        }
        def.action.push_back(z);
        def.action_names.push_back(key);
        def.fields[key] = z;
    });

    if (!lines("solution").empty()) {
        SolutionSpec sol;
        each("solution", [&](const Line& l) {
            // no macro expansion: formulas live on the plane, not on the chart
            if (!key_value(l.text, ':', key, value)) fail(l, "expected 'key: value'");
            if (key == "data") {
                sol.formula.data = words(value);
            } else if (key == "field") {
                std::string name, e;
                if (!key_value(value, '=', name, e)) fail(l, "expected 'field: u = expression'");
                sol.formula.fields[name] = parse(e);
            } else if (key == "guard") {
                sol.formula.guards.push_back(parse(value));
            } else if (key == "pde") {
                sol.formula.residuals.push_back(parse(value));
            } else if (key == "xi") {
                sol.xi = parse(value);
            } else if (key == "sample") {
                DataSample d;
                for (const std::string& part : split(value, ';')) {
                    std::string name, e;
                    if (!key_value(part, '=', name, e)) fail(l, "expected 'sample: f = ...; g = ...'");
                    d[name] = parse(e);
                }
                sol.samples.push_back(d);
            } else if (key == "tol") {
                sol.tol = std::stod(value);
            } else if (key == "points") {
                sol.points = std::stoi(value);
            } else {
                fail(l, "unknown key " + key);
            }
        });
        def.solution = sol;
    }

    for (const Line& l : lines("expect")) {
        ExpectLine e;
        e.line = l.no;
        std::string t = l.text;
        if (t.rfind("long ", 0) == 0) {
            e.long_only = true;
            t = trim(t.substr(5));
        }
        std::size_t sp = t.find(' ');
        e.kind = t.substr(0, sp);
        if (stage_of(e.kind) == 0) fail(l, "unknown expectation " + e.kind);
        e.args = sp == std::string::npos ? "" : expand(trim(t.substr(sp + 1)), defs);
        def.expects.push_back(e);
    }
    if (def.name.empty()) def.name = "system";
    return def;
}

SystemDef load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DefinitionError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str());
}

namespace {

unsigned stage_of(const std::string& kind) {
    static const std::map<std::string, unsigned> table{
        {"elliptic", StageCheck},        {"decomposable", StageCheck},     {"darboux", StageCheck},
        {"invariant", StageCheck},       {"not-invariant", StageCheck},    {"normal", StageCheck},
        {"symbol", StageCheck},          {"span", StageCheck},             {"identity", StageCheck},
        {"zero", StageCheck},            {"dflag", StageFlags},            {"vrank", StageFlags},
        {"dplus-terminal", StageFlags},  {"one-adapted", StageVessiot},    {"vessiot", StageVessiot},
        {"constants", StageVessiot},     {"killing", StageVessiot},        {"isomorphic", StageVessiot},
        {"pmatrix", StageVessiot},       {"kinv", StageVessiot},           {"smatrix", StageVessiot},
        {"omega", StageVessiot},         {"group-model", StageExtend},     {"action-constants", StageExtend},
        {"action-killing", StageExtend}, {"action-isomorphic", StageExtend}, {"symmetry", StageExtend},
        {"transverse", StageExtend},     {"g-invariant", StageExtend},     {"not-g-invariant", StageExtend},
        {"k-invariant", StageExtend},    {"prolongs", StageExtend},        {"extension", StageExtend},
        {"extension-span", StageExtend}, {"solution", StageSolve},         {"holomorphic-xi", StageSolve},
        {"not-holomorphic-xi", StageSolve}, {"schwarzian", StageSolve},
    };
    auto it = table.find(kind);
    return it == table.end() ? 0u : it->second;
}

StructureConstants standard_algebra(const std::string& name) {
    StructureConstants c(3);
    if (name == "sl2") {
        c.set(0, 0, 1, 1);
        c.set(1, 0, 2, 1);
        c.set(2, 1, 2, 1);
    } else if (name == "su2") {
        c.set(0, 1, 2, 1);
        c.set(1, 2, 0, 1);
        c.set(2, 0, 1, 1);
    } else if (name != "abelian3") {
        throw Error("unknown algebra " + name + " (sl2, su2, abelian3)");
    }
    return c;
}

std::vector<int> ints(const std::string& s) {
    std::vector<int> out;
    for (const std::string& w : words(s)) out.push_back(std::stoi(w));
    return out;
}

Json json_ints(const std::vector<int>& v) { return Json(v); }

// Chart expression where Name[e] (or Name~[e]) applies the named field to e.
Expr field_expr(const ChartPtr& c, std::string text, const std::map<std::string, VectorField>& fields) {
    std::map<std::string, Expr> slots;
    for (;;) {
        std::size_t close = text.find(']');
        if (close == std::string::npos) break;
        std::size_t open = text.rfind('[', close);
        if (open == std::string::npos) throw Error("unbalanced ]");
        std::size_t end = open;
        bool bar = end > 0 && text[end - 1] == '~';
        if (bar) --end;
        std::size_t start = end;
        while (start > 0 && ident_char(text[start - 1])) --start;
        auto it = fields.find(text.substr(start, end - start));
        if (it == fields.end()) throw Error("no field named '" + text.substr(start, end - start) + "'");
        Expr inner = c->bind(substitute(parse(text.substr(open + 1, close - open - 1)), slots));
        std::string slot = "slot_" + std::to_string(slots.size());
        slots[slot] = (bar ? conj(it->second) : it->second).apply(inner);
        text = text.substr(0, start) + slot + text.substr(close + 1);
    }
    return c->bind(substitute(parse(text), slots));
}

class Runner {
public:
    Runner(const SystemDef& d, const RunOptions& o) : def_(d), opt_(o), s_(o.settings) {
        rep_.system = d.name;
        rep_.seed = s_.seed;
    }

    Report run() {
        if ((opt_.stages & StageFlags) && opt_.stages == StageFlags) flag_table();
        for (const ExpectLine& e : def_.expects) {
            unsigned st = stage_of(e.kind);
            if (!(st & opt_.stages) || (e.long_only && !opt_.long_stage)) continue;
            std::size_t before = rep_.checks.size();
            try {
                dispatch(e);
            } catch (const NonGeneric& x) {
                rep_.checks.resize(before);
                Check& c = add(e, false);
                c.witnesses.push_back(std::string("non-generic: ") + x.what());
                nongeneric_ = true;
            } catch (const DefinitionError&) {
                throw;
            } catch (const std::exception& x) {
                rep_.checks.resize(before);
                add(e, false).witnesses.push_back(x.what());
            }
        }
        if (nongeneric_) rep_.facts["non_generic"] = true;
        return rep_;
    }

private:
    const SystemDef& def_;
    const RunOptions& opt_;
    const Settings& s_;
    Report rep_;
    bool nongeneric_ = false;

    std::optional<SubBundle> system_;
    std::optional<EllipticStructure> es_;
    std::optional<DIReport> di_;
    std::optional<Adjusted> adjusted_;
    std::optional<VessiotReport> vessiot_;
    std::optional<LieGroupModel> group_;
    std::optional<ExtensionReport> ext_;
    std::optional<StructureConstants> action_c_;

    Check& add(const ExpectLine& e, bool pass, const std::string& suffix = {}) {
        std::string name = e.kind + (e.args.empty() ? "" : " " + e.args) + suffix;
        return rep_.add(name, pass, def_.ref);
    }

    const SubBundle& system() {
        if (!system_) {
            if (def_.system.empty()) throw Error("no system I: in [forms]");
            system_ = make_bundle(def_.chart, def_.system, s_);
        }
        return *system_;
    }

    const EllipticStructure& es() {
        if (!es_) {
            if (def_.dplus.empty()) throw Error("no [dplus]");
            SubBundle dp = make_bundle(def_.chart, def_.dplus, s_);
            es_ = def_.system.empty() ? check_elliptic(dp, s_) : check_elliptic(dp, s_, &system());
        }
        return *es_;
    }

    const DIReport& di() {
        if (!di_) {
            if (!es().elliptic()) throw Error("not elliptic");
            di_ = check_darboux(es(), s_);
            rep_.facts["darboux_integrable"] = di_->integrable;
            rep_.facts["q"] = di_->q;
            rep_.facts["classification"] = to_string(di_->classification);
        }
        return *di_;
    }

    CoframeSet base_coframe() {
        if (!def_.coframe) throw Error("no [coframe]");
        CoframeSet cf = def_.coframe->coframe;
        if (opt_.basepoint) cf.base = parse_basepoint(cf.chart, *opt_.basepoint);
        return cf;
    }

    const Adjusted& adjusted() {
        if (!adjusted_) {
            CoframeSet cf = base_coframe();
            const std::string& how = def_.coframe->adjust;
            if (how == "imaginary")
                adjusted_ = adapt_imaginary_at_point(cf, s_);
            else if (how == "polarize")
                adjusted_ = polarize_normalize(cf, def_.coframe->invariants, s_);
            else
                adjusted_ = Adjusted{cf, identity_matrix(cf.n()), identity_matrix(cf.n())};
        }
        return *adjusted_;
    }

    const VessiotReport& vessiot() {
        if (!vessiot_) vessiot_ = verify_vessiot(adjusted().coframe, s_);
        return *vessiot_;
    }

    ExprMatrix s_matrix() {
        if (!def_.coframe->s.empty()) return def_.coframe->s;
        return solve_s_semisimple(vessiot(), def_.chart, s_);
    }

    const LieGroupModel& group() {
        if (!group_) {
            if (!def_.group) throw Error("no [group]");
            group_ = matrix_group(def_.ext_chart, def_.group->coords, def_.group->matrix, def_.group->basis, s_);
        }
        return *group_;
    }

    const ExtensionReport& extension() {
        if (!ext_) {
            if (def_.psi.empty()) throw Error("no psi in [extension]");
            ext_ = build_extension(group(), def_.psi, def_.eta, s_);
        }
        return *ext_;
    }

    const StructureConstants& action_constants() {
        if (!action_c_) {
            if (def_.action.empty()) throw Error("no [action]");
            action_c_ = extract_constants(def_.action, s_);
        }
        return *action_c_;
    }

    SubBundle holo() {
        if (def_.holo.empty()) throw Error("no H: in [forms]");
        return make_bundle(def_.chart, def_.holo, s_);
    }

    const SolutionSpec& solution() {
        if (!def_.solution) throw Error("no [solution]");
        return *def_.solution;
    }

    void certificates(const ExpectLine& e, const std::vector<Certificate>& cs) {
        for (const Certificate& c : cs) {
            Check& ch = add(e, c.pass, ": " + c.name);
            if (!c.pass) ch.witnesses.push_back(c.witness);
        }
    }

    void flag_table() {
        if (!def_.system.empty()) {
            FlagReport f = terminal_derived(system(), s_);
            rep_.add("derived flag of I", true, def_.ref).ranks = {{"ranks", json_ints(f.ranks)}};
        }
        if (!def_.dplus.empty()) {
            const EllipticStructure& x = es();
            rep_.add("bracket flag of D", true, def_.ref).ranks = {{"ranks", json_ints(x.dist_flag.ranks)}};
            FlagReport f = bracket_flag(x.dplus, s_);
            rep_.add("bracket flag of D+", true, def_.ref).ranks = {{"ranks", json_ints(f.ranks)}};
        }
    }

    void algebra_checks(const ExpectLine& e, const StructureConstants& c) {
        std::vector<std::string> w = words(e.args);
        if (e.kind == "killing" || e.kind == "action-killing") {
            AlgebraInvariants a = algebra_invariants(c);
            std::vector<int> want = ints(e.args);
            std::vector<int> got{a.positive, a.negative, a.null};
            add(e, want == got).ranks = {{"signature", json_ints(got)}};
        } else {
            if (w.size() != 2) throw Error("expected '<algebra> yes|no'");
            Verdict v = algebras_isomorphic_lowdim(c, standard_algebra(w[0]));
            add(e, to_string(v) == w[1]).witnesses.push_back("verdict " + to_string(v));
        }
    }

    void dispatch(const ExpectLine& e) {
        const ChartPtr& c = def_.chart;
        const std::string& k = e.kind;
        if (k == "elliptic") {
            const EllipticStructure& x = es();
            Check& ch = add(e, x.elliptic());
            for (const Clause& cl : x.clauses)
                if (!cl.pass) ch.witnesses.push_back(cl.name + ": " + cl.witness);
            ch.ranks = {{"D", x.dist.rank()}, {"D+", x.dplus.rank()}, {"V", x.v.rank()}};
        } else if (k == "decomposable") {
            add(e, check_decomposable(es(), s_));
        } else if (k == "darboux") {
            const DIReport& r = di();
            std::map<std::string, std::string> want;
            for (const std::string& w : words(e.args)) {
                std::size_t eq = w.find('=');
                if (eq == std::string::npos) throw Error("expected key=value in darboux");
                want[w.substr(0, eq)] = w.substr(eq + 1);
            }
            std::map<std::string, std::string> got{{"m", std::to_string(r.m)},         {"d", std::to_string(r.d)},
                                                   {"q", std::to_string(r.q)},         {"n", std::to_string(r.n)},
                                                   {"numeta", std::to_string(r.numeta)}, {"class", to_string(r.classification)}};
            bool ok = r.integrable;
            Check& ch = add(e, false);
            for (const auto& [key, v] : want) {
                auto it = got.find(key);
                if (it == got.end()) throw Error("unknown darboux key " + key);
                if (it->second != v) {
                    ok = false;
                    ch.witnesses.push_back(key + " is " + it->second);
                }
            }
            if (!r.integrable) ch.witnesses.push_back("not Darboux integrable");
            ch.pass = ok;
            ch.ranks = {{"m", r.m}, {"d", r.d}, {"q", r.q}, {"n", r.n}, {"numeta", r.numeta}};
            if (r.integrable) {
                bool bounds = r.d <= r.q && 2 * r.q <= r.m && r.numeta == r.q - r.d;
                rep_.add("rank bounds d <= q <= m/2, numeta = q - d", bounds, def_.ref);
                rep_.add("form and field Darboux tests agree", r.form_test == r.field_test, def_.ref);
            }
        } else if (k == "dflag") {
            std::vector<int> got = es().dist_flag.ranks;
            add(e, got == ints(e.args)).ranks = {{"ranks", json_ints(got)}};
        } else if (k == "vrank") {
            int got = static_cast<int>(es().v.rank());
            add(e, got == std::stoi(e.args)).ranks = {{"V", got}};
        } else if (k == "dplus-terminal") {
            std::vector<int> got = di().dplus_flag.ranks;
            add(e, !got.empty() && got.back() == std::stoi(e.args)).ranks = {{"ranks", json_ints(got)}};
        } else if (k == "invariant" || k == "not-invariant") {
            bool inv = verify_darboux_invariant(c->parse(e.args), es(), s_);
            add(e, inv == (k == "invariant"));
        } else if (k == "normal") {
            add(e, is_normal(es(), s_));
        } else if (k == "symbol") {
            SymbolReport r = conformal_symbol(system(), s_);
            add(e, to_string(r.type) == e.args).witnesses.push_back("type " + to_string(r.type));
        } else if (k == "span") {
            std::string which, list;
            if (!key_value(e.args, '=', which, list)) throw Error("expected 'span V|Vinf|I|H = forms'");
            SubBundle want = make_bundle(c, parse_forms(c, list, def_.forms), s_);
            SubBundle got = which == "V"      ? es().v
                            : which == "Vinf" ? di().v_flag.terminal()
                            : which == "I"    ? system()
                            : which == "H"    ? holo()
                                              : throw Error("unknown bundle " + which);
            add(e, same_span(got, want, s_)).ranks = {{which, got.rank()}};
        } else if (k == "identity" || k == "zero") {
            Expr x;
            if (k == "identity") {
                std::size_t p = e.args.find("==");
                if (p == std::string::npos) throw Error("expected 'lhs == rhs'");
                x = field_expr(c, e.args.substr(0, p), def_.fields) - field_expr(c, e.args.substr(p + 2), def_.fields);
            } else {
                x = field_expr(c, e.args, def_.fields);
            }
            ZeroCertificate z = is_zero(x, c->domain(), s_);
            Check& ch = add(e, z.zero);
            if (!z.zero) ch.witnesses.push_back("nonzero at a sample point");
        } else if (k == "one-adapted") {
            CoframeSet cf = base_coframe();
            AdaptedReport a = verify_one_adapted(cf, s_, def_.system.empty() || def_.dplus.empty() ? nullptr : &es());
            add(e, a.pass).witnesses = a.failures;
        } else if (k == "vessiot") {
            const VessiotReport& v = vessiot();
            Check& ch = add(e, v.pass && v.constants.jacobi());
            ch.witnesses = v.failures;
            if (!v.constants.jacobi()) ch.witnesses.push_back("constants fail the Jacobi identity");
            ch.ranks = {{"n", v.constants.n}};
            rep_.facts["constants"] = v.constants.table();
        } else if (k == "constants") {
            const VessiotReport& v = vessiot();
            std::vector<std::string> got = v.constants.table();
            bool ok = e.args == "zero" ? v.constants.zero() : got == split(e.args, ';');
            Check& ch = add(e, ok);
            if (!ok) ch.witnesses = got;
        } else if (k == "killing" || k == "isomorphic") {
            algebra_checks(e, vessiot().constants);
        } else if (k == "pmatrix") {
            add(e, same_matrix(c, vessiot().p, parse_matrix(c, e.args), s_));
        } else if (k == "kinv") {
            add(e, same_matrix(c, adjusted().k_inv, parse_matrix(c, e.args), s_));
        } else if (k == "smatrix") {
            add(e, same_matrix(c, solve_s_semisimple(vessiot(), c, s_), parse_matrix(c, e.args), s_));
        } else if (k == "omega") {
            const VessiotReport& v = vessiot();
            const CoframeSet& cf = adjusted().coframe;
            ExprMatrix r = def_.coframe->r.empty() ? identity_matrix(cf.n()) : def_.coframe->r;
            OmegaReport o = build_omega(cf, v.constants, v.p, r, s_matrix(), s_);
            bool ok = o.pass;
            Check& ch = add(e, false);
            ch.witnesses = o.failures;
            if (!e.args.empty() && !same_forms(o.omega, parse_forms(c, e.args, def_.forms), s_)) {
                ok = false;
                ch.witnesses.push_back("omega differs from the expected forms");
            }
            ch.pass = ok;
        } else if (k == "group-model") {
            certificates(e, verify_group_model(group(), s_));
        } else if (k == "action-constants") {
            const StructureConstants& ac = action_constants();
            std::vector<Certificate> cs = verify_action(def_.action, ac, s_);
            cs.push_back(Certificate{"Jacobi", ac.jacobi(), ac.jacobi() ? "" : "constants fail the Jacobi identity"});
            std::vector<std::string> got = ac.table();
            bool same = e.args.empty() || (e.args == "zero" ? ac.zero() : got == split(e.args, ';'));
            std::string table;
            for (const std::string& t : got) table += (table.empty() ? "" : "; ") + t;
            cs.push_back(Certificate{"table", same, same ? "" : "extracted " + table});
            certificates(e, cs);
        } else if (k == "action-killing" || k == "action-isomorphic") {
            algebra_checks(e, action_constants());
        } else if (k == "symmetry") {
            Certificate x = verify_symmetry(def_.action, holo(), s_);
            Check& ch = add(e, x.pass);
            if (!x.pass) ch.witnesses.push_back(x.witness);
        } else if (k == "transverse") {
            Certificate x = check_transversality(def_.action, holo(), s_);
            Check& ch = add(e, x.pass);
            if (!x.pass) ch.witnesses.push_back(x.witness);
        } else if (k == "g-invariant" || k == "not-g-invariant") {
            bool inv = verify_invariant(c->parse(e.args), def_.action, InvarianceMode::Real, s_);
            add(e, inv == (k == "g-invariant"));
        } else if (k == "k-invariant") {
            add(e, verify_invariant(c->parse(e.args), def_.action, InvarianceMode::Holomorphic, s_));
        } else if (k == "prolongs") {
            std::size_t p = e.args.find("->");
            if (p == std::string::npos || !def_.jet) throw Error("expected 'prolongs field -> field' and a [jet]");
            VectorField got = prolong_contact_vf(parse_field(c, e.args.substr(0, p), def_.fields), *def_.jet);
            VectorField want = parse_field(c, e.args.substr(p + 2), def_.fields);
            add(e, is_zero((got - want).coefs(), c->domain(), s_).zero);
        } else if (k == "extension") {
            certificates(e, extension().checks);
        } else if (k == "extension-span") {
            const ExtensionReport& x = extension();
            SubBundle want = make_bundle(def_.ext_chart, parse_forms(def_.ext_chart, e.args, def_.ext_chart == c ? def_.forms : std::map<std::string, Form>{}), s_);
            add(e, same_span(x.h, want, s_)).ranks = {{"H", x.h.rank()}};
        } else if (k == "solution") {
            const SolutionSpec& sol = solution();
            ResidualReport r = verify_solution_formula(sol.formula, sol.samples, sol.tol, s_, sol.points);
            Check& ch = add(e, r.pass);
            ch.ranks = {{"points", r.points}, {"skipped_samples", r.skipped_samples}, {"max_residual", r.max_residual},
                        {"tol", sol.tol}};
            ch.witnesses = r.notes;
        } else if (k == "holomorphic-xi" || k == "not-holomorphic-xi") {
            const SolutionSpec& sol = solution();
            Expr xi = e.args.empty() ? (sol.xi ? *sol.xi : throw Error("no xi in [solution]")) : parse(e.args);
            bool h = verify_restricted_holomorphy(xi, sol.formula, sol.samples, s_);
            add(e, h == (k == "holomorphic-xi"));
        } else if (k == "schwarzian") {
            add(e, verify_schwarzian(solution().samples, s_));
        }
    }
};

}  // namespace

Report run_system(const SystemDef& def, const RunOptions& opt) { return Runner(def, opt).run(); }

}  // namespace eds
