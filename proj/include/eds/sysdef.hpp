#pragma once

#include <optional>

#include "eds/extension.hpp"
#include "eds/report.hpp"

namespace eds {

// Malformed system-definition text; message carries the line number.
struct DefinitionError : Error {
    using Error::Error;
};

struct ExpectLine {
    std::string kind;
    std::string args;
    int line = 0;
    bool long_only = false;
};

struct GroupSpec {
    std::vector<std::string> coords;
    ExprMatrix matrix;
    std::vector<ExprMatrix> basis;
};

struct CoframeSpec {
    CoframeSet coframe;
    std::string adjust;                   // "", "imaginary", "polarize"
    std::vector<std::string> invariants;  // for polarize
    ExprMatrix r, s;                      // empty: identity / solved
};

struct SolutionSpec {
    SolutionFormula formula;
    std::vector<DataSample> samples;
    std::optional<Expr> xi;
    double tol = 1e-8;
    int points = 20;
};

struct SystemDef {
    std::string name;
    std::string ref;  // where the expected facts come from
    ChartPtr chart;
    std::map<std::string, Form> forms;
    std::map<std::string, VectorField> fields;
    std::vector<Form> system;  // I
    std::vector<Form> holo;    // H: holomorphic system carrying the action
    std::vector<VectorField> dplus;
    std::optional<CoframeSpec> coframe;
    ChartPtr ext_chart;  // group and extension chart; defaults to chart
    std::optional<GroupSpec> group;
    std::vector<Form> psi, eta;
    std::optional<JetSpec> jet;
    std::vector<VectorField> action;
    std::vector<std::string> action_names;
    std::optional<SolutionSpec> solution;
    std::vector<ExpectLine> expects;
};

SystemDef parse_system(const std::string& text);
// Throws DefinitionError when the file cannot be read.
SystemDef load_system(const std::string& path);

enum Stage : unsigned {
    StageCheck = 1,
    StageFlags = 2,
    StageVessiot = 4,
    StageExtend = 8,
    StageSolve = 16,
    StageAll = 31,
};

struct RunOptions {
    Settings settings;
    unsigned stages = StageAll;
    bool long_stage = false;
    std::optional<std::string> basepoint;  // overrides the coframe basepoint
};

// Runs every expect line that belongs to the selected stages.
Report run_system(const SystemDef& def, const RunOptions& opt);

}  // namespace eds
