#pragma once

#include <Eigen/Dense>

#include "eds/chart.hpp"

namespace eds {

using Matrix = Eigen::MatrixXcd;
using ExprMatrix = std::vector<std::vector<Expr>>;

// Evaluates a matrix of expressions at chart points.
class MatrixFn {
public:
    MatrixFn(const ChartPtr& c, const ExprMatrix& m);
    bool operator()(const Point& p, Matrix& out) const;
    // scale receives the largest intermediate magnitude.
    bool operator()(const Point& p, Matrix& out, double& scale) const;
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    ChartPtr chart_;
    std::size_t rows_, cols_;
    std::shared_ptr<Tape> tape_;
};

// Singular values at or below rel_tol * max(largest, scale) count as zero.
int numeric_rank(const Matrix& m, double rel_tol, double scale = 0);

struct RankCertificate {
    int rank = 0;
    std::vector<Point> points;
    std::vector<int> ranks;  // per point, before any resampling
};

// Rank at three sample points. A lone low point is resampled; a persistent
// disagreement raises NonGeneric.
RankCertificate certified_rank(const ChartPtr& c, const ExprMatrix& rows, const Settings& s, std::uint64_t stream = 0);

// Three admissible points where every entry of m evaluates.
std::vector<Point> certificate_points(const ChartPtr& c, const ExprMatrix& m, const Settings& s,
                                      std::uint64_t stream = 0);

// Right null space of m (vectors v with m v = 0), by Gauss-Jordan over the
// expression field. Pivots are chosen where the evaluated entry is non-zero
// at all certificate points, preferring the smallest expression.
ExprMatrix kernel(const ChartPtr& c, const ExprMatrix& m, const Settings& s, std::uint64_t stream = 0);

// Inverse of a square matrix, symbolically; NonGeneric when singular.
ExprMatrix inverse(const ChartPtr& c, const ExprMatrix& m, const Settings& s, std::uint64_t stream = 0);

enum class Variance { Forms, Fields };

// Span of one-forms or vector fields with a certified independent generator list.
struct SubBundle {
    ChartPtr chart;
    Variance variance = Variance::Forms;
    std::vector<Form> forms;
    std::vector<VectorField> fields;

    std::size_t rank() const { return variance == Variance::Forms ? forms.size() : fields.size(); }
    ExprMatrix rows() const;
};

// Keeps an independent subset of the generators (first-come order).
SubBundle make_bundle(const ChartPtr& c, const std::vector<Form>& gens, const Settings& s);
SubBundle make_bundle(const ChartPtr& c, const std::vector<VectorField>& gens, const Settings& s);

SubBundle conj(const SubBundle& b);
int span_rank(const std::vector<const SubBundle*>& parts, const Settings& s);
// Generic rank of A + B, A and B both forms or both fields.
int sum_rank(const SubBundle& a, const SubBundle& b, const Settings& s);
int intersection_rank(const SubBundle& a, const SubBundle& b, const Settings& s);
bool contains(const SubBundle& a, const SubBundle& b, const Settings& s);
bool same_span(const SubBundle& a, const SubBundle& b, const Settings& s);
bool contains_form(const SubBundle& a, const Form& f, const Settings& s);
bool contains_field(const SubBundle& a, const VectorField& x, const Settings& s);

SubBundle annihilator(const SubBundle& b, const Settings& s);

struct FlagReport {
    std::vector<int> ranks;
    std::vector<SubBundle> stages;
    int stabilization = 0;  // first index k with stage k == stage k+1
    const SubBundle& terminal() const { return stages.back(); }
};

// {θ in I : dθ ≡ 0 mod I}. `annihilated` may supply ann(I) to skip one
// elimination.
SubBundle derived_system(const SubBundle& forms, const Settings& s, const SubBundle* annihilated = nullptr);
FlagReport terminal_derived(const SubBundle& forms, const Settings& s, const SubBundle* annihilated = nullptr);
FlagReport bracket_flag(const SubBundle& fields, const Settings& s);

// {X in ann(I) : X ⌟ dM ≡ 0 mod I} for M ⊆ I.
SubBundle cauchy_characteristics(const SubBundle& m, const SubBundle& i, const Settings& s);

// Rank of the polar equations {θ, X ⌟ Ω} at one point.
int polar_rank(const SubBundle& i, const std::vector<Form>& two_forms, const Point& p, const std::vector<cd>& x,
               const Settings& s);
// True when the polar rank at X drops below its value for generic real
// directions of ann(I) at p.
bool is_singular_integral_element(const SubBundle& i, const std::vector<Form>& two_forms, const Point& p,
                                  const std::vector<cd>& x, const Settings& s);

// Frame-vector components of a combination of fields at a point.
std::vector<cd> field_at(const VectorField& x, const Point& p);

}  // namespace eds
