#pragma once

#include <random>

#include "eds/chart.hpp"

namespace eds::testing {

// Random expression over z, w, t and their conjugates.
inline Expr fuzz(std::mt19937_64& rng, int depth) {
    auto pick = [&](int n) { return static_cast<int>(rng() % n); };
    if (depth == 0 || pick(4) == 0) {
        switch (pick(6)) {
        case 0:
            return Expr::symbol("z");
        case 1:
            return conj(Expr::symbol("z"));
        case 2:
            return Expr::symbol("w");
        case 3:
            return conj(Expr::symbol("w"));
        case 4:
            return Expr::symbol("t", true);
        default:
            return Expr(Coef(Rational(pick(7) - 3, 1 + pick(3)), Rational(pick(3) - 1)));
        }
    }
    Expr a = fuzz(rng, depth - 1);
    switch (pick(9)) {
    case 0:
    case 1:
        return a + fuzz(rng, depth - 1);
    case 2:
    case 3:
        return a * fuzz(rng, depth - 1);
    case 4:
        return a / (Expr(2) + fuzz(rng, depth - 1));
    case 5:
        return pow(a, 2 + pick(2));
    case 6:
        return exp(a * Expr(Coef(Rational(1, 2))));
    case 7:
        return sin(a);
    default:
        return cos(a);
    }
}

inline Form fuzz_form(std::mt19937_64& rng, const ChartPtr& c, int degree) {
    Form f(c, degree);
    int terms = 1 + static_cast<int>(rng() % 3);
    for (int t = 0; t < terms; ++t) {
        Form::Index idx;
        for (int k = 0; k < degree; ++k) idx.push_back(static_cast<int>(rng() % c->dim()));
        f.add_term(idx, fuzz(rng, 3));
    }
    return f;
}

}  // namespace eds::testing
