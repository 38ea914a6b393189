#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "odekit/errors.hpp"

namespace odekit {

/// Runge-Kutta coefficients with an optional embedding d (the lower-order
/// companion weights used for error estimation). Only explicit and
/// diagonally implicit layouts are supported: A must be (strictly) lower
/// triangular.
struct ButcherTable {
    std::string name;
    int stages = 0;
    std::vector<double> a; // row-major stages x stages
    std::vector<double> b, c, d;
    int order = 0;
    int embedding_order = 0;

    bool empty() const { return stages == 0; }
    double A(int i, int j) const {
        return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(stages) +
                 static_cast<std::size_t>(j)];
    }

    bool is_explicit() const {
        for (int i = 0; i < stages; ++i)
            for (int j = i; j < stages; ++j)
                if (A(i, j) != 0.0) return false;
        return true;
    }
    bool is_diagonally_implicit() const {
        bool any_diag = false;
        for (int i = 0; i < stages; ++i) {
            for (int j = i + 1; j < stages; ++j)
                if (A(i, j) != 0.0) return false;
            if (A(i, i) != 0.0) any_diag = true;
        }
        return any_diag;
    }

    /// Structural validation: shapes, lower-triangularity, and the row-sum
    /// consistency c_i = sum_j A_ij.
    void validate() const {
        if (stages < 1) throw config_error("ButcherTable: need at least one stage");
        const auto s = static_cast<std::size_t>(stages);
        if (a.size() != s * s || b.size() != s || c.size() != s)
            throw config_error("ButcherTable '" + name + "': inconsistent sizes");
        if (!d.empty() && d.size() != s)
            throw config_error("ButcherTable '" + name + "': embedding size mismatch");
        for (int i = 0; i < stages; ++i)
            for (int j = i + 1; j < stages; ++j)
                if (A(i, j) != 0.0)
                    throw config_error("ButcherTable '" + name +
                                       "': upper-triangular entry");
        for (int i = 0; i < stages; ++i) {
            double row = 0.0;
            for (int j = 0; j < stages; ++j) row += A(i, j);
            if (std::abs(row - c[static_cast<std::size_t>(i)]) > 1e-12)
                throw config_error("ButcherTable '" + name + "': row-sum mismatch");
        }
    }

    /// Numeric check of the order conditions up to the claimed orders
    /// (quadrature conditions through order 3).
    void verify_order_conditions() const {
        auto check = [this](double got, double want, const std::string& what) {
            if (std::abs(got - want) > 1e-12)
                throw config_error("ButcherTable '" + name + "': order condition " +
                                   what + " violated");
        };
        auto weighted = [this](const std::vector<double>& w, int cpow) {
            double s = 0.0;
            for (int i = 0; i < stages; ++i)
                s += w[static_cast<std::size_t>(i)] *
                     std::pow(c[static_cast<std::size_t>(i)], cpow);
            return s;
        };
        check(weighted(b, 0), 1.0, "sum b = 1");
        if (order >= 2) check(weighted(b, 1), 0.5, "b.c = 1/2");
        if (order >= 3) {
            check(weighted(b, 2), 1.0 / 3.0, "b.c^2 = 1/3");
            double bac = 0.0;
            for (int i = 0; i < stages; ++i)
                for (int j = 0; j < stages; ++j)
                    bac += b[static_cast<std::size_t>(i)] * A(i, j) *
                           c[static_cast<std::size_t>(j)];
            check(bac, 1.0 / 6.0, "b.A.c = 1/6");
        }
        if (!d.empty()) {
            check(weighted(d, 0), 1.0, "sum d = 1");
            if (embedding_order >= 2) check(weighted(d, 1), 0.5, "d.c = 1/2");
        }
    }
};

/// An additively partitioned pair sharing stage count and abscissae.
struct ImexTables {
    ButcherTable expl;
    ButcherTable impl;

    void validate() const {
        expl.validate();
        impl.validate();
        if (!expl.is_explicit())
            throw config_error("ImexTables: explicit part is not explicit");
        if (!impl.is_diagonally_implicit())
            throw config_error("ImexTables: implicit part is not diagonally implicit");
        if (expl.stages != impl.stages)
            throw config_error("ImexTables: stage count mismatch");
        for (int i = 0; i < expl.stages; ++i)
            if (std::abs(expl.c[static_cast<std::size_t>(i)] -
                         impl.c[static_cast<std::size_t>(i)]) > 1e-12)
                throw config_error("ImexTables: abscissae mismatch");
    }

    /// Third-order coupling conditions for the shared-b additive pair.
    void verify_order_conditions() const {
        expl.verify_order_conditions();
        impl.verify_order_conditions();
        for (const auto* part : {&expl, &impl}) {
            double bac = 0.0;
            for (int i = 0; i < part->stages; ++i)
                for (int j = 0; j < part->stages; ++j)
                    bac += expl.b[static_cast<std::size_t>(i)] * part->A(i, j) *
                           expl.c[static_cast<std::size_t>(j)];
            if (std::abs(bac - 1.0 / 6.0) > 1e-12)
                throw config_error("ImexTables: coupling condition b.A.c violated");
        }
    }
};

namespace tables {

/// Heun-Euler 2(1) explicit pair.
inline ButcherTable heun_euler() {
    ButcherTable t;
    t.name = "heun_euler_2_1_2";
    t.stages = 2;
    t.a = {0.0, 0.0, /**/ 1.0, 0.0};
    t.b = {0.5, 0.5};
    t.c = {0.0, 1.0};
    t.d = {1.0, 0.0};
    t.order = 2;
    t.embedding_order = 1;
    return t;
}

/// Bogacki-Shampine 3(2), four stages.
inline ButcherTable erk_3_2_4() {
    ButcherTable t;
    t.name = "bogacki_shampine_3_2_4";
    t.stages = 4;
    t.a = {0.0,       0.0,       0.0,       0.0, //
           0.5,       0.0,       0.0,       0.0, //
           0.0,       0.75,      0.0,       0.0, //
           2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0};
    t.b = {2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0};
    t.c = {0.0, 0.5, 0.75, 1.0};
    t.d = {7.0 / 24.0, 0.25, 1.0 / 3.0, 0.125};
    t.order = 3;
    t.embedding_order = 2;
    return t;
}

/// Two-stage SDIRK 2(1).
inline ButcherTable sdirk_2_1_2() {
    ButcherTable t;
    t.name = "sdirk_2_1_2";
    t.stages = 2;
    t.a = {1.0, 0.0, /**/ -1.0, 1.0};
    t.b = {0.5, 0.5};
    t.c = {1.0, 0.0};
    t.d = {1.0, 0.0};
    t.order = 2;
    t.embedding_order = 1;
    return t;
}

/// Four-stage, third-order additive pair with second-order embedding
/// (the ARK3(2)4L[2]SA coefficients of Kennedy and Carpenter).
inline ImexTables ark_imex_3_2_4() {
    const double g = 1767732205903.0 / 4055673282236.0;
    ImexTables p;

    p.expl.name = "ark_3_2_4_erk";
    p.expl.stages = 4;
    p.expl.a = {
        0.0, 0.0, 0.0, 0.0, //
        2.0 * g, 0.0, 0.0, 0.0, //
        5535828885825.0 / 10492691773637.0, 788022342437.0 / 10882634858940.0, 0.0,
        0.0, //
        6485989280629.0 / 16251701735622.0, -4246266847089.0 / 9704473918619.0,
        10755448449292.0 / 10357097424841.0, 0.0};
    p.expl.b = {1471266399579.0 / 7840856788654.0, -4482444167858.0 / 7529755066697.0,
                11266239266428.0 / 11593286722821.0, g};
    p.expl.c = {0.0, 2.0 * g, 3.0 / 5.0, 1.0};
    p.expl.d = {2756255671327.0 / 12835298489170.0,
                -10771552573575.0 / 22201958757719.0,
                9247589265047.0 / 10645013368117.0, 2193209047091.0 / 5459859503100.0};
    p.expl.order = 3;
    p.expl.embedding_order = 2;

    p.impl.name = "ark_3_2_4_dirk";
    p.impl.stages = 4;
    p.impl.a = {0.0, 0.0, 0.0, 0.0, //
                g, g, 0.0, 0.0, //
                2746238789719.0 / 10658868560708.0, -640167445237.0 / 6845629431997.0,
                g, 0.0, //
                1471266399579.0 / 7840856788654.0, -4482444167858.0 / 7529755066697.0,
                11266239266428.0 / 11593286722821.0, g};
    p.impl.b = p.expl.b;
    p.impl.c = p.expl.c;
    p.impl.d = p.expl.d;
    p.impl.order = 3;
    p.impl.embedding_order = 2;
    return p;
}

/// The implicit half of the additive pair, usable as a standalone DIRK
/// method (ESDIRK: first stage explicit).
inline ButcherTable esdirk_3_2_4() {
    auto t = ark_imex_3_2_4().impl;
    t.name = "esdirk_3_2_4";
    return t;
}

/// Single-stage helpers for closed-form tests.
inline ButcherTable forward_euler() {
    ButcherTable t;
    t.name = "forward_euler";
    t.stages = 1;
    t.a = {0.0};
    t.b = {1.0};
    t.c = {0.0};
    t.order = 1;
    return t;
}

inline ButcherTable backward_euler() {
    ButcherTable t;
    t.name = "backward_euler";
    t.stages = 1;
    t.a = {1.0};
    t.b = {1.0};
    t.c = {1.0};
    t.order = 1;
    return t;
}

} // namespace tables

} // namespace odekit
