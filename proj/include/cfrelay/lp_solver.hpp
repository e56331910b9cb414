#pragma once

// Small dense linear programs: maximize c.x subject to rows a.x <= b or
// a.x >= b and per-variable lower bounds. Solved with a two-phase dictionary
// simplex under Bland's rule, so identical inputs give identical pivots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cfrelay/error.hpp"

namespace cfrelay {

enum class Relation { less_equal, greater_equal };

struct LinearConstraint {
    std::vector<double> coeffs;
    Relation relation = Relation::less_equal;
    double bound = 0.0;
};

struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    std::vector<double> lower_bounds; // empty means all zero

    explicit LinearProgram(std::size_t vars = 0)
        : num_vars(vars), objective(vars, 0.0), lower_bounds(vars, 0.0) {}

    void add(std::vector<double> coeffs, Relation rel, double bound) {
        constraints.push_back({std::move(coeffs), rel, bound});
    }
    void add_le(std::vector<double> coeffs, double bound) { add(std::move(coeffs), Relation::less_equal, bound); }
    void add_ge(std::vector<double> coeffs, double bound) { add(std::move(coeffs), Relation::greater_equal, bound); }

    double lower_bound(std::size_t j) const { return lower_bounds.empty() ? 0.0 : lower_bounds[j]; }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

struct LpOutcome {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    std::vector<double> point;
    std::vector<std::size_t> active; // indices of constraints tight at point
};

struct PointCheck {
    bool feasible = false;
    double worst_violation = 0.0;
};

namespace lp_tolerance {
constexpr double pivot = 1e-10;
constexpr double feasibility = 1e-8;
} // namespace lp_tolerance

namespace detail {

inline void check_shape(const LinearProgram& lp) {
    if (lp.objective.size() != lp.num_vars)
        throw ShapeError("objective length differs from num_vars");
    if (!lp.lower_bounds.empty() && lp.lower_bounds.size() != lp.num_vars)
        throw ShapeError("lower_bounds length differs from num_vars");
    for (std::size_t j = 0; j < lp.num_vars; ++j)
        if (!std::isfinite(lp.objective[j]) || !std::isfinite(lp.lower_bound(j)))
            throw ShapeError("non-finite objective coefficient or bound");
    for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
        const auto& c = lp.constraints[r];
        if (c.coeffs.size() != lp.num_vars)
            throw ShapeError("constraint " + std::to_string(r) + " has " + std::to_string(c.coeffs.size()) +
                             " coefficients, expected " + std::to_string(lp.num_vars));
        if (!std::isfinite(c.bound) ||
            !std::all_of(c.coeffs.begin(), c.coeffs.end(), [](double v) { return std::isfinite(v); }))
            throw ShapeError("constraint " + std::to_string(r) + " has a non-finite entry");
    }
}

// Violation of a.x (rel) b, positive when violated.
inline double violation(const LinearConstraint& c, std::span<const double> x) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        lhs += c.coeffs[j] * x[j];
    return c.relation == Relation::less_equal ? lhs - c.bound : c.bound - lhs;
}

// Chvatal-style dictionary. Rows 0..m-1 hold basic variables as
//   x_B[i] = T[i][cols] - sum_j T[i][j] x_N[j]
// Row m is the phase-2 objective, row m+1 the phase-1 objective; both store
// negated reduced costs so "column j improves" <=> T[row][j] < -pivot.
// Column n is the auxiliary variable x0 (label -1). Structural variables have
// labels 0..n-1, slacks n..n+m-1.
class Dictionary {
public:
    Dictionary(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
               const std::vector<double>& c)
        : m_(a.size()), n_(c.size()), width_(n_ + 2), t_((m_ + 2) * width_, 0.0),
          basic_(m_), nonbasic_(n_ + 1) {
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j)
                at(i, j) = a[i][j];
            at(i, n_) = -1.0;
            at(i, n_ + 1) = b[i];
            basic_[i] = static_cast<long>(n_ + i);
        }
        for (std::size_t j = 0; j < n_; ++j) {
            at(m_, j) = -c[j];
            nonbasic_[j] = static_cast<long>(j);
        }
        nonbasic_[n_] = -1;
        at(m_ + 1, n_) = 1.0;
    }

    LpStatus run(std::vector<double>& x, double& value) {
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (at(i, n_ + 1) < at(r, n_ + 1))
                r = i;
        if (m_ > 0 && at(r, n_ + 1) < -lp_tolerance::feasibility) {
            pivot(r, n_);
            iterate(m_ + 1);
            if (at(m_ + 1, n_ + 1) < -lp_tolerance::feasibility)
                return LpStatus::infeasible;
            // Drive x0 out of the basis if it stayed at zero level.
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] != -1)
                    continue;
                std::size_t s = n_ + 1;
                for (std::size_t j = 0; j <= n_; ++j)
                    if (std::abs(at(i, j)) > lp_tolerance::pivot && (s > n_ || nonbasic_[j] < nonbasic_[s]))
                        s = j;
                if (s <= n_)
                    pivot(i, s);
            }
        }
        if (!iterate(m_))
            return LpStatus::unbounded;
        x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] >= 0 && static_cast<std::size_t>(basic_[i]) < n_)
                x[static_cast<std::size_t>(basic_[i])] = at(i, n_ + 1);
        value = at(m_, n_ + 1);
        return LpStatus::optimal;
    }

    double condition() const { return min_pivot_ > 0.0 ? max_entry_ / min_pivot_ : INFINITY; }

private:
    double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }

    void pivot(std::size_t r, std::size_t s) {
        const double inv = 1.0 / at(r, s);
        min_pivot_ = std::min(min_pivot_, std::abs(at(r, s)));
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r)
                continue;
            const double f = at(i, s) * inv;
            if (f == 0.0)
                continue;
            for (std::size_t j = 0; j < width_; ++j)
                if (j != s)
                    at(i, j) -= at(r, j) * f;
            at(i, s) = -f;
        }
        for (std::size_t j = 0; j < width_; ++j)
            if (j != s)
                at(r, j) *= inv;
        at(r, s) = inv;
        std::swap(basic_[r], nonbasic_[s]);
        for (double v : t_) {
            if (!std::isfinite(v))
                throw NumericalFailure("simplex produced a non-finite tableau entry", condition());
            max_entry_ = std::max(max_entry_, std::abs(v));
        }
    }

    // Bland's rule: lowest-label improving column, min ratio with lowest-label tie break.
    bool iterate(std::size_t obj_row) {
        const bool phase_two = obj_row == m_;
        while (true) {
            std::size_t s = n_ + 1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (phase_two && nonbasic_[j] == -1)
                    continue;
                if (at(obj_row, j) < -lp_tolerance::pivot && (s > n_ || nonbasic_[j] < nonbasic_[s]))
                    s = j;
            }
            if (s > n_)
                return true;
            std::size_t r = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (at(i, s) <= lp_tolerance::pivot)
                    continue;
                const double ratio = at(i, n_ + 1) / at(i, s);
                if (r == m_ || ratio < best || (ratio == best && basic_[i] < basic_[r])) {
                    r = i;
                    best = ratio;
                }
            }
            if (r == m_)
                return false;
            pivot(r, s);
        }
    }

    std::size_t m_, n_, width_;
    std::vector<double> t_;
    std::vector<long> basic_, nonbasic_;
    double max_entry_ = 0.0;
    double min_pivot_ = INFINITY;
};

} // namespace detail

inline PointCheck check_point(const LinearProgram& lp, std::span<const double> point) {
    if (point.size() != lp.num_vars)
        throw ShapeError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                         std::to_string(lp.num_vars));
    double worst = 0.0;
    for (std::size_t j = 0; j < lp.num_vars; ++j)
        worst = std::max(worst, lp.lower_bound(j) - point[j]);
    for (const auto& c : lp.constraints) {
        if (c.coeffs.size() != lp.num_vars)
            throw ShapeError("constraint row length differs from num_vars");
        worst = std::max(worst, detail::violation(c, point));
    }
    return {worst <= lp_tolerance::feasibility, worst};
}

inline LpOutcome solve(const LinearProgram& lp) {
    detail::check_shape(lp);
    const std::size_t n = lp.num_vars;

    // Canonical form over shifted variables y = x - lb >= 0, all rows "<=".
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    a.reserve(lp.constraints.size());
    b.reserve(lp.constraints.size());
    for (const auto& c : lp.constraints) {
        const double sign = c.relation == Relation::less_equal ? 1.0 : -1.0;
        std::vector<double> row(n);
        double rhs = c.bound;
        for (std::size_t j = 0; j < n; ++j) {
            rhs -= c.coeffs[j] * lp.lower_bound(j);
            row[j] = sign * c.coeffs[j];
        }
        a.push_back(std::move(row));
        b.push_back(sign * rhs);
    }

    detail::Dictionary dict(a, b, lp.objective);
    std::vector<double> y;
    double shifted_value = 0.0;
    LpOutcome out;
    out.status = dict.run(y, shifted_value);
    if (out.status != LpStatus::optimal)
        return out;

    out.point.resize(n);
    out.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.point[j] = std::max(y[j], 0.0) + lp.lower_bound(j);
        out.value += lp.objective[j] * out.point[j];
    }

    const PointCheck check = check_point(lp, out.point);
    if (check.worst_violation > 1e-6) {
        std::ostringstream msg;
        msg << "simplex optimum violates a constraint by " << check.worst_violation
            << " (tableau condition " << dict.condition() << ")";
        throw NumericalFailure(msg.str(), dict.condition());
    }
    for (std::size_t r = 0; r < lp.constraints.size(); ++r)
        if (std::abs(detail::violation(lp.constraints[r], out.point)) <= lp_tolerance::feasibility)
            out.active.push_back(r);
    return out;
}

} // namespace cfrelay
