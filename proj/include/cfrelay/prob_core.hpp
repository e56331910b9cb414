#pragma once

// Dense probability tensors over named finite-alphabet variables, and the
// information measures (in bits) evaluated on them.
//
// Storage is row-major with vars[0] slowest. Every reduction sums in a fixed
// order (ascending flat index, pairwise within each output cell), so results
// are bit-reproducible for identical inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfrelay/error.hpp"

namespace cfrelay {

enum class Role { source_input, relay_input, dest_output, relay_output, compressed };

struct VarId {
    std::string name;
    Role role = Role::source_input;
    int index = 0; // relay index; 0 for X and Y
    int cardinality = 1;

    static VarId source(int card) { return {"X", Role::source_input, 0, card}; }
    static VarId dest(int card) { return {"Y", Role::dest_output, 0, card}; }
    static VarId relay_input(int i, int card) {
        return {"X" + std::to_string(i), Role::relay_input, i, card};
    }
    static VarId relay_output(int i, int card) {
        return {"Y" + std::to_string(i), Role::relay_output, i, card};
    }
    static VarId compressed(int i, int card) {
        return {"Yhat" + std::to_string(i), Role::compressed, i, card};
    }

    // Identity is (role, index); name and cardinality are descriptive.
    friend bool operator==(const VarId& a, const VarId& b) {
        return a.role == b.role && a.index == b.index;
    }
};

using VarSet = std::vector<VarId>;

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline bool var_in(const VarSet& set, const VarId& v) {
    return std::find(set.begin(), set.end(), v) != set.end();
}

inline bool disjoint(const VarSet& a, const VarSet& b) {
    return std::none_of(a.begin(), a.end(), [&](const VarId& v) { return var_in(b, v); });
}

inline VarSet join(const VarSet& a, const VarSet& b) {
    VarSet out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace detail

class ProbTensor {
public:
    ProbTensor() = default;

    ProbTensor(VarSet vars, std::vector<double> values)
        : vars_(std::move(vars)), values_(std::move(values)) {
        std::size_t expected = 1;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].cardinality < 1)
                throw ShapeError("variable " + vars_[i].name + " has cardinality < 1");
            for (std::size_t j = 0; j < i; ++j)
                if (vars_[j] == vars_[i])
                    throw VariableError("variable " + vars_[i].name + " listed twice");
            expected *= static_cast<std::size_t>(vars_[i].cardinality);
        }
        if (values_.size() != expected)
            throw ShapeError("tensor has " + std::to_string(values_.size()) +
                             " entries, variables require " + std::to_string(expected));
        for (std::size_t k = 0; k < values_.size(); ++k)
            if (!(values_[k] >= 0.0) || !std::isfinite(values_[k]))
                throw StochasticityError("negative or non-finite tensor entry", k, values_[k]);
        mass_ = detail::pairwise_sum(values_);
    }

    const VarSet& vars() const noexcept { return vars_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double mass() const noexcept { return mass_; }
    double operator[](std::size_t k) const { return values_[k]; }

    // Position of v in vars(), or -1.
    int axis_of(const VarId& v) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == v)
                return static_cast<int>(i);
        return -1;
    }

    bool has(const VarId& v) const { return axis_of(v) >= 0; }

private:
    VarSet vars_;
    std::vector<double> values_;
    double mass_ = 0.0;
};

inline ProbTensor tensor_product(const ProbTensor& a, const ProbTensor& b) {
    if (!detail::disjoint(a.vars(), b.vars()))
        throw VariableError("tensor_product: operands share a variable");
    std::vector<double> out;
    out.reserve(a.size() * b.size());
    for (double pa : a.values())
        for (double pb : b.values())
            out.push_back(pa * pb);
    return ProbTensor(detail::join(a.vars(), b.vars()), std::move(out));
}

// Sums out every variable not in keep. The result lists the kept variables in
// the order they appear in t.
inline ProbTensor marginalize(const ProbTensor& t, const VarSet& keep) {
    for (const VarId& v : keep)
        if (!t.has(v))
            throw VariableError("marginalize: unknown variable " + v.name);

    const VarSet& vars = t.vars();
    const std::size_t rank = vars.size();
    VarSet kept;
    std::vector<std::size_t> out_stride(rank, 0);
    for (std::size_t i = 0; i < rank; ++i)
        if (detail::var_in(keep, vars[i]))
            kept.push_back(vars[i]);
    if (kept.size() == rank)
        return t;

    std::size_t out_size = 1;
    for (std::size_t i = rank; i-- > 0;) {
        if (detail::var_in(keep, vars[i])) {
            out_stride[i] = out_size;
            out_size *= static_cast<std::size_t>(vars[i].cardinality);
        }
    }

    // Output cell of every flat index, walking a mixed-radix counter.
    std::vector<std::size_t> cell(t.size());
    std::vector<int> digit(rank, 0);
    std::size_t target = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        cell[k] = target;
        for (std::size_t i = rank; i-- > 0;) {
            if (++digit[i] < vars[i].cardinality) {
                target += out_stride[i];
                break;
            }
            target -= out_stride[i] * static_cast<std::size_t>(digit[i] - 1);
            digit[i] = 0;
        }
    }

    // Bucket contributions by cell, keeping ascending flat order, then sum each bucket pairwise.
    std::vector<std::size_t> offset(out_size + 1, 0);
    for (std::size_t c : cell)
        ++offset[c + 1];
    std::partial_sum(offset.begin(), offset.end(), offset.begin());
    std::vector<double> staged(t.size());
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (std::size_t k = 0; k < t.size(); ++k)
        staged[fill[cell[k]]++] = t[k];

    std::vector<double> out(out_size);
    const std::span<const double> all(staged);
    for (std::size_t c = 0; c < out_size; ++c)
        out[c] = detail::pairwise_sum(all.subspan(offset[c], offset[c + 1] - offset[c]));
    return ProbTensor(std::move(kept), std::move(out));
}

namespace detail {

inline void require_normalized(const ProbTensor& t, const char* op) {
    if (std::abs(t.mass() - 1.0) > 1e-9)
        throw NormalizationError(std::string(op) + ": tensor mass " + std::to_string(t.mass()) +
                                 " is not 1");
}

} // namespace detail

// H(A|B) in bits. Terms with p(a,b) = 0 contribute nothing.
inline double conditional_entropy(const ProbTensor& t, const VarSet& a, const VarSet& b) {
    if (!detail::disjoint(a, b))
        throw VariableError("conditional_entropy: conditioned and conditioning sets overlap");
    detail::require_normalized(t, "conditional_entropy");
    if (a.empty())
        return 0.0;

    const ProbTensor joint = marginalize(t, detail::join(a, b));
    const ProbTensor cond = marginalize(joint, b);

    // joint keeps t's order; b's cells are obtained by zeroing the strides of a's axes.
    const VarSet& vars = joint.vars();
    const std::size_t rank = vars.size();
    std::vector<std::size_t> cond_stride(rank, 0);
    std::size_t stride = 1;
    for (std::size_t i = rank; i-- > 0;) {
        if (detail::var_in(b, vars[i])) {
            cond_stride[i] = stride;
            stride *= static_cast<std::size_t>(vars[i].cardinality);
        }
    }

    double h = 0.0;
    std::vector<int> digit(rank, 0);
    std::size_t c = 0;
    for (std::size_t k = 0; k < joint.size(); ++k) {
        const double pab = joint[k];
        if (pab > 0.0)
            h += pab * std::log2(cond[c] / pab);
        for (std::size_t i = rank; i-- > 0;) {
            if (++digit[i] < vars[i].cardinality) {
                c += cond_stride[i];
                break;
            }
            c -= cond_stride[i] * static_cast<std::size_t>(digit[i] - 1);
            digit[i] = 0;
        }
    }
    return h;
}

inline double entropy(const ProbTensor& t, const VarSet& a) { return conditional_entropy(t, a, {}); }

// I(A;B|C) = H(A|C) - H(A|B,C), clamped at zero.
inline double conditional_mutual_information(const ProbTensor& t, const VarSet& a,
                                             const VarSet& b, const VarSet& c) {
    if (!detail::disjoint(a, b) || !detail::disjoint(a, c) || !detail::disjoint(b, c))
        throw VariableError("conditional_mutual_information: variable sets overlap");
    const double value =
        conditional_entropy(t, a, c) - conditional_entropy(t, a, detail::join(b, c));
    return std::max(0.0, value);
}

inline double mutual_information(const ProbTensor& t, const VarSet& a, const VarSet& b) {
    return conditional_mutual_information(t, a, b, {});
}

} // namespace cfrelay
