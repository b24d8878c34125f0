#pragma once

#include <vector>

#include "netwave/errors.hpp"
#include "netwave/matrix.hpp"
#include "netwave/rational.hpp"

namespace netwave {

template <typename S>
struct MatrixTuple {
    std::vector<Mat<S>> A;  // N matrices, shared dimension d

    int size() const { return static_cast<int>(A.size()); }
    int dim() const { return A.empty() ? 0 : A.front().dim(); }
};

// Piecewise-constant, right-continuous map t -> matrix tuple with rational
// breakpoints; constant before the first and after the last breakpoint.
template <typename S>
struct SwitchingSignal {
    std::vector<Rational> breakpoints;      // strictly increasing
    std::vector<MatrixTuple<S>> values;     // breakpoints.size() + 1 tuples

    static SwitchingSignal constant(MatrixTuple<S> tuple) {
        SwitchingSignal s;
        s.values.push_back(std::move(tuple));
        return s;
    }

    void validate() const {
        if (values.empty()) throw InvalidInput("signal: needs at least one value");
        if (values.size() != breakpoints.size() + 1)
            throw InvalidInput("signal: value count must be breakpoint count + 1");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i - 1] < breakpoints[i]))
                throw InvalidInput("signal: breakpoints must be strictly increasing");
        const int N = values.front().size(), d = values.front().dim();
        for (const auto& v : values) {
            if (v.size() != N) throw InvalidInput("signal: tuple length varies across intervals");
            for (const auto& m : v.A)
                if (m.dim() != d) throw InvalidInput("signal: matrix dimension varies");
        }
    }

    int num_delays() const { return values.front().size(); }
    int dim() const { return values.front().dim(); }

    const MatrixTuple<S>& at(const Rational& t) const {
        // right-continuous: value index = #breakpoints <= t
        std::size_t lo = 0, hi = breakpoints.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (breakpoints[mid] <= t) lo = mid + 1;
            else hi = mid;
        }
        return values[lo];
    }

    const Mat<S>& coeff(int j, const Rational& t) const { return at(t).A[j]; }

    // A(. + tau)
    SwitchingSignal shifted(const Rational& tau) const {
        SwitchingSignal s = *this;
        for (auto& b : s.breakpoints) b -= tau;
        return s;
    }

    // (e^{mu L_1} A_1, ..., e^{mu L_N} A_N) with exact per-delay factors.
    SwitchingSignal scaled(const std::vector<double>& factors) const
        requires std::is_same_v<S, std::complex<double>>
    {
        SwitchingSignal s = *this;
        for (auto& tuple : s.values)
            for (int j = 0; j < tuple.size(); ++j) tuple.A[j] = scale(tuple.A[j], factors[j]);
        return s;
    }
};

using CSignal = SwitchingSignal<std::complex<double>>;
using QSignal = SwitchingSignal<CxRational>;

}  // namespace netwave
