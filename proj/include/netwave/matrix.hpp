#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "netwave/errors.hpp"
#include "netwave/rational.hpp"

namespace netwave {

// Exact complex number over the rationals; used by the oracle arithmetic mode.
struct CxRational {
    Rational re{0}, im{0};

    CxRational() = default;
    CxRational(Rational r) : re(std::move(r)) {}
    CxRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    friend CxRational operator+(const CxRational& a, const CxRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend CxRational operator-(const CxRational& a, const CxRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend CxRational operator*(const CxRational& a, const CxRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    CxRational& operator+=(const CxRational& o) { re += o.re; im += o.im; return *this; }
    friend bool operator==(const CxRational& a, const CxRational& b) {
        return a.re == b.re && a.im == b.im;
    }
};

template <typename S> struct ScalarTraits;

template <> struct ScalarTraits<std::complex<double>> {
    static std::complex<double> zero() { return {0.0, 0.0}; }
    static std::complex<double> one() { return {1.0, 0.0}; }
    static std::complex<double> from_rational(const Rational& re, const Rational& im) {
        return {to_double(re), to_double(im)};
    }
};

template <> struct ScalarTraits<CxRational> {
    static CxRational zero() { return {}; }
    static CxRational one() { return {Rational(1), Rational(0)}; }
    static CxRational from_rational(const Rational& re, const Rational& im) { return {re, im}; }
};

// Small dense square matrix; scalar is std::complex<double> in production and
// CxRational in the exact oracle mode.
template <typename S>
class Mat {
  public:
    Mat() = default;
    explicit Mat(int d) : d_(d), a_(static_cast<std::size_t>(d) * d, ScalarTraits<S>::zero()) {}

    static Mat identity(int d) {
        Mat m(d);
        for (int i = 0; i < d; ++i) m(i, i) = ScalarTraits<S>::one();
        return m;
    }
    static Mat zero(int d) { return Mat(d); }

    int dim() const { return d_; }
    S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }

    Mat& operator+=(const Mat& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { a += b; return a; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        const int d = a.d_;
        Mat c(d);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) {
                const S aik = a(i, k);
                for (int j = 0; j < d; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const Mat& a, const Mat& b) { return a.d_ == b.d_ && a.a_ == b.a_; }

    std::vector<S> apply(const std::vector<S>& x) const {
        std::vector<S> y(d_, ScalarTraits<S>::zero());
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

  private:
    int d_ = 0;
    std::vector<S> a_;
};

using CMat = Mat<std::complex<double>>;
using QMat = Mat<CxRational>;
using CVec = std::vector<std::complex<double>>;

// Operator inf-norm (max absolute row sum); the norm fixed for all reported magnitudes.
inline double inf_norm(const CMat& m) {
    double best = 0.0;
    for (int i = 0; i < m.dim(); ++i) {
        double row = 0.0;
        for (int j = 0; j < m.dim(); ++j) row += std::abs(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

inline double inf_norm(const CVec& v) {
    double best = 0.0;
    for (const auto& x : v) best = std::max(best, std::abs(x));
    return best;
}

inline CMat scale(const CMat& m, double s) {
    CMat r(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) r(i, j) = m(i, j) * s;
    return r;
}

}  // namespace netwave
