#pragma once

// Truncated Taylor series f(x0 + t) = sum_k c[k] t^k, k = 0..degree.
// The coefficient type may be a scalar, an Eigen vector or an Eigen matrix;
// products between different coefficient types go through jet_product().

#include <algorithm>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace esov {

using cplx = std::complex<double>;

template <class T>
struct Jet {
    std::vector<T> c;

    Jet() = default;
    explicit Jet(std::vector<T> coeffs) : c(std::move(coeffs)) {}

    int degree() const { return static_cast<int>(c.size()) - 1; }
    const T& operator[](std::size_t k) const { return c[k]; }
    T& operator[](std::size_t k) { return c[k]; }

    Jet truncated(int deg) const
    {
        if (deg > degree())
            throw std::invalid_argument("Jet::truncated: degree too high");
        return Jet(std::vector<T>(c.begin(), c.begin() + deg + 1));
    }

    // d/dt, loses one order of accuracy.
    Jet derivative() const
    {
        if (c.size() < 2)
            throw std::invalid_argument("Jet::derivative: degree 0 jet");
        std::vector<T> out;
        out.reserve(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k)
            out.push_back(c[k] * static_cast<double>(k));
        return Jet(std::move(out));
    }

    // t -> -t
    Jet reflected() const
    {
        Jet out = *this;
        for (std::size_t k = 1; k < c.size(); k += 2)
            out.c[k] = -out.c[k];
        return out;
    }

    Jet& operator+=(const Jet& o)
    {
        const int d = std::min(degree(), o.degree());
        c.resize(d + 1);
        for (int k = 0; k <= d; ++k)
            c[k] = c[k] + o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        const int d = std::min(degree(), o.degree());
        c.resize(d + 1);
        for (int k = 0; k <= d; ++k)
            c[k] = c[k] - o.c[k];
        return *this;
    }
    template <class S>
    Jet& operator*=(const S& s)
    {
        for (auto& x : c)
            x = x * s;
        return *this;
    }
};

template <class T>
Jet<T> operator+(Jet<T> a, const Jet<T>& b) { return a += b; }
template <class T>
Jet<T> operator-(Jet<T> a, const Jet<T>& b) { return a -= b; }
template <class T>
Jet<T> operator*(Jet<T> a, cplx s) { return a *= s; }
template <class T>
Jet<T> operator*(cplx s, Jet<T> a) { return a *= s; }

// Cauchy product truncated to the smaller degree. R is the stored result
// type, so Eigen expression templates get evaluated.
template <class R, class A, class B>
Jet<R> jet_product(const Jet<A>& a, const Jet<B>& b)
{
    const int d = std::min(a.degree(), b.degree());
    std::vector<R> out;
    out.reserve(d + 1);
    for (int k = 0; k <= d; ++k) {
        R acc = a.c[0] * b.c[k];
        for (int i = 1; i <= k; ++i)
            acc += a.c[i] * b.c[k - i];
        out.push_back(std::move(acc));
    }
    return Jet<R>(std::move(out));
}

using ScalarJet = Jet<cplx>;

inline ScalarJet operator*(const ScalarJet& a, const ScalarJet& b)
{
    return jet_product<cplx>(a, b);
}

inline ScalarJet operator/(const ScalarJet& a, const ScalarJet& b)
{
    if (b.c.empty() || b.c[0] == cplx(0.0))
        throw std::domain_error("ScalarJet division by a jet vanishing at the base point");
    const int d = std::min(a.degree(), b.degree());
    std::vector<cplx> q(d + 1);
    for (int k = 0; k <= d; ++k) {
        cplx acc = a.c[k];
        for (int i = 1; i <= k; ++i)
            acc -= b.c[i] * q[k - i];
        q[k] = acc / b.c[0];
    }
    return ScalarJet(std::move(q));
}

inline ScalarJet constant_jet(cplx v, int degree)
{
    std::vector<cplx> c(degree + 1, cplx(0.0));
    c[0] = v;
    return ScalarJet(std::move(c));
}

// exp(mu * (x0 + t)) as a jet in t.
inline ScalarJet exp_jet(cplx mu, cplx x0, int degree)
{
    std::vector<cplx> c(degree + 1);
    c[0] = std::exp(mu * x0);
    for (int k = 1; k <= degree; ++k)
        c[k] = c[k - 1] * mu / static_cast<double>(k);
    return ScalarJet(std::move(c));
}

template <class T>
Jet<T> scale_constant(const ScalarJet& s, const T& m)
{
    std::vector<T> c;
    c.reserve(s.c.size());
    for (const auto& x : s.c)
        c.push_back(x * m);
    return Jet<T>(std::move(c));
}

inline cplx eval_jet(const ScalarJet& j, cplx t)
{
    cplx acc = 0.0;
    for (int k = j.degree(); k >= 0; --k)
        acc = acc * t + j.c[k];
    return acc;
}

} // namespace esov
