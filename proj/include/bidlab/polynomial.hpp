#pragma once

#include <cstddef>
#include <vector>

namespace bidlab {

/// Dense polynomial in the monomial basis, c[j] * s^j. Coefficient-level
/// integration and differentiation are exact, which keeps the delay-ODE
/// identity at roundoff level.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

    int degree() const { return static_cast<int>(c.size()) - 1; }

    double operator()(double s) const {
        double v = 0.0;
        for (size_t j = c.size(); j-- > 0;) v = v * s + c[j];
        return v;
    }

    double derivative_at(double s) const {
        double v = 0.0;
        for (size_t j = c.size(); j-- > 1;) v = v * s + c[j] * static_cast<double>(j);
        return v;
    }

    /// Antiderivative with zero constant term.
    Poly antiderivative() const {
        Poly p;
        p.c.resize(c.size() + 1, 0.0);
        for (size_t j = 0; j < c.size(); ++j) p.c[j + 1] = c[j] / static_cast<double>(j + 1);
        return p;
    }

    double integral(double s0, double s1) const {
        Poly p = antiderivative();
        return p(s1) - p(s0);
    }

    Poly scaled(double a) const {
        Poly p = *this;
        for (double& x : p.c) x *= a;
        return p;
    }

    Poly& operator+=(const Poly& other) {
        if (other.c.size() > c.size()) c.resize(other.c.size(), 0.0);
        for (size_t j = 0; j < other.c.size(); ++j) c[j] += other.c[j];
        return *this;
    }
};

}  // namespace bidlab
