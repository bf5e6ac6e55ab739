#pragma once

// Real orthonormal spherical harmonics of degree l <= 5, represented as
// Cartesian solid harmonics (homogeneous harmonic polynomials). No
// Condon-Shortley phase. Storage index of (l, m) is l*l + l + m.

#include <array>
#include <cstddef>
#include <vector>

#include "stochfem/geometry.hpp"

namespace stochfem {

inline constexpr int kMaxHarmonicDegree = 5;
inline constexpr int kHarmonicCount = (kMaxHarmonicDegree + 1) * (kMaxHarmonicDegree + 1);

constexpr int harmonic_index(int l, int m) { return l * l + l + m; }

/// Polynomial in (x, y, z) of total degree <= 5, dense coefficient storage.
class Polynomial3 {
public:
    static constexpr int kDegree = kMaxHarmonicDegree;

    double& coeff(int a, int b, int c) { return c_[a][b][c]; }
    double coeff(int a, int b, int c) const { return c_[a][b][c]; }

    Polynomial3& operator+=(const Polynomial3& other);
    Polynomial3& operator*=(double s);
    friend Polynomial3 operator*(const Polynomial3& p, const Polynomial3& q);
    friend Polynomial3 operator*(double s, Polynomial3 p) { return p *= s; }
    friend Polynomial3 operator+(Polynomial3 p, const Polynomial3& q) { return p += q; }

    static Polynomial3 constant(double v);
    static Polynomial3 monomial(int a, int b, int c, double v = 1.0);

    double operator()(const Vec3& x) const;

private:
    double c_[kDegree + 1][kDegree + 1][kDegree + 1] = {};
};

/// The 36 real solid harmonics R_l^m with R_l^m|_{S^2} = Y_l^m.
const std::array<Polynomial3, kHarmonicCount>& real_solid_harmonics();

/// Value, gradient and Hessian of an ambient function at a point.
struct PolyJet {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();
    Mat3 hessian = Mat3::Zero();
};

/// A polynomial of degree <= 5 stored as dense coefficient vectors over
/// the graded monomial basis, together with its first and second partial
/// derivatives, for fast evaluation.
class CompiledPolynomial {
public:
    static constexpr int kMonomials = 56;          // degree <= 5
    static constexpr int kGradientMonomials = 35;  // degree <= 4
    static constexpr int kHessianMonomials = 20;   // degree <= 3

    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial3& p);

    double value(const Vec3& x) const;
    /// Returns the value and writes the gradient.
    double value_gradient(const Vec3& x, Vec3& gradient) const;
    PolyJet jet(const Vec3& x) const;
    /// Number of non-zero monomial coefficients.
    std::size_t term_count() const { return terms_; }

private:
    std::array<double, kMonomials> value_{};
    std::array<double, kGradientMonomials> dx_{}, dy_{}, dz_{};
    std::array<double, kHessianMonomials> dxx_{}, dyy_{}, dzz_{}, dxy_{}, dxz_{}, dyz_{};
    std::size_t terms_ = 0;
};

} // namespace stochfem
