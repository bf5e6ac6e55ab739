#pragma once

// Exact geometry of the two reference surfaces: the unit sphere in R^3 and
// the unit circle in R^2. Everything is templated on the ambient dimension;
// Dim == 3 selects the sphere and Dim == 2 the circle.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "stochfem/errors.hpp"

namespace stochfem {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

enum class SurfaceKind { UnitSphere3D, UnitCircle2D };

template <int Dim>
struct ReferenceSurface;

template <>
struct ReferenceSurface<3> {
    static constexpr SurfaceKind kind = SurfaceKind::UnitSphere3D;
    static constexpr int ambient_dim = 3;
    static constexpr int intrinsic_dim = 2;
};

template <>
struct ReferenceSurface<2> {
    static constexpr SurfaceKind kind = SurfaceKind::UnitCircle2D;
    static constexpr int ambient_dim = 2;
    static constexpr int intrinsic_dim = 1;
};

/// Fermi coordinates of a point: x = foot_point + distance * normal_at_foot.
template <int Dim>
struct FermiData {
    double distance = 0.0;
    Vec<Dim> foot_point = Vec<Dim>::Zero();
    Vec<Dim> normal_at_foot = Vec<Dim>::Zero();
};

inline constexpr double kDegenerateRadius = 1e-12;
inline constexpr double kLiftBandWidth = 0.5;
inline constexpr double kDefaultFdStep = 1e-5;

template <int Dim>
FermiData<Dim> fermi(const Vec<Dim>& x)
{
    const double r = x.norm();
    if (r < kDegenerateRadius) {
        throw DegeneratePoint("fermi: closest point of the origin is undefined");
    }
    FermiData<Dim> out;
    out.distance = r - 1.0;
    out.foot_point = x / r;
    out.normal_at_foot = out.foot_point;
    return out;
}

/// Radial projection a(x) = x / |x|.
template <int Dim>
Vec<Dim> closest_point(const Vec<Dim>& x)
{
    const double r = x.norm();
    if (r < kDegenerateRadius) {
        throw DegeneratePoint("closest_point: projection of the origin is undefined");
    }
    return x / r;
}

/// P = I - nu (x) nu for the outward unit normal nu = p.
template <int Dim>
Mat<Dim> tangent_projection(const Vec<Dim>& p)
{
    return Mat<Dim>::Identity() - p * p.transpose();
}

namespace detail {
inline void require_on_surface(double radius, const char* where)
{
    if (std::abs(radius - 1.0) > 1e-10) {
        throw std::invalid_argument(std::string(where) + ": point is not on the reference surface");
    }
}
} // namespace detail

/// Extended Weingarten map of the unit sphere/circle. All principal
/// curvatures equal one, so H = P.
template <int Dim>
Mat<Dim> weingarten(const Vec<Dim>& p)
{
    detail::require_on_surface(p.norm(), "weingarten");
    return tangent_projection<Dim>(p);
}

/// Ratio delta_h = d(sigma on the reference surface) / d(sigma on the facet)
/// under radial projection, at a point x of a flat facet with unit normal
/// facet_normal. Uses the curvatures of the level set through x, which for
/// the unit sphere/circle are 1 / (1 + d).
template <int Dim>
double lift_area_ratio(const Vec<Dim>& x, const Vec<Dim>& facet_normal)
{
    const double r = x.norm();
    const double d = r - 1.0;
    if (std::abs(d) >= kLiftBandWidth) {
        throw OutOfBand("lift_area_ratio: |d(x)| >= 0.5");
    }
    const double cos_angle = x.dot(facet_normal) / r;
    return cos_angle / std::pow(r, ReferenceSurface<Dim>::intrinsic_dim);
}

/// Central-difference tangential gradient of f∘a at a surface point p,
/// projected onto the tangent space.
template <int Dim, class F>
Vec<Dim> tangential_fd_gradient(F&& f, const Vec<Dim>& p, double step = kDefaultFdStep)
{
    if (!(step >= 1e-7 && step <= 1e-3)) {
        throw std::invalid_argument("tangential_fd_gradient: step must lie in [1e-7, 1e-3]");
    }
    Vec<Dim> g;
    for (int j = 0; j < Dim; ++j) {
        Vec<Dim> xp = p;
        Vec<Dim> xm = p;
        xp[j] += step;
        xm[j] -= step;
        g[j] = (f(closest_point<Dim>(xp)) - f(closest_point<Dim>(xm))) / (2.0 * step);
    }
    return tangent_projection<Dim>(p) * g;
}

/// Orthonormal basis of the tangent space at p (columns).
template <int Dim>
Eigen::Matrix<double, Dim, Dim - 1> tangent_frame(const Vec<Dim>& p);

template <>
inline Eigen::Matrix<double, 2, 1> tangent_frame<2>(const Vec2& p)
{
    return Vec2(-p[1], p[0]);
}

template <>
inline Eigen::Matrix<double, 3, 2> tangent_frame<3>(const Vec3& p)
{
    // Seed Gram-Schmidt with the axis least aligned with p.
    int k = 0;
    for (int j = 1; j < 3; ++j) {
        if (std::abs(p[j]) < std::abs(p[k])) {
            k = j;
        }
    }
    const Vec3 seed = Vec3::Unit(k);
    const Vec3 t1 = (seed - seed.dot(p) * p).normalized();
    const Vec3 t2 = p.cross(t1);
    Eigen::Matrix<double, 3, 2> frame;
    frame.col(0) = t1;
    frame.col(1) = t2;
    return frame;
}

} // namespace stochfem
