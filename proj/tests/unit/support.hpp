#pragma once

// Helpers shared by the unit tests: random points and finite-difference
// oracles that do not go through the code under test.

#include <cmath>
#include <random>
#include <vector>

#include "stochfem/geometry.hpp"

namespace stochfem::oracle {

inline std::vector<Vec3> sphere_points(int n, unsigned seed = 1)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Vec3> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Vec3 v(g(rng), g(rng), g(rng));
        if (v.norm() > 1e-3) pts.push_back(v.normalized());
    }
    return pts;
}

inline std::vector<Vec2> circle_points(int n, unsigned seed = 1)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = u(rng);
        pts.emplace_back(std::cos(t), std::sin(t));
    }
    return pts;
}

/// Points with r_min < |x| < r_max in the plane.
inline std::vector<Vec2> annulus_points(int n, double r_min, double r_max, unsigned seed = 1)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> r(r_min, r_max);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double a = t(rng), s = r(rng);
        pts.emplace_back(s * std::cos(a), s * std::sin(a));
    }
    return pts;
}

/// Central-difference Jacobian of a map R^Dim -> R^Dim.
template <int Dim, class F>
Mat<Dim> fd_jacobian(F&& f, const Vec<Dim>& x, double eta = 1e-5)
{
    Mat<Dim> J;
    for (int j = 0; j < Dim; ++j) {
        Vec<Dim> xp = x, xm = x;
        xp[j] += eta;
        xm[j] -= eta;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * eta);
    }
    return J;
}

/// Tangential gradient (as a Dim x Dim map, zero on the normal) of a
/// vector-valued surface function, by differences along the tangent frame.
template <int Dim, class F>
Mat<Dim> fd_surface_gradient(F&& f, const Vec<Dim>& p, double eta = 1e-5)
{
    const auto frame = tangent_frame<Dim>(p);
    Mat<Dim> out = Mat<Dim>::Zero();
    for (int k = 0; k < Dim - 1; ++k) {
        const Vec<Dim> t = frame.col(k);
        const Vec<Dim> d = (f(closest_point<Dim>(p + eta * t)) - f(closest_point<Dim>(p - eta * t))) / (2.0 * eta);
        out += d * t.transpose();
    }
    return out;
}

} // namespace stochfem::oracle
