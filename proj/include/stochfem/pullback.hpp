#pragma once

// Closed-form pull-back coefficients of the domain-mapping reformulation:
// surface diffusion tensor and area element for graph-like surfaces, the
// pulled-back unit normal, the bulk metric, the conormal factor on the
// boundary and the pulled-back extended Weingarten map.

#include "stochfem/geometry.hpp"
#include "stochfem/random_field.hpp"

namespace stochfem {

inline constexpr double kSingularThreshold = 1e-8;

template <int Dim>
struct SurfaceCoefficients {
    Mat<Dim> D = Mat<Dim>::Identity();     // sqrt_g * G^{-1}
    Mat<Dim> G_inv = Mat<Dim>::Identity();
    Mat<Dim> A = Mat<Dim>::Identity();     // (I + h H)^{-1}
    double sqrt_g = 1.0;
};

struct BulkCoefficients {
    Mat2 D_bulk = Mat2::Identity();        // sqrt_g * G^{-1}
    Mat2 G_inv = Mat2::Identity();
    double sqrt_g = 1.0;
};

struct ConormalFactor {
    double ratio = 1.0;                    // sqrt(g) / sqrt(g_Gamma0)
    Vec2 vec = Vec2::Zero();               // ratio * G^{-1} nu
};

/// Graph-case closed forms from the height value h and its tangential
/// gradient at the reference point p.
template <int Dim>
SurfaceCoefficients<Dim> surface_coefficients_from_height(const Vec<Dim>& p, const HeightValue<Dim>& height);

SurfaceCoefficients<3> surface_coefficients(const Vec3& p, const SurfaceHeightSample& s);
SurfaceCoefficients<2> surface_coefficients(const Vec2& p, const BoundaryHeightSample& s);

/// nu^Gamma∘phi = (nu - A grad h) / |nu - A grad h|.
template <int Dim>
Vec<Dim> pulled_normal_from_height(const Vec<Dim>& p, const HeightValue<Dim>& height);

Vec3 pulled_normal(const Vec3& p, const SurfaceHeightSample& s);
Vec2 pulled_normal(const Vec2& p, const BoundaryHeightSample& s);

/// Throws SingularGeometry unless det J > kSingularThreshold.
BulkCoefficients bulk_coefficients_from_jacobian(const Mat2& J);
BulkCoefficients bulk_coefficients(const Vec2& x, const BoundaryHeightSample& s);

ConormalFactor conormal_factor(const Vec2& p, const BoundaryHeightSample& s);

/// -B^{-T} L B^{-1} with B = grad phi + (nu^Gamma∘phi) (x) nu and
/// L_ij = (nu^Gamma∘phi) . D_i D_j phi.
Mat3 weingarten_pullback(const Vec3& p, const SurfaceHeightSample& s);
Mat2 weingarten_pullback(const Vec2& p, const BoundaryHeightSample& s);

/// Tangential gradient of phi(x) = x + h(x) nu(x) on the reference surface.
template <int Dim>
Mat<Dim> surface_map_gradient(const Vec<Dim>& p, const HeightValue<Dim>& height);

} // namespace stochfem
