#include "stochfem/pullback.hpp"

#include <cmath>
#include <string>

namespace stochfem {

namespace {

template <int Dim>
void require_unit(const Vec<Dim>& p, const char* where)
{
    if (std::abs(p.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument(std::string(where) + ": point is not on the reference surface");
    }
}

template <int Dim>
void check_offset(double h, const char* where)
{
    // Every principal curvature of the unit sphere/circle is one.
    if (1.0 + h <= kSingularThreshold) {
        throw SingularGeometry(std::string(where) + ": 1 + h*kappa is not positive");
    }
}

} // namespace

template <int Dim>
SurfaceCoefficients<Dim> surface_coefficients_from_height(const Vec<Dim>& p, const HeightValue<Dim>& height)
{
    check_offset<Dim>(height.h, "surface_coefficients");
    constexpr int n = ReferenceSurface<Dim>::intrinsic_dim;
    const double scale = 1.0 / (1.0 + height.h);
    const Mat<Dim> nn = p * p.transpose();
    SurfaceCoefficients<Dim> c;
    c.A = scale * (Mat<Dim>::Identity() - nn) + nn;
    const Vec<Dim> w = scale * height.grad; // A grad h, tangential
    const double w2 = w.squaredNorm();
    c.G_inv = c.A * (Mat<Dim>::Identity() - (w * w.transpose()) / (1.0 + w2)) * c.A;
    c.sqrt_g = std::sqrt(1.0 + w2) * std::pow(1.0 + height.h, n);
    c.D = c.sqrt_g * c.G_inv;
    return c;
}

template SurfaceCoefficients<2> surface_coefficients_from_height<2>(const Vec2&, const HeightValue<2>&);
template SurfaceCoefficients<3> surface_coefficients_from_height<3>(const Vec3&, const HeightValue<3>&);

SurfaceCoefficients<3> surface_coefficients(const Vec3& p, const SurfaceHeightSample& s)
{
    require_unit<3>(p, "surface_coefficients");
    return surface_coefficients_from_height<3>(p, eval_height(s, p));
}

SurfaceCoefficients<2> surface_coefficients(const Vec2& p, const BoundaryHeightSample& s)
{
    require_unit<2>(p, "surface_coefficients");
    return surface_coefficients_from_height<2>(p, eval_height(s, p));
}

template <int Dim>
Vec<Dim> pulled_normal_from_height(const Vec<Dim>& p, const HeightValue<Dim>& height)
{
    check_offset<Dim>(height.h, "pulled_normal");
    const Vec<Dim> v = p - height.grad / (1.0 + height.h);
    return v / v.norm();
}

template Vec2 pulled_normal_from_height<2>(const Vec2&, const HeightValue<2>&);
template Vec3 pulled_normal_from_height<3>(const Vec3&, const HeightValue<3>&);

Vec3 pulled_normal(const Vec3& p, const SurfaceHeightSample& s)
{
    require_unit<3>(p, "pulled_normal");
    return pulled_normal_from_height<3>(p, eval_height(s, p));
}

Vec2 pulled_normal(const Vec2& p, const BoundaryHeightSample& s)
{
    require_unit<2>(p, "pulled_normal");
    return pulled_normal_from_height<2>(p, eval_height(s, p));
}

BulkCoefficients bulk_coefficients_from_jacobian(const Mat2& J)
{
    const double det = J.determinant();
    // The domain map must preserve orientation; a non-positive determinant
    // means the blended boundary perturbation folds the disk.
    if (det <= kSingularThreshold) {
        throw SingularGeometry("bulk_coefficients: det grad phi = " + std::to_string(det) +
                               " (domain map folds; reduce --eps-tol or increase --delta)");
    }
    BulkCoefficients c;
    const Mat2 Jinv = J.inverse();
    c.G_inv = Jinv * Jinv.transpose();
    c.sqrt_g = std::abs(det);
    c.D_bulk = c.sqrt_g * c.G_inv;
    return c;
}

BulkCoefficients bulk_coefficients(const Vec2& x, const BoundaryHeightSample& s)
{
    if (x.norm() <= 1.0 - s.delta) return {};
    return bulk_coefficients_from_jacobian(bulk_map(s, x).jacobian);
}

ConormalFactor conormal_factor(const Vec2& p, const BoundaryHeightSample& s)
{
    require_unit<2>(p, "conormal_factor");
    const BulkCoefficients bulk = bulk_coefficients_from_jacobian(bulk_map(s, p).jacobian);
    const SurfaceCoefficients<2> surf = surface_coefficients(p, s);
    ConormalFactor out;
    out.ratio = bulk.sqrt_g / surf.sqrt_g;
    out.vec = out.ratio * (bulk.G_inv * p);
    return out;
}

template <int Dim>
Mat<Dim> surface_map_gradient(const Vec<Dim>& p, const HeightValue<Dim>& height)
{
    // P + h H + nu (x) grad h, with H = P on the unit sphere/circle.
    return (1.0 + height.h) * tangent_projection<Dim>(p) + p * height.grad.transpose();
}

template Mat2 surface_map_gradient<2>(const Vec2&, const HeightValue<2>&);
template Mat3 surface_map_gradient<3>(const Vec3&, const HeightValue<3>&);

namespace {

template <int Dim>
Mat<Dim> weingarten_pullback_impl(const Vec<Dim>& p, const HeightValue<Dim>& height, const Mat<Dim>& hess)
{
    const Vec<Dim> n = pulled_normal_from_height<Dim>(p, height);
    const Mat<Dim> P = tangent_projection<Dim>(p);
    const Vec<Dim> Pn = P * n;
    const double nn = n.dot(p);
    const Vec<Dim>& dh = height.grad;

    // (D_i D_j phi)_m = D_i h P_mj - (1+h)(P_mi nu_j + nu_m P_ij) + P_mi D_j h + nu_m D_i D_j h
    const Mat<Dim> L = dh * Pn.transpose() - (1.0 + height.h) * (Pn * p.transpose() + nn * P)
                 + Pn * dh.transpose() + nn * hess;

    const Mat<Dim> B = surface_map_gradient<Dim>(p, height) + n * p.transpose();
    const double det = B.determinant();
    if (std::abs(det) <= kSingularThreshold) {
        throw SingularGeometry("weingarten_pullback: extended tangential gradient is singular");
    }
    const Mat<Dim> Binv = B.inverse();
    return -Binv.transpose() * L * Binv;
}

} // namespace

Mat3 weingarten_pullback(const Vec3& p, const SurfaceHeightSample& s)
{
    require_unit<3>(p, "weingarten_pullback");
    return weingarten_pullback_impl<3>(p, eval_height(s, p), height_tangential_hessian(s, p));
}

Mat2 weingarten_pullback(const Vec2& p, const BoundaryHeightSample& s)
{
    require_unit<2>(p, "weingarten_pullback");
    return weingarten_pullback_impl<2>(p, eval_height(s, p), height_tangential_hessian(s, p));
}

} // namespace stochfem
