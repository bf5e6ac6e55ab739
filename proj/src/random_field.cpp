#include "stochfem/random_field.hpp"

#include <cmath>
#include <stdexcept>

namespace stochfem {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t slot)
{
    const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ index) ^ slot);
    const double u = static_cast<double>(key >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

SurfaceHeightSample::SurfaceHeightSample() : SurfaceHeightSample({}, 0.0) {}

SurfaceHeightSample::SurfaceHeightSample(const std::array<double, kHarmonicCount>& coeffs, double eps_tol)
    : coeffs_(coeffs), eps_tol_(eps_tol)
{
    const auto& harmonics = real_solid_harmonics();
    Polynomial3 sum;
    for (int k = 0; k < kHarmonicCount; ++k) {
        if (coeffs_[k] != 0.0) sum += (eps_tol_ * coeffs_[k]) * harmonics[k];
    }
    poly_ = CompiledPolynomial(sum);
}

BoundaryHeightSample::BoundaryHeightSample(const std::array<double, kFourierModes>& cos_c,
                                           const std::array<double, kFourierModes>& sin_c, double delta_,
                                           double eps_tol_)
    : cos_coeffs(cos_c), sin_coeffs(sin_c), delta(delta_), eps_tol(eps_tol_)
{
    if (!(delta > 0.0 && delta < 0.9)) {
        throw std::invalid_argument("BoundaryHeightSample: blending width must lie in (0, 0.9)");
    }
}

GeometrySample draw_sample(std::uint64_t master_seed, std::uint64_t index, ProblemKind problem,
                           const SampleParams& params)
{
    GeometrySample out;
    out.master_seed = master_seed;
    out.sample_index = index;
    std::uint64_t slot = 0;
    auto next = [&] { return counter_uniform(master_seed, index, slot++); };

    if (problem == ProblemKind::Surface) {
        std::array<double, kHarmonicCount> c{};
        for (double& v : c) v = next();
        out.height = SurfaceHeightSample(c, params.eps_tol);
    } else {
        std::array<double, kFourierModes> a{}, b{};
        for (int n = 0; n < kFourierModes; ++n) {
            a[n] = next();
            b[n] = next();
        }
        out.height = BoundaryHeightSample(a, b, params.delta, params.eps_tol);
    }
    out.randoms.nu1 = next();
    out.randoms.nu2 = next();
    out.randoms.lambda = next();
    out.randoms.sigma_tol = params.sigma_tol;
    out.randoms.eps_tol = params.eps_tol;
    return out;
}

HeightValue<3> eval_height(const SurfaceHeightSample& s, const Vec3& p)
{
    HeightValue<3> out;
    Vec3 g;
    out.h = s.polynomial().value_gradient(p, g);
    out.grad = g - g.dot(p) * p;
    return out;
}

Mat3 height_tangential_hessian(const SurfaceHeightSample& s, const Vec3& p)
{
    // D_i D_j h = (P Hbar P)_ij - (nu . grad hbar) P_ij - (grad_Gamma h)_i nu_j
    const PolyJet j = s.polynomial().jet(p);
    const Mat3 P = tangent_projection<3>(p);
    const Vec3 tg = P * j.gradient;
    return P * j.hessian * P - p.dot(j.gradient) * P - tg * p.transpose();
}

AngularHeight eval_height_angle(const BoundaryHeightSample& s, double theta)
{
    AngularHeight out;
    const double c1 = std::cos(theta), s1 = std::sin(theta);
    double cn = 1.0, sn = 0.0;
    for (int n = 1; n <= kFourierModes; ++n) {
        const double cnext = cn * c1 - sn * s1;
        sn = sn * c1 + cn * s1;
        cn = cnext;
        const double a = s.cos_coeffs[n - 1], b = s.sin_coeffs[n - 1];
        out.h += a * cn + b * sn;
        out.dh += n * (b * cn - a * sn);
        out.d2h -= n * n * (a * cn + b * sn);
    }
    out.h *= s.eps_tol;
    out.dh *= s.eps_tol;
    out.d2h *= s.eps_tol;
    return out;
}

HeightValue<2> eval_height(const BoundaryHeightSample& s, const Vec2& p)
{
    const AngularHeight a = eval_height_angle(s, std::atan2(p[1], p[0]));
    HeightValue<2> out;
    out.h = a.h;
    out.grad = a.dh * Vec2(-p[1], p[0]);
    return out;
}

Mat2 height_tangential_hessian(const BoundaryHeightSample& s, const Vec2& p)
{
    // D_i D_j h = h'' tau_i tau_j - h' tau_i nu_j
    const AngularHeight a = eval_height_angle(s, std::atan2(p[1], p[0]));
    const Vec2 tau(-p[1], p[0]);
    return a.d2h * tau * tau.transpose() - a.dh * tau * p.transpose();
}

namespace {

// Even continuation of the blending function to negative arguments.
BlendValue blending_even(double t, double delta)
{
    const double t2 = t * t, d2 = delta * delta;
    if (t2 >= d2) return {};
    const double gap = d2 - t2;
    const double value = std::exp(-t2 / gap);
    return {value, -value * 2.0 * t * d2 / (gap * gap)};
}

BulkMapValue bulk_map_impl(const BoundaryHeightSample& s, const Vec2& x)
{
    const double r = x.norm();
    const double t = 1.0 - r;
    BulkMapValue out;
    out.phi = x;
    if (std::abs(t) >= s.delta) return out;
    if (r < kDegenerateRadius) {
        throw DegeneratePoint("bulk_map: blending band reaches the origin");
    }
    const Vec2 nu = x / r;
    const Vec2 tau(-nu[1], nu[0]);
    const BlendValue L = blending_even(t, s.delta);
    const AngularHeight a = eval_height_angle(s, std::atan2(x[1], x[0]));
    const Vec2 grad_h = a.dh * tau;

    out.phi = x + L.value * a.h * nu;
    // J = I - h L'(t) nu nu^T + (L / r) nu (grad_Gamma h)^T + (L h / r) P
    out.jacobian = Mat2::Identity() - a.h * L.derivative * nu * nu.transpose()
                   + (L.value / r) * nu * grad_h.transpose()
                   + (L.value * a.h / r) * tau * tau.transpose();
    return out;
}

} // namespace

BlendValue blending(double t, double delta)
{
    if (t < 0.0) throw std::invalid_argument("blending: argument must be non-negative");
    if (delta <= 0.0) throw std::invalid_argument("blending: width must be positive");
    return blending_even(t, delta);
}

BulkMapValue bulk_map(const BoundaryHeightSample& s, const Vec2& x)
{
    if (x.norm() > 1.0 + 1e-12) throw std::invalid_argument("bulk_map: point outside the closed unit disk");
    return bulk_map_impl(s, x);
}

BulkMapValue bulk_map_extended(const BoundaryHeightSample& s, const Vec2& x)
{
    if (x.norm() >= 1.0 + s.delta) throw std::invalid_argument("bulk_map_extended: point beyond the blending band");
    return bulk_map_impl(s, x);
}

} // namespace stochfem
