#pragma once

// Random geometry samples: spherical-harmonic height fields over S^2, Fourier
// height fields over S^1 blended into the unit disk, and the scalar randoms
// entering the manufactured solutions.

#include <array>
#include <cstdint>
#include <variant>

#include "stochfem/geometry.hpp"
#include "stochfem/solid_harmonics.hpp"

namespace stochfem {

enum class ProblemKind { Surface, BulkSurface };

inline constexpr int kFourierModes = 6;

/// Uniform draw in [-1, 1) that depends only on (seed, index, slot).
double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t slot);

template <int Dim>
struct HeightValue {
    double h = 0.0;
    Vec<Dim> grad = Vec<Dim>::Zero(); // tangential gradient
};

/// h(x) = eps_tol * sum_{l<6,|m|<=l} lambda_{l,m} Y_l^m(x) on the unit sphere.
class SurfaceHeightSample {
public:
    SurfaceHeightSample();
    SurfaceHeightSample(const std::array<double, kHarmonicCount>& coeffs, double eps_tol);

    const std::array<double, kHarmonicCount>& coeffs() const { return coeffs_; }
    double eps_tol() const { return eps_tol_; }
    /// Ambient polynomial extension of h (the weighted sum of solid harmonics).
    const CompiledPolynomial& polynomial() const { return poly_; }

private:
    std::array<double, kHarmonicCount> coeffs_{};
    double eps_tol_ = 0.0;
    CompiledPolynomial poly_;
};

/// h(theta) = eps_tol * sum_{n=1..6} lambda_n cos(n theta) + lambda_hat_n sin(n theta),
/// extended into the disk with the blending function of width delta.
struct BoundaryHeightSample {
    std::array<double, kFourierModes> cos_coeffs{};
    std::array<double, kFourierModes> sin_coeffs{};
    double delta = 0.4;
    double eps_tol = 0.1;

    BoundaryHeightSample() = default;
    BoundaryHeightSample(const std::array<double, kFourierModes>& cos_c,
                         const std::array<double, kFourierModes>& sin_c, double delta_, double eps_tol_);
};

struct SolutionRandoms {
    double nu1 = 0.0;
    double nu2 = 0.0;
    double lambda = 0.0;
    double sigma_tol = 0.1;
    double eps_tol = 0.1;
};

struct SampleParams {
    double eps_tol = 0.1;
    double sigma_tol = 0.1;
    double delta = 0.4;
};

/// One draw omega of the random geometry together with its solution randoms.
struct GeometrySample {
    std::variant<SurfaceHeightSample, BoundaryHeightSample> height;
    SolutionRandoms randoms;
    std::uint64_t sample_index = 0;
    std::uint64_t master_seed = 0;

    const SurfaceHeightSample& surface() const { return std::get<SurfaceHeightSample>(height); }
    const BoundaryHeightSample& boundary() const { return std::get<BoundaryHeightSample>(height); }
};

/// Deterministic draw keyed by (master_seed, index). Slot order: surface
/// coefficients in lexicographic (l, m); boundary coefficients n ascending
/// with lambda_n before lambda_hat_n; then nu1, nu2, lambda.
GeometrySample draw_sample(std::uint64_t master_seed, std::uint64_t index, ProblemKind problem,
                           const SampleParams& params = {});

HeightValue<3> eval_height(const SurfaceHeightSample& s, const Vec3& p);
HeightValue<2> eval_height(const BoundaryHeightSample& s, const Vec2& p);

/// Matrix of second tangential derivatives D_i D_j h at p.
Mat3 height_tangential_hessian(const SurfaceHeightSample& s, const Vec3& p);
Mat2 height_tangential_hessian(const BoundaryHeightSample& s, const Vec2& p);

/// h, dh/dtheta and d^2h/dtheta^2 of the Fourier series at angle theta.
struct AngularHeight {
    double h = 0.0;
    double dh = 0.0;
    double d2h = 0.0;
};
AngularHeight eval_height_angle(const BoundaryHeightSample& s, double theta);

struct BlendValue {
    double value = 0.0;
    double derivative = 0.0;
};

/// L_delta(t) = exp(-t^2 / (delta^2 - t^2)) for t < delta, else 0.
BlendValue blending(double t, double delta);

struct BulkMapValue {
    Vec2 phi = Vec2::Zero();
    Mat2 jacobian = Mat2::Identity();
};

/// phi(x) = x + L_delta(|x - a(x)|) h(a(x)) nu(a(x)) with its analytic Jacobian.
/// Defined on the closed unit disk.
BulkMapValue bulk_map(const BoundaryHeightSample& s, const Vec2& x);

/// bulk_map continued smoothly across the unit circle (|x| < 1 + delta); used
/// by finite-difference stencils that straddle the boundary.
BulkMapValue bulk_map_extended(const BoundaryHeightSample& s, const Vec2& x);

} // namespace stochfem
