#include <gtest/gtest.h>

#include "stochfem/experiments.hpp"
#include "stochfem/pullback.hpp"
#include "support.hpp"

using namespace stochfem;

namespace {

SurfaceHeightSample constant_height(double c)
{
    // Y_0^0 = 1 / (2 sqrt(pi)).
    std::array<double, kHarmonicCount> coeffs{};
    coeffs[0] = 1.0;
    return SurfaceHeightSample(coeffs, 2.0 * std::sqrt(M_PI) * c);
}

BoundaryHeightSample flat_boundary(double delta = 0.4)
{
    return BoundaryHeightSample({}, {}, delta, 0.1);
}

// phi(p) = (1 + h(p)) p and its tangential gradient from differences.
template <int Dim, class S>
Mat<Dim> fd_phi_gradient(const S& s, const Vec<Dim>& p)
{
    const auto phi = [&](const Vec<Dim>& q) { return Vec<Dim>((1.0 + eval_height(s, q).h) * q); };
    return oracle::fd_surface_gradient<Dim>(phi, p);
}

template <int Dim, class S>
void expect_metric_oracle(const S& s, const Vec<Dim>& p)
{
    const Mat<Dim> F = fd_phi_gradient<Dim>(s, p);
    const Mat<Dim> G = F.transpose() * F + p * p.transpose();
    const auto c = surface_coefficients(p, s);
    EXPECT_LT((c.G_inv - G.inverse()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(c.sqrt_g, std::sqrt(G.determinant()), 1e-6);
    EXPECT_LT((c.D - c.sqrt_g * c.G_inv).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((surface_map_gradient<Dim>(p, eval_height(s, p)) - F).cwiseAbs().maxCoeff(), 1e-7);
}

std::vector<SurfaceHeightSample> surface_samples(int n)
{
    std::vector<SurfaceHeightSample> out;
    for (int i = 0; i < n; ++i) out.push_back(draw_sample(42, i, ProblemKind::Surface).surface());
    return out;
}

std::vector<BoundaryHeightSample> boundary_samples(int n, const SampleParams& params = {})
{
    std::vector<BoundaryHeightSample> out;
    for (int i = 0; i < n; ++i) out.push_back(draw_sample(42, i, ProblemKind::BulkSurface, params).boundary());
    return out;
}

} // namespace

TEST(SurfaceCoefficients, FlatHeightIsIdentity)
{
    const SurfaceHeightSample zero;
    for (const Vec3& p : oracle::sphere_points(10)) {
        const auto c = surface_coefficients(p, zero);
        EXPECT_LT((c.D - Mat3::Identity()).norm(), 1e-15);
        EXPECT_DOUBLE_EQ(c.sqrt_g, 1.0);
    }
}

TEST(SurfaceCoefficients, ConstantHeight)
{
    const double c = 0.07;
    const auto s = constant_height(c);
    for (const Vec3& p : oracle::sphere_points(10)) {
        const auto k = surface_coefficients(p, s);
        EXPECT_NEAR(k.sqrt_g, (1 + c) * (1 + c), 1e-14);
        const Mat3 expect = tangent_projection<3>(p) / ((1 + c) * (1 + c)) + p * p.transpose();
        EXPECT_LT((k.G_inv - expect).norm(), 1e-14);
    }
}

TEST(SurfaceCoefficients, MatchesFdMetricOracle)
{
    for (const auto& s : surface_samples(5))
        for (const Vec3& p : oracle::sphere_points(50, 11)) expect_metric_oracle<3>(s, p);
    for (const auto& s : boundary_samples(5))
        for (const Vec2& p : oracle::circle_points(50, 11)) expect_metric_oracle<2>(s, p);
}

TEST(SurfaceCoefficients, NormalIsEigenvectorAndDSymmetric)
{
    for (const auto& s : surface_samples(5)) {
        for (const Vec3& p : oracle::sphere_points(50, 12)) {
            const auto c = surface_coefficients(p, s);
            EXPECT_LT((c.G_inv * p - p).norm(), 1e-12);
            EXPECT_LT((c.D - c.D.transpose()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_GT(c.sqrt_g, 0.0);
        }
    }
}

TEST(SurfaceCoefficients, SingularHeightRejected)
{
    HeightValue<3> h;
    h.h = -1.0;
    EXPECT_THROW(surface_coefficients_from_height<3>(Vec3(0, 0, 1), h), SingularGeometry);
}

// det B with B = grad phi + nu_Gamma (x) nu equals sqrt g.
TEST(SurfaceCoefficients, BDeterminantEqualsSqrtG)
{
    for (const auto& s : surface_samples(5)) {
        for (const Vec3& p : oracle::sphere_points(50, 13)) {
            const Mat3 B = fd_phi_gradient<3>(s, p) + pulled_normal(p, s) * p.transpose();
            EXPECT_NEAR(B.determinant(), surface_coefficients(p, s).sqrt_g, 1e-6);
        }
    }
}

TEST(PulledNormal, FlatAndConstantHeights)
{
    const Vec3 p = Vec3(1, 2, 3).normalized();
    EXPECT_LT((pulled_normal(p, SurfaceHeightSample{}) - p).norm(), 1e-15);
    EXPECT_LT((pulled_normal(p, constant_height(0.05)) - p).norm(), 1e-15);
}

TEST(PulledNormal, OrthogonalToFdTangents)
{
    for (const auto& s : surface_samples(5)) {
        for (const Vec3& p : oracle::sphere_points(50, 14)) {
            const Vec3 n = pulled_normal(p, s);
            EXPECT_NEAR(n.norm(), 1.0, 1e-14);
            const Mat3 F = fd_phi_gradient<3>(s, p);
            const auto T = tangent_frame<3>(p);
            for (int k = 0; k < 2; ++k) EXPECT_LT(std::abs(n.dot(F * T.col(k))), 1e-7);
            EXPECT_GT(n.dot(p), 0.0);
        }
    }
    for (const auto& s : boundary_samples(5)) {
        for (const Vec2& p : oracle::circle_points(50, 14)) {
            const Vec2 t = fd_phi_gradient<2>(s, p) * tangent_frame<2>(p);
            EXPECT_LT(std::abs(pulled_normal(p, s).dot(t)), 1e-7);
        }
    }
}

// On the random surface f(x) = x1 x3 has tangential gradient P_Gamma grad f.
// The pulled-back chain rule gives grad_Gamma0 phi G^{-1} grad_Gamma0 (f∘phi).
TEST(PullbackChainRule, TangentialGradientOfProduct)
{
    const auto f = [](const Vec3& x) { return x[0] * x[2]; };
    for (const auto& s : surface_samples(5)) {
        const auto phi = [&](const Vec3& q) { return Vec3((1.0 + eval_height(s, q).h) * q); };
        for (const Vec3& p : oracle::sphere_points(50, 15)) {
            const Mat3 F = fd_phi_gradient<3>(s, p);
            const auto T = tangent_frame<3>(p);
            const Vec3 n = (F * T.col(0)).cross(F * T.col(1)).normalized();
            const Vec3 y = phi(p);
            const Vec3 exact = (Mat3::Identity() - n * n.transpose()) * Vec3(y[2], 0, y[0]);
            const Vec3 grad_hat = tangential_fd_gradient<3>([&](const Vec3& q) { return f(phi(q)); }, p);
            const Vec3 pulled = F * surface_coefficients(p, s).G_inv * grad_hat;
            EXPECT_LT((pulled - exact).norm(), 1e-5);
        }
    }
}

TEST(BulkCoefficients, IdentityOutsideBandAndForFlatHeight)
{
    const auto s = boundary_samples(1)[0];
    for (const Vec2& x : oracle::annulus_points(50, 0.05, 1.0 - s.delta, 2)) {
        const auto c = bulk_coefficients(x, s);
        EXPECT_EQ(c.D_bulk, Mat2::Identity());
        EXPECT_EQ(c.sqrt_g, 1.0);
    }
    const auto flat = flat_boundary();
    for (const Vec2& x : oracle::annulus_points(50, 0.05, 1.0, 3)) {
        const auto c = bulk_coefficients(x, flat);
        EXPECT_LT((c.D_bulk - Mat2::Identity()).norm(), 1e-15);
        EXPECT_DOUBLE_EQ(c.sqrt_g, 1.0);
    }
}

TEST(BulkCoefficients, MatchesFdJacobianOracle)
{
    for (const auto& s : boundary_samples(5, SampleParams{0.05, 0.1, 0.8})) {
        const auto phi = [&](const Vec2& y) { return bulk_map_extended(s, y).phi; };
        for (const Vec2& x : oracle::annulus_points(50, 1.0 - s.delta, 1.0, 4)) {
            const Mat2 J = oracle::fd_jacobian<2>(phi, x);
            const Mat2 G = J.transpose() * J;
            const auto c = bulk_coefficients(x, s);
            EXPECT_NEAR(c.sqrt_g, std::abs(J.determinant()), 1e-6);
            EXPECT_LT((c.D_bulk - std::abs(J.determinant()) * G.inverse()).cwiseAbs().maxCoeff(), 1e-6);
            EXPECT_LT((c.D_bulk - c.D_bulk.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(BulkCoefficients, FoldedMapRejected)
{
    Mat2 J;
    J << 1, 0, 0, -0.5;
    EXPECT_THROW(bulk_coefficients_from_jacobian(J), SingularGeometry);
    EXPECT_THROW(bulk_coefficients_from_jacobian(Mat2::Zero()), SingularGeometry);
}

TEST(ConormalFactor, FlatHeight)
{
    for (const Vec2& p : oracle::circle_points(20)) {
        const auto c = conormal_factor(p, flat_boundary());
        EXPECT_NEAR(c.ratio, 1.0, 1e-15);
        EXPECT_LT((c.vec - p).norm(), 1e-15);
    }
}

// Nanson: sqrt g_Gamma0 = |det J| |J^{-T} nu|.
TEST(ConormalFactor, RatioMatchesNanson)
{
    for (const auto& s : boundary_samples(5, SampleParams{0.05, 0.1, 0.8})) {
        const auto phi = [&](const Vec2& y) { return bulk_map_extended(s, y).phi; };
        for (const Vec2& p : oracle::circle_points(30, 5)) {
            const Mat2 J = oracle::fd_jacobian<2>(phi, p);
            const double ratio = 1.0 / (J.inverse().transpose() * p).norm();
            const auto c = conormal_factor(p, s);
            EXPECT_NEAR(c.ratio, ratio, 1e-6);
            EXPECT_LT((c.vec - ratio * (J.transpose() * J).inverse() * p).norm(), 1e-6);
        }
    }
}

// (du/dnu_Gamma)∘phi = vec . grad u_hat for u = u_hat∘phi^{-1}; the normal
// derivative is a central difference at phi(p) with phi inverted by Newton.
TEST(ConormalFactor, PushForwardNormalDerivative)
{
    for (int i = 0; i < 5; ++i) {
        const auto sample = draw_sample(42, i, ProblemKind::BulkSurface, SampleParams{0.05, 0.1, 0.8});
        const auto& s = sample.boundary();
        const auto u_hat = [&](const Vec2& x) { return exact_bulk_solution(sample.randoms, x); };
        const auto inverse = [&](const Vec2& y, Vec2 x) {
            for (int it = 0; it < 50; ++it) {
                const auto m = bulk_map_extended(s, x);
                const Vec2 step = m.jacobian.inverse() * (m.phi - y);
                x -= step;
                if (step.norm() < 1e-15) break;
            }
            return x;
        };
        for (const Vec2& p : oracle::circle_points(20, 6 + i)) {
            const Vec2 y = bulk_map(s, p).phi;
            const Vec2 n = pulled_normal(p, s);
            const double eta = 1e-5;
            const double fd =
                (u_hat(inverse(y + eta * n, p)).value - u_hat(inverse(y - eta * n, p)).value) / (2 * eta);
            EXPECT_NEAR(conormal_factor(p, s).vec.dot(u_hat(p).grad), fd, 1e-5);
        }
    }
}

TEST(WeingartenPullback, FlatAndConstantHeights)
{
    for (const Vec3& p : oracle::sphere_points(10)) {
        EXPECT_LT((weingarten_pullback(p, SurfaceHeightSample{}) - tangent_projection<3>(p)).norm(), 1e-14);
        const double c = 0.06;
        EXPECT_LT((weingarten_pullback(p, constant_height(c)) - tangent_projection<3>(p) / (1 + c)).norm(), 1e-14);
    }
    for (const Vec2& p : oracle::circle_points(10))
        EXPECT_LT((weingarten_pullback(p, flat_boundary()) - tangent_projection<2>(p)).norm(), 1e-14);
}

// H∘phi = grad_Gamma (nu_Gamma)∘phi; rows are pushed-forward FD gradients of
// the pulled normal components.
TEST(WeingartenPullback, MatchesFdOfPulledNormal)
{
    for (const auto& s : surface_samples(5)) {
        for (const Vec3& p : oracle::sphere_points(30, 16)) {
            const Mat3 F = fd_phi_gradient<3>(s, p);
            const Mat3 dn = oracle::fd_surface_gradient<3>([&](const Vec3& q) { return pulled_normal(q, s); }, p);
            const Mat3 H_fd = dn * surface_coefficients(p, s).G_inv * F.transpose();
            const Mat3 H = weingarten_pullback(p, s);
            EXPECT_NEAR(H.trace(), H_fd.trace(), 1e-4);
            EXPECT_LT((H - H_fd).cwiseAbs().maxCoeff(), 1e-5);
            EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-8);
            EXPECT_LT((H * pulled_normal(p, s)).norm(), 1e-8);
        }
    }
    for (const auto& s : boundary_samples(5)) {
        for (const Vec2& p : oracle::circle_points(30, 16)) {
            const Mat2 F = fd_phi_gradient<2>(s, p);
            const Mat2 dn = oracle::fd_surface_gradient<2>([&](const Vec2& q) { return pulled_normal(q, s); }, p);
            const Mat2 H_fd = dn * surface_coefficients(p, s).G_inv * F.transpose();
            EXPECT_LT((weingarten_pullback(p, s) - H_fd).cwiseAbs().maxCoeff(), 1e-5);
        }
    }
}
