#include "stochfem/solid_harmonics.hpp"

#include <cmath>
#include <numbers>

namespace stochfem {

Polynomial3& Polynomial3::operator+=(const Polynomial3& other)
{
    for (int a = 0; a <= kDegree; ++a)
        for (int b = 0; b <= kDegree; ++b)
            for (int c = 0; c <= kDegree; ++c)
                c_[a][b][c] += other.c_[a][b][c];
    return *this;
}

Polynomial3& Polynomial3::operator*=(double s)
{
    for (auto& plane : c_)
        for (auto& row : plane)
            for (double& v : row)
                v *= s;
    return *this;
}

Polynomial3 operator*(const Polynomial3& p, const Polynomial3& q)
{
    constexpr int n = Polynomial3::kDegree;
    Polynomial3 out;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b)
            for (int c = 0; a + b + c <= n; ++c) {
                const double pv = p.c_[a][b][c];
                if (pv == 0.0) continue;
                for (int d = 0; a + b + c + d <= n; ++d)
                    for (int e = 0; a + b + c + d + e <= n; ++e)
                        for (int f = 0; a + b + c + d + e + f <= n; ++f)
                            out.c_[a + d][b + e][c + f] += pv * q.c_[d][e][f];
            }
    return out;
}

Polynomial3 Polynomial3::constant(double v)
{
    return monomial(0, 0, 0, v);
}

Polynomial3 Polynomial3::monomial(int a, int b, int c, double v)
{
    Polynomial3 p;
    p.c_[a][b][c] = v;
    return p;
}

double Polynomial3::operator()(const Vec3& x) const
{
    double sum = 0.0;
    for (int a = 0; a <= kDegree; ++a)
        for (int b = 0; a + b <= kDegree; ++b)
            for (int c = 0; a + b + c <= kDegree; ++c)
                if (c_[a][b][c] != 0.0)
                    sum += c_[a][b][c] * std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c);
    return sum;
}

namespace {

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

std::array<Polynomial3, kHarmonicCount> build_solid_harmonics()
{
    constexpr int lmax = kMaxHarmonicDegree;
    const Polynomial3 x = Polynomial3::monomial(1, 0, 0);
    const Polynomial3 y = Polynomial3::monomial(0, 1, 0);
    const Polynomial3 z = Polynomial3::monomial(0, 0, 1);
    const Polynomial3 r2 = x * x + y * y + z * z;

    // Re/Im of (x + i y)^m.
    std::array<Polynomial3, lmax + 1> re, im;
    re[0] = Polynomial3::constant(1.0);
    for (int m = 1; m <= lmax; ++m) {
        re[m] = x * re[m - 1] + (-1.0) * (y * im[m - 1]);
        im[m] = x * im[m - 1] + y * re[m - 1];
    }

    // Pi_l^m(z, r^2) = r^{l-m} d^m P_l / dt^m (z / r), via the three-term
    // recurrence in l, seeded by Pi_m^m = (2m-1)!!.
    std::array<std::array<Polynomial3, lmax + 1>, lmax + 1> pi;
    for (int m = 0; m <= lmax; ++m) {
        double dfact = 1.0;
        for (int k = 2 * m - 1; k > 1; k -= 2) dfact *= k;
        pi[m][m] = Polynomial3::constant(dfact);
        if (m + 1 <= lmax) pi[m + 1][m] = (2.0 * m + 1.0) * (z * pi[m][m]);
        for (int l = m + 2; l <= lmax; ++l) {
            pi[l][m] = (1.0 / (l - m))
                       * ((2.0 * l - 1.0) * (z * pi[l - 1][m]) + (-(l + m - 1.0)) * (r2 * pi[l - 2][m]));
        }
    }

    std::array<Polynomial3, kHarmonicCount> out;
    for (int l = 0; l <= lmax; ++l) {
        for (int m = 0; m <= l; ++m) {
            const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * factorial(l - m)
                                          / factorial(l + m));
            if (m == 0) {
                out[harmonic_index(l, 0)] = norm * pi[l][0];
            } else {
                const double s = std::numbers::sqrt2 * norm;
                out[harmonic_index(l, m)] = s * (pi[l][m] * re[m]);
                out[harmonic_index(l, -m)] = s * (pi[l][m] * im[m]);
            }
        }
    }
    return out;
}

} // namespace

const std::array<Polynomial3, kHarmonicCount>& real_solid_harmonics()
{
    static const auto table = build_solid_harmonics();
    return table;
}

namespace {

struct Exponents {
    int a, b, c;
};

// Monomials of total degree <= 5 in graded order, so that the first 35 are
// those of degree <= 4 and the first 20 those of degree <= 3.
constexpr std::array<Exponents, CompiledPolynomial::kMonomials> make_exponents()
{
    std::array<Exponents, CompiledPolynomial::kMonomials> e{};
    int k = 0;
    for (int d = 0; d <= kMaxHarmonicDegree; ++d)
        for (int a = d; a >= 0; --a)
            for (int b = d - a; b >= 0; --b) e[k++] = {a, b, d - a - b};
    return e;
}

constexpr auto kExponents = make_exponents();

constexpr int monomial_index(int a, int b, int c)
{
    for (int k = 0; k < CompiledPolynomial::kMonomials; ++k)
        if (kExponents[k].a == a && kExponents[k].b == b && kExponents[k].c == c) return k;
    return -1;
}

template <int Count>
void fill_monomials(const Vec3& p, double* m)
{
    double x[kMaxHarmonicDegree + 1], y[kMaxHarmonicDegree + 1], z[kMaxHarmonicDegree + 1];
    x[0] = y[0] = z[0] = 1.0;
    for (int k = 1; k <= kMaxHarmonicDegree; ++k) {
        x[k] = x[k - 1] * p[0];
        y[k] = y[k - 1] * p[1];
        z[k] = z[k - 1] * p[2];
    }
    for (int k = 0; k < Count; ++k) m[k] = x[kExponents[k].a] * y[kExponents[k].b] * z[kExponents[k].c];
}

template <int Count>
double dot(const std::array<double, Count>& c, const double* m)
{
    double s = 0.0;
    for (int k = 0; k < Count; ++k) s += c[k] * m[k];
    return s;
}

} // namespace

CompiledPolynomial::CompiledPolynomial(const Polynomial3& p)
{
    for (int k = 0; k < kMonomials; ++k) {
        const auto [a, b, c] = kExponents[k];
        const double v = p.coeff(a, b, c);
        if (v == 0.0) continue;
        ++terms_;
        value_[k] = v;
        if (a > 0) dx_[monomial_index(a - 1, b, c)] += a * v;
        if (b > 0) dy_[monomial_index(a, b - 1, c)] += b * v;
        if (c > 0) dz_[monomial_index(a, b, c - 1)] += c * v;
        if (a > 1) dxx_[monomial_index(a - 2, b, c)] += a * (a - 1) * v;
        if (b > 1) dyy_[monomial_index(a, b - 2, c)] += b * (b - 1) * v;
        if (c > 1) dzz_[monomial_index(a, b, c - 2)] += c * (c - 1) * v;
        if (a > 0 && b > 0) dxy_[monomial_index(a - 1, b - 1, c)] += a * b * v;
        if (a > 0 && c > 0) dxz_[monomial_index(a - 1, b, c - 1)] += a * c * v;
        if (b > 0 && c > 0) dyz_[monomial_index(a, b - 1, c - 1)] += b * c * v;
    }
}

double CompiledPolynomial::value(const Vec3& p) const
{
    double m[kMonomials];
    fill_monomials<kMonomials>(p, m);
    return dot<kMonomials>(value_, m);
}

double CompiledPolynomial::value_gradient(const Vec3& p, Vec3& gradient) const
{
    double m[kMonomials];
    fill_monomials<kMonomials>(p, m);
    double v = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
    for (int k = 0; k < kGradientMonomials; ++k) {
        v += value_[k] * m[k];
        gx += dx_[k] * m[k];
        gy += dy_[k] * m[k];
        gz += dz_[k] * m[k];
    }
    for (int k = kGradientMonomials; k < kMonomials; ++k) v += value_[k] * m[k];
    gradient = Vec3(gx, gy, gz);
    return v;
}

PolyJet CompiledPolynomial::jet(const Vec3& p) const
{
    double m[kMonomials];
    fill_monomials<kMonomials>(p, m);
    PolyJet j;
    j.value = dot<kMonomials>(value_, m);
    j.gradient = Vec3(dot<kGradientMonomials>(dx_, m), dot<kGradientMonomials>(dy_, m),
                      dot<kGradientMonomials>(dz_, m));
    j.hessian(0, 0) = dot<kHessianMonomials>(dxx_, m);
    j.hessian(1, 1) = dot<kHessianMonomials>(dyy_, m);
    j.hessian(2, 2) = dot<kHessianMonomials>(dzz_, m);
    j.hessian(0, 1) = j.hessian(1, 0) = dot<kHessianMonomials>(dxy_, m);
    j.hessian(0, 2) = j.hessian(2, 0) = dot<kHessianMonomials>(dxz_, m);
    j.hessian(1, 2) = j.hessian(2, 1) = dot<kHessianMonomials>(dyz_, m);
    return j;
}

} // namespace stochfem
