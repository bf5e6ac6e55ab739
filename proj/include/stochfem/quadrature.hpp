#pragma once

#include <array>
#include <vector>

namespace stochfem {

/// Barycentric points and weights; weights sum to the reference measure
/// (1/2 for the triangle, 1 for the segment).
template <int NBary>
struct QuadratureRule {
    std::vector<std::array<double, NBary>> points;
    std::vector<double> weights;
    int degree = 0;
    double reference_measure = 0.0;

    std::size_t size() const { return weights.size(); }
};

using TriangleRule = QuadratureRule<3>;
using SegmentRule = QuadratureRule<2>;

/// Six-point rule, exact up to degree 4.
inline const TriangleRule& triangle_rule_degree4()
{
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.degree = 4;
        r.reference_measure = 0.5;
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
            const double b = 1.0 - 2.0 * a;
            r.points.push_back({b, a, a});
            r.points.push_back({a, b, a});
            r.points.push_back({a, a, b});
            for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * w);
        }
        return r;
    }();
    return rule;
}

/// Three-point Gauss-Legendre rule, exact up to degree 5.
inline const SegmentRule& segment_rule_gauss3()
{
    static const SegmentRule rule = [] {
        SegmentRule r;
        r.degree = 5;
        r.reference_measure = 1.0;
        const double s = 0.5 * 0.7745966692414834;  // sqrt(3/5) / 2
        r.points = {{0.5 + s, 0.5 - s}, {0.5, 0.5}, {0.5 - s, 0.5 + s}};
        r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        return r;
    }();
    return rule;
}

} // namespace stochfem
