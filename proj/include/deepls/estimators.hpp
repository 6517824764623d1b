#pragma once

// Monte-Carlo estimators of μ = ∫_Ω w(x) p(x) dx.

#include <cmath>
#include <functional>

#include "deepls/error.hpp"
#include "deepls/network.hpp"

namespace deepls {

using PointFunction = std::function<double(const Eigen::Ref<const Vector>&)>;

/// μ̂ = |Ω|/n Σ w(x_i) p(x_i) with x_i ~ p.
inline double plain_mc_estimate(const PointFunction& w, const PointFunction& p_density, const Points& points,
                                double volume)
{
    if (points.cols() == 0)
        fail(ErrorKind::contract, "plain_mc_estimate: empty point set");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < points.cols(); ++i)
        sum += w(points.col(i)) * p_density(points.col(i));
    return volume * sum / double(points.cols());
}

/// μ̂_q = |Ω|/n Σ w(x_i) p(x_i) / q(x_i) with x_i ~ q. Unbiased whenever
/// q(x) = 0 implies w(x) p(x) = 0; a sample that breaks this is rejected.
inline double importance_estimate(const PointFunction& w, const PointFunction& p_density,
                                  const PointFunction& q_density, const Points& points, double volume)
{
    if (points.cols() == 0)
        fail(ErrorKind::contract, "importance_estimate: empty point set");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        const double wp = w(points.col(i)) * p_density(points.col(i));
        const double q = q_density(points.col(i));
        if (q == 0.0) {
            if (wp != 0.0)
                fail(ErrorKind::support_violation, "importance_estimate: q vanishes where w·p does not");
            continue;
        }
        sum += wp / q;
    }
    return volume * sum / double(points.cols());
}

} // namespace deepls
