#pragma once

#include <cmath>
#include <cstdint>

#include "deepls/error.hpp"
#include "deepls/network.hpp"

namespace deepls {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment estimates for Adam (Kingma & Ba). Moments are sized like the flat
/// parameter vector; `step` counts completed updates.
struct AdamState {
    AdamHyper hyper;
    Vector first_moment;
    Vector second_moment;
    std::uint64_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t parameter_count, AdamHyper h = {})
        : hyper(h),
          first_moment(Vector::Zero(Eigen::Index(parameter_count))),
          second_moment(Vector::Zero(Eigen::Index(parameter_count)))
    {}
};

/// One bias-corrected Adam update of `theta` in place. A gradient with any
/// non-finite entry is rejected before the state is touched.
inline void adam_step(AdamState& state, Vector& theta, const Vector& grad, double lr)
{
    require(theta.size() == grad.size(), "adam_step: gradient and parameter lengths differ");
    require(state.first_moment.size() == theta.size(), "adam_step: state sized for a different parameter vector");
    require(lr > 0.0, "adam_step: learning rate must be positive");
    if (!grad.allFinite())
        fail(ErrorKind::divergence, "adam_step: non-finite gradient entry");

    const auto& h = state.hyper;
    state.step += 1;
    state.first_moment = h.beta1 * state.first_moment + (1.0 - h.beta1) * grad;
    state.second_moment = h.beta2 * state.second_moment + (1.0 - h.beta2) * grad.cwiseAbs2();
    const double t = double(state.step);
    const double c1 = 1.0 - std::pow(h.beta1, t);
    const double c2 = 1.0 - std::pow(h.beta2, t);
    theta.array() -= lr * (state.first_moment.array() / c1)
                     / ((state.second_moment.array() / c2).sqrt() + h.eps);
}

} // namespace deepls
