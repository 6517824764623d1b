#pragma once

// Finite-difference derivatives of a scalar field with respect to its inputs.
// First derivatives are one-sided forward differences; second derivatives are
// three-point central differences with the same step.

#include <cstddef>
#include <vector>

#include "deepls/error.hpp"
#include "deepls/network.hpp"

namespace deepls {

struct StencilConfig {
    double h = 1e-4;

    void validate() const
    {
        // below 1e-6 the rounding error of second differences (~eps/h²)
        // overtakes the truncation gain
        if (!(h > 0.0) || h < 1e-6)
            fail(ErrorKind::config, "stencil.h must satisfy h >= 1e-6");
    }
};

/// (φ(a + h e_i) - φ(a)) / h
template <class Field>
double partial_fd(Field&& phi, const Vector& a, int axis, const StencilConfig& cfg)
{
    require(axis >= 0 && axis < a.size(), "partial_fd: axis out of range");
    Vector shifted = a;
    shifted[axis] += cfg.h;
    return (phi(shifted) - phi(a)) / cfg.h;
}

/// Vector of forward-difference partials; d+1 evaluations sharing the base point.
template <class Field>
Vector gradient_fd(Field&& phi, const Vector& a, const StencilConfig& cfg)
{
    const double base = phi(a);
    Vector g(a.size());
    Vector shifted = a;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        shifted[i] = a[i] + cfg.h;
        g[i] = (phi(shifted) - base) / cfg.h;
        shifted[i] = a[i];
    }
    return g;
}

/// (φ(a + h e_i) - 2φ(a) + φ(a - h e_i)) / h²
template <class Field>
double second_partial_fd(Field&& phi, const Vector& a, int axis, const StencilConfig& cfg)
{
    require(axis >= 0 && axis < a.size(), "second_partial_fd: axis out of range");
    Vector plus = a, minus = a;
    plus[axis] += cfg.h;
    minus[axis] -= cfg.h;
    return (phi(plus) - 2.0 * phi(a) + phi(minus)) / (cfg.h * cfg.h);
}

/// Sum of central second differences over all axes; 2d+1 evaluations.
template <class Field>
double laplacian_fd(Field&& phi, const Vector& a, const StencilConfig& cfg)
{
    const double base = phi(a);
    double sum = 0.0;
    Vector probe = a;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        probe[i] = a[i] + cfg.h;
        const double plus = phi(probe);
        probe[i] = a[i] - cfg.h;
        const double minus = phi(probe);
        probe[i] = a[i];
        sum += plus - 2.0 * base + minus;
    }
    return sum / (cfg.h * cfg.h);
}

/// One probe of a stencil: the base point shifted by `steps`·h along `axis`.
/// axis < 0 denotes the base point itself.
struct ProbeOffset {
    int axis = -1;
    int steps = 0;
};

/// Fixed list of probe offsets applied to every point of a batch. Probes of
/// point n occupy columns [n·K, (n+1)·K) of the expanded batch, in layout order,
/// so one network pass serves the whole batch.
class ProbeLayout {
public:
    ProbeLayout() = default;
    explicit ProbeLayout(std::vector<ProbeOffset> offsets) : offsets_(std::move(offsets)) {}

    /// Base point, then +h and -h along each of the first `axes` coordinates.
    static ProbeLayout central(int axes)
    {
        std::vector<ProbeOffset> o{{-1, 0}};
        for (int i = 0; i < axes; ++i) {
            o.push_back({i, +1});
            o.push_back({i, -1});
        }
        return ProbeLayout(std::move(o));
    }

    ProbeLayout& add(int axis, int steps)
    {
        offsets_.push_back({axis, steps});
        return *this;
    }

    std::size_t size() const noexcept { return offsets_.size(); }
    const std::vector<ProbeOffset>& offsets() const noexcept { return offsets_; }

    /// Index of the probe with the given offset; throws if absent.
    std::size_t index_of(int axis, int steps) const
    {
        for (std::size_t k = 0; k < offsets_.size(); ++k)
            if (offsets_[k].axis == axis && (axis < 0 || offsets_[k].steps == steps))
                return k;
        fail(ErrorKind::contract, "probe layout has no such offset");
    }

    Points expand(const Points& base, double h) const
    {
        const Eigen::Index k = Eigen::Index(offsets_.size());
        Points out(base.rows(), base.cols() * k);
        for (Eigen::Index n = 0; n < base.cols(); ++n) {
            for (Eigen::Index j = 0; j < k; ++j) {
                auto col = out.col(n * k + j);
                col = base.col(n);
                const auto& o = offsets_[std::size_t(j)];
                if (o.axis >= 0)
                    col[o.axis] += o.steps * h;
            }
        }
        return out;
    }

private:
    std::vector<ProbeOffset> offsets_;
};

} // namespace deepls
