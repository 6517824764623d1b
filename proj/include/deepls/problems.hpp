#pragma once

// Benchmark boundary/initial value problems. Each problem supplies
//  - the exact solution and its closed-form derivatives,
//  - the forcing term f and boundary data,
//  - probe layouts and residual formulas that turn probe values of any field
//    (a network, or the exact solution itself) into the discretized residual
//    and its partial derivatives with respect to each probe value.
// First derivatives inside the operators are central differences sharing the
// ±h probes of the second differences. Divergence-form operators are expanded
// analytically, ∇·(a∇u) = a Δu + ∇a·∇u, so no differences are nested.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "deepls/domain.hpp"
#include "deepls/error.hpp"
#include "deepls/network.hpp"
#include "deepls/stencil.hpp"

namespace deepls {

/// Closed-form derivatives of the exact solution at one point. Spatial
/// quantities only; time derivatives are zero for stationary problems.
struct ExactDerivatives {
    double value = 0.0;
    Vector grad;            // spatial gradient
    double laplacian = 0.0; // spatial Laplacian
    double dt = 0.0;
    double dtt = 0.0;
};

class PdeProblem {
public:
    virtual ~PdeProblem() = default;

    virtual std::string name() const = 0;
    const DomainDescriptor& domain() const noexcept { return domain_; }
    int spatial_dim() const noexcept { return domain_.spatial_dim; }
    int point_dim() const noexcept { return domain_.point_dim(); }
    bool time_dependent() const noexcept { return domain_.time_dependent(); }

    virtual double exact(const Eigen::Ref<const Vector>& p) const = 0;
    virtual ExactDerivatives exact_derivatives(const Eigen::Ref<const Vector>& p) const = 0;
    virtual double forcing(const Eigen::Ref<const Vector>& p) const = 0;
    virtual double boundary_data(const Eigen::Ref<const Vector>& p, BoundaryKind kind) const = 0;

    /// D applied to the exact solution through its closed-form derivatives.
    virtual double apply_operator(const Eigen::Ref<const Vector>& p, const ExactDerivatives& du) const = 0;

    virtual const ProbeLayout& interior_layout() const = 0;
    virtual const ProbeLayout& boundary_layout(BoundaryKind kind) const = 0;

    /// Dφ - f from probe values laid out per interior_layout(). When `dres` is
    /// non-empty it receives ∂residual/∂(probe value) for each probe.
    virtual double interior_residual(const Eigen::Ref<const Vector>& p, std::span<const double> probes,
                                     double h, std::span<double> dres) const = 0;

    /// Bφ - g from probe values laid out per boundary_layout(kind).
    virtual double boundary_residual(const Eigen::Ref<const Vector>& p, BoundaryKind kind,
                                     std::span<const double> probes, double h,
                                     std::span<double> dres) const
    {
        const double g = boundary_data(p, kind);
        if (kind == BoundaryKind::initial_velocity) {
            // central difference in t: (φ(t+h) - φ(t-h)) / 2h
            if (!dres.empty()) {
                dres[0] = 1.0 / (2.0 * h);
                dres[1] = -1.0 / (2.0 * h);
            }
            return (probes[0] - probes[1]) / (2.0 * h) - g;
        }
        if (!dres.empty())
            dres[0] = 1.0;
        return probes[0] - g;
    }

    /// Residual of the exact solution using closed-form derivatives.
    double analytic_interior_residual(const Eigen::Ref<const Vector>& p) const
    {
        return apply_operator(p, exact_derivatives(p)) - forcing(p);
    }

    double analytic_boundary_residual(const Eigen::Ref<const Vector>& p, BoundaryKind kind) const
    {
        const auto du = exact_derivatives(p);
        const double b = kind == BoundaryKind::initial_velocity ? du.dt : du.value;
        return b - boundary_data(p, kind);
    }

    /// Number of boundary points of each kind when N2 points are requested.
    /// Time-dependent problems put N2/(d+1) points on the t = 0 slice and the
    /// rest on the lateral surface; with N2 = 12000 + 12000/d this gives
    /// exactly 12000 lateral and 12000/d initial points.
    virtual std::vector<std::pair<BoundaryKind, Eigen::Index>> boundary_split(Eigen::Index n2) const
    {
        if (!time_dependent())
            return {{BoundaryKind::dirichlet, n2}};
        const auto initial = Eigen::Index(std::llround(double(n2) / double(spatial_dim() + 1)));
        return {{BoundaryKind::dirichlet, n2 - initial}, {BoundaryKind::initial_value, initial}};
    }

protected:
    explicit PdeProblem(DomainDescriptor d) : domain_(d) {}

    static double spatial_radius(const Eigen::Ref<const Vector>& p, int d) { return p.head(d).norm(); }

    DomainDescriptor domain_;
};

namespace detail {

constexpr double min_radius = 1e-10;  // clamp for |x|^-1 factors
constexpr double series_radius = 1e-6; // below this, use r -> 0 limits

/// S(r) = sin(π/2 (1-r)^2.5), extended by zero for r > 1 (a C² extension).
struct RadialBump {
    static double value(double r)
    {
        const double s = std::max(1.0 - r, 0.0);
        return std::sin(0.5 * std::numbers::pi * std::pow(s, 2.5));
    }
    static double d1(double r)
    {
        const double s = std::max(1.0 - r, 0.0);
        const double theta = 0.5 * std::numbers::pi * std::pow(s, 2.5);
        return -1.25 * std::numbers::pi * std::pow(s, 1.5) * std::cos(theta);
    }
    static double d2(double r)
    {
        const double s = std::max(1.0 - r, 0.0);
        const double theta = 0.5 * std::numbers::pi * std::pow(s, 2.5);
        constexpr double pi = std::numbers::pi;
        return 1.875 * pi * std::sqrt(s) * std::cos(theta) - 1.5625 * pi * pi * s * s * s * std::sin(theta);
    }
    /// S'(r)/r with its finite limit -(5π/4)² at the origin.
    static double d1_over_r(double r)
    {
        if (r < series_radius)
            return -1.5625 * std::numbers::pi * std::numbers::pi;
        return d1(r) / r;
    }
    static double laplacian(double r, int d) { return d2(r) + double(d - 1) * d1_over_r(r); }
};

inline Vector radial_gradient(const Eigen::Ref<const Vector>& x, double d1_over_r) { return d1_over_r * x; }

} // namespace detail

/// -∇·((1 + ½|x|²)∇u) + |∇u|² = f in the unit ball, u = 0 on the sphere,
/// u(x) = sin(π/2 (1-|x|)^2.5).
class EllipticProblem final : public PdeProblem {
public:
    explicit EllipticProblem(int d)
        : PdeProblem({DomainKind::unit_ball, d}), interior_(ProbeLayout::central(d)),
          boundary_(ProbeLayout({{-1, 0}}))
    {
        if (d < 2)
            fail(ErrorKind::config, "elliptic problem needs dim >= 2");
    }

    std::string name() const override { return "elliptic"; }

    double exact(const Eigen::Ref<const Vector>& p) const override { return detail::RadialBump::value(p.norm()); }

    ExactDerivatives exact_derivatives(const Eigen::Ref<const Vector>& p) const override
    {
        using B = detail::RadialBump;
        const double r = p.norm();
        return {B::value(r), detail::radial_gradient(p, B::d1_over_r(r)), B::laplacian(r, spatial_dim())};
    }

    double apply_operator(const Eigen::Ref<const Vector>& p, const ExactDerivatives& du) const override
    {
        const double a = 1.0 + 0.5 * p.squaredNorm();
        return -(a * du.laplacian + p.dot(du.grad)) + du.grad.squaredNorm();
    }

    double forcing(const Eigen::Ref<const Vector>& p) const override
    {
        using B = detail::RadialBump;
        const double r = p.norm();
        const double s1 = B::d1(r);
        return -((1.0 + 0.5 * r * r) * B::laplacian(r, spatial_dim()) + r * s1) + s1 * s1;
    }

    double boundary_data(const Eigen::Ref<const Vector>&, BoundaryKind) const override { return 0.0; }

    const ProbeLayout& interior_layout() const override { return interior_; }
    const ProbeLayout& boundary_layout(BoundaryKind) const override { return boundary_; }

    double interior_residual(const Eigen::Ref<const Vector>& p, std::span<const double> v, double h,
                             std::span<double> dres) const override
    {
        const int d = spatial_dim();
        const double a = 1.0 + 0.5 * p.squaredNorm();
        const double inv_h = 1.0 / h, inv_h2 = inv_h * inv_h;
        const double v0 = v[0];
        double lap = 0.0, drift = 0.0, grad2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double plus = v[1 + 2 * i], minus = v[2 + 2 * i];
            const double g = 0.5 * (plus - minus) * inv_h;
            lap += (plus - 2.0 * v0 + minus) * inv_h2;
            drift += p[i] * g;
            grad2 += g * g;
            if (!dres.empty()) {
                const double dg = 0.5 * inv_h * (2.0 * g - p[i]); // ∂(-x_i g + g²)/∂plus
                dres[1 + 2 * i] = -a * inv_h2 + dg;
                dres[2 + 2 * i] = -a * inv_h2 - dg;
            }
        }
        if (!dres.empty())
            dres[0] = 2.0 * d * a * inv_h2;
        return -(a * lap + drift) + grad2 - forcing(p);
    }

private:
    ProbeLayout interior_;
    ProbeLayout boundary_;
};

/// ∂t u - ∇x·((1 + ½|x|)∇x u) = f on the unit ball × (0,1), with the trace of
/// u(x,t) = exp(|x| sqrt(1-t)) as lateral data and exp(|x|) at t = 0.
class ParabolicProblem final : public PdeProblem {
public:
    explicit ParabolicProblem(int d)
        : PdeProblem({DomainKind::ball_time_cylinder, d}), interior_(ProbeLayout::central(d + 1)),
          boundary_(ProbeLayout({{-1, 0}}))
    {
        if (d < 2)
            fail(ErrorKind::config, "parabolic problem needs dim >= 2");
    }

    std::string name() const override { return "parabolic"; }

    static double decay(double t) { return std::sqrt(std::max(1.0 - t, 0.0)); }

    double exact(const Eigen::Ref<const Vector>& p) const override
    {
        const int d = spatial_dim();
        return std::exp(spatial_radius(p, d) * decay(p[d]));
    }

    ExactDerivatives exact_derivatives(const Eigen::Ref<const Vector>& p) const override
    {
        const int d = spatial_dim();
        const double r = std::max(spatial_radius(p, d), detail::min_radius);
        const double c = std::max(decay(p[d]), detail::min_radius);
        const double u = std::exp(spatial_radius(p, d) * decay(p[d]));
        ExactDerivatives du;
        du.value = u;
        du.grad = (c * u / r) * p.head(d);
        du.laplacian = c * c * u + double(d - 1) * c * u / r;
        du.dt = -r * u / (2.0 * c);
        return du;
    }

    double apply_operator(const Eigen::Ref<const Vector>& p, const ExactDerivatives& du) const override
    {
        const int d = spatial_dim();
        const double r = std::max(spatial_radius(p, d), detail::min_radius);
        const double a = 1.0 + 0.5 * r;
        const double drift = p.head(d).dot(du.grad) / (2.0 * r); // ∇a = x / 2|x|
        return du.dt - (a * du.laplacian + drift);
    }

    double forcing(const Eigen::Ref<const Vector>& p) const override
    {
        const int d = spatial_dim();
        const double r = std::max(spatial_radius(p, d), detail::min_radius);
        const double c = std::max(decay(p[d]), detail::min_radius);
        const double u = std::exp(r * c);
        const double ur = c * u;
        const double urr = c * c * u;
        const double ut = -r * u / (2.0 * c);
        return ut - ((1.0 + 0.5 * r) * (urr + double(d - 1) * ur / r) + 0.5 * ur);
    }

    double boundary_data(const Eigen::Ref<const Vector>& p, BoundaryKind) const override { return exact(p); }

    const ProbeLayout& interior_layout() const override { return interior_; }
    const ProbeLayout& boundary_layout(BoundaryKind) const override { return boundary_; }

    double interior_residual(const Eigen::Ref<const Vector>& p, std::span<const double> v, double h,
                             std::span<double> dres) const override
    {
        const int d = spatial_dim();
        const double r = std::max(spatial_radius(p, d), detail::min_radius);
        const double a = 1.0 + 0.5 * r;
        const double inv_h = 1.0 / h, inv_h2 = inv_h * inv_h;
        const double v0 = v[0];
        const double dt = 0.5 * (v[1 + 2 * d] - v[2 + 2 * d]) * inv_h;
        double lap = 0.0, drift = 0.0;
        for (int i = 0; i < d; ++i) {
            const double plus = v[1 + 2 * i], minus = v[2 + 2 * i];
            const double w = p[i] / (2.0 * r);
            lap += (plus - 2.0 * v0 + minus) * inv_h2;
            drift += w * 0.5 * (plus - minus) * inv_h;
            if (!dres.empty()) {
                dres[1 + 2 * i] = -a * inv_h2 - 0.5 * w * inv_h;
                dres[2 + 2 * i] = -a * inv_h2 + 0.5 * w * inv_h;
            }
        }
        if (!dres.empty()) {
            dres[0] = 2.0 * d * a * inv_h2;
            dres[1 + 2 * d] = 0.5 * inv_h;
            dres[2 + 2 * d] = -0.5 * inv_h;
        }
        return dt - (a * lap + drift) - forcing(p);
    }

private:
    ProbeLayout interior_;
    ProbeLayout boundary_;
};

/// ∂²t u - Δx u = f on the unit ball × (0,1); u = 0 on the lateral surface,
/// u(x,0) = 0, ∂t u(x,0) = 0, exact u = (exp(t²) - 1) sin(π/2 (1-|x|)^2.5).
class HyperbolicProblem final : public PdeProblem {
public:
    explicit HyperbolicProblem(int d)
        : PdeProblem({DomainKind::ball_time_cylinder, d}), interior_(ProbeLayout::central(d + 1)),
          value_(ProbeLayout({{-1, 0}})), velocity_(ProbeLayout({{d, +1}, {d, -1}}))
    {
        if (d < 2)
            fail(ErrorKind::config, "hyperbolic problem needs dim >= 2");
    }

    std::string name() const override { return "hyperbolic"; }

    double exact(const Eigen::Ref<const Vector>& p) const override
    {
        const int d = spatial_dim();
        const double t = p[d];
        return std::expm1(t * t) * detail::RadialBump::value(spatial_radius(p, d));
    }

    ExactDerivatives exact_derivatives(const Eigen::Ref<const Vector>& p) const override
    {
        using B = detail::RadialBump;
        const int d = spatial_dim();
        const double t = p[d];
        const double r = spatial_radius(p, d);
        const double time = std::expm1(t * t);
        const double s = B::value(r);
        ExactDerivatives du;
        du.value = time * s;
        du.grad = time * detail::radial_gradient(p.head(d), B::d1_over_r(r));
        du.laplacian = time * B::laplacian(r, d);
        du.dt = 2.0 * t * std::exp(t * t) * s;
        du.dtt = (2.0 + 4.0 * t * t) * std::exp(t * t) * s;
        return du;
    }

    double apply_operator(const Eigen::Ref<const Vector>&, const ExactDerivatives& du) const override
    {
        return du.dtt - du.laplacian;
    }

    double forcing(const Eigen::Ref<const Vector>& p) const override
    {
        using B = detail::RadialBump;
        const int d = spatial_dim();
        const double t = p[d];
        const double r = spatial_radius(p, d);
        const double e = std::exp(t * t);
        return (2.0 + 4.0 * t * t) * e * B::value(r) - (e - 1.0) * B::laplacian(r, d);
    }

    double boundary_data(const Eigen::Ref<const Vector>&, BoundaryKind) const override { return 0.0; }

    const ProbeLayout& interior_layout() const override { return interior_; }
    const ProbeLayout& boundary_layout(BoundaryKind kind) const override
    {
        return kind == BoundaryKind::initial_velocity ? velocity_ : value_;
    }

    double interior_residual(const Eigen::Ref<const Vector>& p, std::span<const double> v, double h,
                             std::span<double> dres) const override
    {
        const int d = spatial_dim();
        const double inv_h2 = 1.0 / (h * h);
        const double v0 = v[0];
        double lap = 0.0;
        for (int i = 0; i < d; ++i)
            lap += (v[1 + 2 * i] - 2.0 * v0 + v[2 + 2 * i]) * inv_h2;
        const double vtt = (v[1 + 2 * d] - 2.0 * v0 + v[2 + 2 * d]) * inv_h2;
        if (!dres.empty()) {
            for (int i = 0; i < d; ++i)
                dres[1 + 2 * i] = dres[2 + 2 * i] = -inv_h2;
            dres[1 + 2 * d] = dres[2 + 2 * d] = inv_h2;
            dres[0] = (2.0 * d - 2.0) * inv_h2;
        }
        return vtt - lap - forcing(p);
    }

    /// The t = 0 share is split evenly between the value and velocity conditions.
    std::vector<std::pair<BoundaryKind, Eigen::Index>> boundary_split(Eigen::Index n2) const override
    {
        const auto initial = Eigen::Index(std::llround(double(n2) / double(spatial_dim() + 1)));
        const Eigen::Index value = (initial + 1) / 2;
        return {{BoundaryKind::dirichlet, n2 - initial},
                {BoundaryKind::initial_value, value},
                {BoundaryKind::initial_velocity, initial - value}};
    }

private:
    ProbeLayout interior_;
    ProbeLayout value_;
    ProbeLayout velocity_;
};

/// -Δu = f on (0,1)², u = min{x², (1-x)²}, f = -2, g = trace of u.
class Poisson2dProblem final : public PdeProblem {
public:
    Poisson2dProblem()
        : PdeProblem({DomainKind::unit_square, 2}), interior_(ProbeLayout::central(2)),
          boundary_(ProbeLayout({{-1, 0}}))
    {}

    std::string name() const override { return "poisson2d"; }

    double exact(const Eigen::Ref<const Vector>& p) const override
    {
        const double x = p[0];
        return std::min(x * x, (1.0 - x) * (1.0 - x));
    }

    ExactDerivatives exact_derivatives(const Eigen::Ref<const Vector>& p) const override
    {
        const double x = p[0];
        ExactDerivatives du;
        du.value = exact(p);
        du.grad = Vector::Zero(2);
        du.grad[0] = x <= 0.5 ? 2.0 * x : -2.0 * (1.0 - x);
        du.laplacian = 2.0; // both branches; the kink x = 1/2 has measure zero
        return du;
    }

    double apply_operator(const Eigen::Ref<const Vector>&, const ExactDerivatives& du) const override
    {
        return -du.laplacian;
    }

    double forcing(const Eigen::Ref<const Vector>&) const override { return -2.0; }

    double boundary_data(const Eigen::Ref<const Vector>& p, BoundaryKind) const override { return exact(p); }

    const ProbeLayout& interior_layout() const override { return interior_; }
    const ProbeLayout& boundary_layout(BoundaryKind) const override { return boundary_; }

    double interior_residual(const Eigen::Ref<const Vector>& p, std::span<const double> v, double h,
                             std::span<double> dres) const override
    {
        const double inv_h2 = 1.0 / (h * h);
        const double lap = (v[1] + v[2] + v[3] + v[4] - 4.0 * v[0]) * inv_h2;
        if (!dres.empty()) {
            dres[0] = 4.0 * inv_h2;
            for (int k = 1; k <= 4; ++k)
                dres[k] = -inv_h2;
        }
        return -lap - forcing(p);
    }

private:
    ProbeLayout interior_;
    ProbeLayout boundary_;
};

inline std::unique_ptr<PdeProblem> make_problem(const std::string& name, int dim)
{
    if (name == "elliptic")
        return std::make_unique<EllipticProblem>(dim);
    if (name == "parabolic")
        return std::make_unique<ParabolicProblem>(dim);
    if (name == "hyperbolic")
        return std::make_unique<HyperbolicProblem>(dim);
    if (name == "poisson2d") {
        if (dim != 2)
            fail(ErrorKind::config, "poisson2d is two-dimensional; dim must be 2");
        return std::make_unique<Poisson2dProblem>();
    }
    fail(ErrorKind::config, "unknown problem '" + name + "' (expected elliptic|parabolic|hyperbolic|poisson2d)");
}

} // namespace deepls
