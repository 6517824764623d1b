#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "deepls/error.hpp"
#include "deepls/network.hpp"

namespace deepls {

enum class DomainKind {
    unit_ball,          // {|x| < 1} in R^d
    ball_time_cylinder, // {|x| < 1} × (0, 1); time is the last coordinate
    unit_square,        // (0, 1)²
};

enum class Region { interior, boundary };

/// Which constraint a boundary point carries.
enum class BoundaryKind : std::uint8_t {
    dirichlet,        // u = g on the spatial boundary
    initial_value,    // u(x, 0) = h0(x)
    initial_velocity, // ∂t u(x, 0) = h1(x)
};

enum class PointClass { interior, boundary, outside };

constexpr std::string_view to_string(Region r) noexcept
{
    return r == Region::interior ? "interior" : "boundary";
}

constexpr std::string_view to_string(BoundaryKind k) noexcept
{
    switch (k) {
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::initial_value: return "initial_value";
    case BoundaryKind::initial_velocity: return "initial_velocity";
    }
    return "unknown";
}

struct DomainDescriptor {
    DomainKind kind = DomainKind::unit_ball;
    int spatial_dim = 2;

    static constexpr double boundary_tolerance = 1e-9;

    bool time_dependent() const noexcept { return kind == DomainKind::ball_time_cylinder; }
    int point_dim() const noexcept { return spatial_dim + (time_dependent() ? 1 : 0); }

    /// Classifies a point as lying in the open domain, on a constrained part of
    /// its boundary, or elsewhere. For the space-time cylinder the constrained
    /// boundary is the lateral surface plus the t = 0 slice; the terminal face
    /// t = 1 carries no data and counts as outside.
    PointClass classify(const Eigen::Ref<const Vector>& p) const
    {
        require(p.size() == point_dim(), "point dimension does not match the domain");
        constexpr double tol = boundary_tolerance;
        switch (kind) {
        case DomainKind::unit_ball: {
            const double r = p.norm();
            if (r < 1.0 - tol)
                return PointClass::interior;
            return std::abs(r - 1.0) <= tol ? PointClass::boundary : PointClass::outside;
        }
        case DomainKind::ball_time_cylinder: {
            const double r = p.head(spatial_dim).norm();
            const double t = p[spatial_dim];
            if (t < -tol || t > 1.0 + tol || r > 1.0 + tol)
                return PointClass::outside;
            const bool lateral = std::abs(r - 1.0) <= tol;
            if (lateral && t <= 1.0)
                return PointClass::boundary;
            if (std::abs(t) <= tol)
                return PointClass::boundary;
            if (r < 1.0 - tol && t > tol && t < 1.0 - tol)
                return PointClass::interior;
            return PointClass::outside;
        }
        case DomainKind::unit_square: {
            const double x = p[0], y = p[1];
            if (x > tol && x < 1.0 - tol && y > tol && y < 1.0 - tol)
                return PointClass::interior;
            const bool inside_closed = x >= -tol && x <= 1.0 + tol && y >= -tol && y <= 1.0 + tol;
            return inside_closed ? PointClass::boundary : PointClass::outside;
        }
        }
        return PointClass::outside;
    }

    bool contains(const Eigen::Ref<const Vector>& p, Region region) const
    {
        const auto c = classify(p);
        return region == Region::interior ? c == PointClass::interior : c == PointClass::boundary;
    }
};

} // namespace deepls
