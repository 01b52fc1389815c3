#pragma once

#include <array>
#include <string>
#include <utility>

namespace reeb {

// ---------------------------------------------------------------------------
// Binding-chart contact profile.  The solid-torus chart S^1 x D^2 attached to
// a boundary component carries the 1-form  alpha = f1(r) dtheta1 + f2(r) dtheta2
// with
//     f1(r) = 2 - a r^2,     f2(r) = r^2            for r <= r_inner,
//     f1(r) = e^{1/2 - r},   f2(r) = -T/(2 pi)       for r in [1/2, 1],
// joined on [r_inner, 1/2] by a quintic matching value, first and second
// derivative at both ends.  The contact condition is
//     W(r) = f1 f2' - f2 f1' > 0  on (0, 1].
// The induced flow rotates both angles with r-dependent rates and preserves r.
// ---------------------------------------------------------------------------

struct BindingChart {
    double T = -6.283185307179586476925286766559;  // twist constant, < 0
    double a = 1.4142135623730951;                 // slope constant, irrational, > 0
    double r_inner = 0.25;
    std::array<double, 6> blend_f1{};  // coefficients in t = (r - r_inner)/(1/2 - r_inner)
    std::array<double, 6> blend_f2{};

    double f1(double r) const;
    double f2(double r) const;
    double df1(double r) const;
    double df2(double r) const;
    double wronskian(double r) const;  // f1 f2' - f2 f1'
};

// Builds the profile and verifies the contact condition on a dense grid over
// [r_inner, 1/2]; throws std::invalid_argument on bad parameters and
// std::runtime_error if the blend violates the condition (adjust r_inner).
BindingChart build_profile(double T, double a, double r_inner = 0.25,
                           int validation_grid = 4000);

struct ReebVelocity {
    double v_theta1 = 0.0;
    double v_r = 0.0;  // identically zero in binding charts
    double v_theta2 = 0.0;
    std::string chart = "binding";
};

// Closed-form flow velocity at radius r:
//   v_theta1 = f2'/W, v_theta2 = -f1'/W, v_r = 0.
// Constant (1/2, a/2) on the inner region (the r -> 0 limit included).
ReebVelocity reeb_at(const BindingChart& chart, double r);

// Action coordinates (I1, I2) = (rho f1(r), rho f2(r)).
std::pair<double, double> action_angle(const BindingChart& chart, double rho, double r);

// Minimum of W over the grid r = i/grid_size, i = 1..grid_size.
double validate_contact(const BindingChart& chart, int grid_size);

}  // namespace reeb
