#include "reeb/contact.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "reeb/util.hpp"

namespace reeb {

namespace {

// Quintic on [0,1] from value/first/second derivative data at both ends.
std::array<double, 6> hermite_quintic(double h, double f0, double d0, double s0, double f1,
                                      double d1, double s1) {
    std::array<double, 6> c{};
    c[0] = f0;
    c[1] = d0 * h;
    c[2] = s0 * h * h / 2.0;
    Eigen::Matrix3d A;
    A << 1, 1, 1, 3, 4, 5, 6, 12, 20;
    Eigen::Vector3d b(f1 - (c[0] + c[1] + c[2]), d1 * h - (c[1] + 2.0 * c[2]),
                      s1 * h * h - 2.0 * c[2]);
    Eigen::Vector3d hi = A.colPivHouseholderQr().solve(b);
    c[3] = hi[0];
    c[4] = hi[1];
    c[5] = hi[2];
    return c;
}

double poly_eval(const std::array<double, 6>& c, double t) {
    double v = 0.0;
    for (int k = 5; k >= 0; --k) v = v * t + c[k];
    return v;
}

double poly_deriv(const std::array<double, 6>& c, double t) {
    double v = 0.0;
    for (int k = 5; k >= 1; --k) v = v * t + k * c[k];
    return v;
}

}  // namespace

double BindingChart::f1(double r) const {
    if (r <= r_inner) return 2.0 - a * r * r;
    if (r >= 0.5) return std::exp(0.5 - r);
    return poly_eval(blend_f1, (r - r_inner) / (0.5 - r_inner));
}

double BindingChart::f2(double r) const {
    if (r <= r_inner) return r * r;
    if (r >= 0.5) return -T / kTwoPi;
    return poly_eval(blend_f2, (r - r_inner) / (0.5 - r_inner));
}

double BindingChart::df1(double r) const {
    if (r <= r_inner) return -2.0 * a * r;
    if (r >= 0.5) return -std::exp(0.5 - r);
    return poly_deriv(blend_f1, (r - r_inner) / (0.5 - r_inner)) / (0.5 - r_inner);
}

double BindingChart::df2(double r) const {
    if (r <= r_inner) return 2.0 * r;
    if (r >= 0.5) return 0.0;
    return poly_deriv(blend_f2, (r - r_inner) / (0.5 - r_inner)) / (0.5 - r_inner);
}

double BindingChart::wronskian(double r) const {
    return f1(r) * df2(r) - f2(r) * df1(r);
}

BindingChart build_profile(double T, double a, double r_inner, int validation_grid) {
    if (!(T < 0.0)) throw std::invalid_argument("twist constant T must be negative");
    if (!(a > 0.0)) throw std::invalid_argument("slope constant a must be positive");
    if (!(r_inner > 0.0 && r_inner < 0.5))
        throw std::invalid_argument("r_inner must lie in (0, 1/2)");
    if (validation_grid < 100) throw std::invalid_argument("validation grid too coarse");

    BindingChart chart;
    chart.T = T;
    chart.a = a;
    chart.r_inner = r_inner;
    const double h = 0.5 - r_inner;
    chart.blend_f1 = hermite_quintic(h, 2.0 - a * r_inner * r_inner, -2.0 * a * r_inner,
                                     -2.0 * a, std::exp(0.0), -1.0, 1.0);
    chart.blend_f2 =
        hermite_quintic(h, r_inner * r_inner, 2.0 * r_inner, 2.0, -T / kTwoPi, 0.0, 0.0);

    for (int i = 0; i <= validation_grid; ++i) {
        const double r = r_inner + h * i / validation_grid;
        if (!(chart.wronskian(r) > 0.0))
            throw std::runtime_error("contact condition fails on the blend at r = " +
                                     format_double(r) + "; adjust r_inner");
    }
    return chart;
}

ReebVelocity reeb_at(const BindingChart& chart, double r) {
    if (r < 0.0 || r > 1.0) throw std::domain_error("binding chart radius outside [0,1]");
    ReebVelocity v;
    if (r <= chart.r_inner) {
        // W = 4r, f2' = 2r, f1' = -2ar: the ratios are exact constants,
        // valid down to the r -> 0 limit.
        v.v_theta1 = 0.5;
        v.v_theta2 = chart.a / 2.0;
        return v;
    }
    const double w = chart.wronskian(r);
    if (!(w > 0.0)) throw std::runtime_error("contact form degenerates at r = " + format_double(r));
    v.v_theta1 = chart.df2(r) / w;
    v.v_theta2 = -chart.df1(r) / w;
    return v;
}

std::pair<double, double> action_angle(const BindingChart& chart, double rho, double r) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (r < 0.0 || r > 1.0) throw std::domain_error("binding chart radius outside [0,1]");
    return {rho * chart.f1(r), rho * chart.f2(r)};
}

double validate_contact(const BindingChart& chart, int grid_size) {
    if (grid_size < 100) throw std::invalid_argument("grid_size must be at least 100");
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= grid_size; ++i) {
        const double r = static_cast<double>(i) / grid_size;
        margin = std::min(margin, chart.wronskian(r));
    }
    return margin;
}

}  // namespace reeb
