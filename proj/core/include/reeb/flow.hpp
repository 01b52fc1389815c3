#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reeb/contact.hpp"
#include "reeb/open_book.hpp"

namespace reeb {

// ---------------------------------------------------------------------------
// Chart flows: adaptive embedded Runge-Kutta 5(4) with dense output, event
// (section-crossing) location, and registered chart-transition maps.  Return
// maps feed a Newton fixed-point solver that also extracts Floquet data.
// ---------------------------------------------------------------------------

struct FlowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateOrbitError : FlowError {
    using FlowError::FlowError;
};

struct IntegrateOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    double h_init = 1e-3;
    double h_max = 0.25;
    long max_steps = 4'000'000;
    bool record = true;  // keep accepted samples
};

template <int N>
using State = Eigen::Matrix<double, N, 1>;

template <int N>
using Field = std::function<State<N>(const State<N>&)>;

// Fires when `trigger` crosses zero from below along the flow; `apply`
// teleports the state (a chart overlap map).
template <int N>
struct Transition {
    std::function<double(const State<N>&)> trigger;
    std::function<State<N>(const State<N>&)> apply;
};

template <int N>
struct Trajectory {
    std::vector<double> t;
    std::vector<State<N>> x;
    std::string chart;
    double abs_tol = 0.0, rel_tol = 0.0;
    int transitions_taken = 0;
    const State<N>& back() const { return x.back(); }
};

namespace detail {

// Dormand-Prince 5(4) step with the classic quartic interpolant.
template <int N>
struct Dopri5Step {
    State<N> y0, y1;
    State<N> k[7];
    double t0 = 0.0, h = 0.0;
    double err = 0.0;
    State<N> rc1, rc2, rc3, rc4, rc5;

    void compute(const Field<N>& f, const State<N>& y, double t, double hstep,
                 const State<N>* k1_fsal) {
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        y0 = y;
        t0 = t;
        h = hstep;
        k[0] = k1_fsal ? *k1_fsal : f(y);
        k[1] = f(y + h * (a21 * k[0]));
        k[2] = f(y + h * (a31 * k[0] + a32 * k[1]));
        k[3] = f(y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
        k[4] = f(y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
        k[5] = f(y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]));
        y1 = y + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
        k[6] = f(y1);
        err = 0.0;
        const State<N> ev =
            h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
        errv = ev;
    }

    State<N> errv;

    void prepare_dense() {
        static constexpr double d1 = -12715105075.0 / 11282082432.0;
        static constexpr double d3 = 87487479700.0 / 32700410799.0;
        static constexpr double d4 = -10690763975.0 / 1880347072.0;
        static constexpr double d5 = 701980252875.0 / 199316789632.0;
        static constexpr double d6 = -1453857185.0 / 822651844.0;
        static constexpr double d7 = 69997945.0 / 29380423.0;
        rc1 = y0;
        rc2 = y1 - y0;
        rc3 = h * k[0] - rc2;
        rc4 = rc2 - h * k[6] - rc3;
        rc5 = h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] + d6 * k[5] + d7 * k[6]);
    }

    State<N> dense(double theta) const {
        const double th1 = 1.0 - theta;
        return rc1 + theta * (rc2 + th1 * (rc3 + theta * (rc4 + th1 * rc5)));
    }
};

template <int N>
double error_norm(const State<N>& e, const State<N>& y0, const State<N>& y1, double atol,
                  double rtol) {
    double norm = 0.0;
    for (int i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = e[i] / sc;
        norm += q * q;
    }
    return std::sqrt(norm / N);
}

}  // namespace detail

// Integrates the autonomous field from x0 for time t_end (> 0), applying
// registered transitions when their triggers cross zero from below.
template <int N>
Trajectory<N> integrate(const Field<N>& f, const State<N>& x0, double t_end,
                        const IntegrateOptions& opt = {},
                        const std::vector<Transition<N>>& transitions = {},
                        const std::string& chart_tag = "") {
    if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be non-negative");
    Trajectory<N> traj;
    traj.chart = chart_tag;
    traj.abs_tol = opt.abs_tol;
    traj.rel_tol = opt.rel_tol;
    double t = 0.0;
    State<N> y = x0;
    if (opt.record) {
        traj.t.push_back(t);
        traj.x.push_back(y);
    }
    if (t_end == 0.0) {
        if (!opt.record) {
            traj.t.push_back(t);
            traj.x.push_back(y);
        }
        return traj;
    }
    double h = std::min({opt.h_init, opt.h_max, t_end});
    detail::Dopri5Step<N> step;
    State<N> k1 = f(y);
    bool have_fsal = true;
    long nsteps = 0;
    while (t < t_end) {
        if (++nsteps > opt.max_steps) throw FlowError("integrator exceeded max step count");
        h = std::min(h, t_end - t);
        if (h < 1e-15 * std::max(1.0, std::abs(t)))
            throw FlowError("integrator step size underflow");
        step.compute(f, y, t, h, have_fsal ? &k1 : nullptr);
        const double err =
            detail::error_norm<N>(step.errv, step.y0, step.y1, opt.abs_tol, opt.rel_tol);
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
            have_fsal = true;  // k1 unchanged
            continue;
        }
        // accepted
        double t_next = t + h;
        State<N> y_next = step.y1;
        bool transitioned = false;
        for (const auto& tr : transitions) {
            const double g0 = tr.trigger(step.y0);
            const double g1 = tr.trigger(step.y1);
            if (g0 < 0.0 && g1 >= 0.0) {
                step.prepare_dense();
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (tr.trigger(step.dense(mid)) < 0.0 ? lo : hi) = mid;
                }
                const double th = hi;
                y_next = tr.apply(step.dense(th));
                t_next = t + th * h;
                ++traj.transitions_taken;
                transitioned = true;
                break;
            }
        }
        t = t_next;
        y = y_next;
        if (opt.record) {
            traj.t.push_back(t);
            traj.x.push_back(y);
        }
        if (transitioned) {
            k1 = f(y);
            have_fsal = true;
        } else {
            k1 = step.k[6];
            have_fsal = true;
        }
        h = std::min(opt.h_max, h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2))));
    }
    if (!opt.record) {
        traj.t.push_back(t);
        traj.x.push_back(y);
    }
    return traj;
}

// Section crossing: g(x) passing through zero with positive flow derivative.
template <int N>
struct Section {
    std::function<double(const State<N>&)> g;
};

template <int N>
struct EventResult {
    State<N> x;
    double t = 0.0;
};

// First crossing of the section after t_min, watching for at most t_cap.
// Throws FlowError when no crossing occurs within the cap.
template <int N>
EventResult<N> integrate_to_event(const Field<N>& f, const State<N>& x0,
                                  const Section<N>& section, double t_cap,
                                  const IntegrateOptions& opt = {},
                                  const std::vector<Transition<N>>& transitions = {},
                                  double t_min = 0.0) {
    double t = 0.0;
    State<N> y = x0;
    double h = std::min(opt.h_init, opt.h_max);
    detail::Dopri5Step<N> step;
    State<N> k1 = f(y);
    long nsteps = 0;
    while (t < t_cap) {
        if (++nsteps > opt.max_steps) throw FlowError("event search exceeded max step count");
        h = std::min(h, t_cap - t);
        if (h < 1e-15 * std::max(1.0, std::abs(t)))
            throw FlowError("integrator step size underflow");
        step.compute(f, y, t, h, &k1);
        const double err =
            detail::error_norm<N>(step.errv, step.y0, step.y1, opt.abs_tol, opt.rel_tol);
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
            continue;
        }
        double t_next = t + h;
        State<N> y_next = step.y1;
        bool jumped = false;

        const double g0 = section.g(step.y0);
        const double g1 = section.g(step.y1);
        if (t + h > t_min && g0 < 0.0 && g1 >= 0.0) {
            step.prepare_dense();
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (section.g(step.dense(mid)) < 0.0 ? lo : hi) = mid;
            }
            const double tc = t + hi * h;
            if (tc > t_min) return {step.dense(hi), tc};
        }
        for (const auto& tr : transitions) {
            const double q0 = tr.trigger(step.y0);
            const double q1 = tr.trigger(step.y1);
            if (q0 < 0.0 && q1 >= 0.0) {
                step.prepare_dense();
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (tr.trigger(step.dense(mid)) < 0.0 ? lo : hi) = mid;
                }
                y_next = tr.apply(step.dense(hi));
                t_next = t + hi * h;
                jumped = true;
                break;
            }
        }
        t = t_next;
        y = y_next;
        k1 = jumped ? f(y) : step.k[6];
        h = std::min(opt.h_max, h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2))));
    }
    throw FlowError("no section crossing within the time cap");
}

// ---------------------------------------------------------------------------
// Return maps and periodic orbits
// ---------------------------------------------------------------------------

// A planar return map together with the return time.
struct ReturnMap2 {
    std::function<std::pair<Eigen::Vector2d, double>(const Eigen::Vector2d&)> F;
    double fd_step = 1e-6;
};

struct PeriodicOrbit {
    Eigen::Vector2d section_point = Eigen::Vector2d::Zero();
    double period = 0.0;
    std::string block;
    std::complex<double> mult1, mult2;
    double residual = 0.0;
    int newton_iterations = 0;
};

Eigen::Matrix2d return_map_jacobian(const ReturnMap2& map, const Eigen::Vector2d& x);

// Newton iteration on F(x) - x.  Refuses orbits whose linearized return map
// has an eigenvalue within 1e-6 of 1 (checked at the seed and at the result).
PeriodicOrbit find_periodic_orbit(const ReturnMap2& map, const Eigen::Vector2d& seed,
                                  double tol, int max_iter = 60);

// ---------------------------------------------------------------------------
// Binding-chart drivers
// ---------------------------------------------------------------------------

// Flow in (theta1, r, theta2) coordinates; angles are left unwrapped.
Field<3> binding_field(const BindingChart& chart);

// Mapping-torus flow for an annulus book: state (x, theta_page, theta) with
// field (0,0,1) and the wrap (x, p, -shift(x)) -> (x, p + twist(x), 0).
Field<3> mapping_torus_field();
Transition<3> mapping_torus_wrap(const Monodromy& m);
// Reduce theta into [0, -shift(x)) applying the monodromy as needed.
State<3> mapping_torus_normalize(const Monodromy& m, State<3> s);

// ---------------------------------------------------------------------------
// Perturbed binding orbit (normalized-field continuation) and the
// transversality margin around it
// ---------------------------------------------------------------------------

// Seeded trigonometric transverse perturbation with a radial cutoff that
// keeps its support inside the closed-form inner region of the chart.
struct BindingPerturbation {
    std::uint64_t seed = 1;
    double r_support = 0.2;  // cutoff vanishes for sqrt(x^2+y^2) >= r_support
    std::array<double, 3> cx{}, px{}, cy{}, py{};
    double lin_x = 0.0, lin_y = 0.0;

    // transverse components (h_x, h_y), 2*pi-periodic in t
    Eigen::Vector2d eval(double x, double y, double t) const;
    double cutoff(double rho) const;
};

BindingPerturbation make_binding_perturbation(std::uint64_t seed, double r_support);

struct BindingContinuation {
    bool success = false;
    double delta = 0.0;
    Eigen::Vector2d fixed_point = Eigen::Vector2d::Zero();
    double displacement = 0.0;  // max distance of the orbit from the axis r=0
    double period = 0.0;        // in flow time
    double residual = 0.0;
    int newton_iterations = 0;
    std::complex<double> mult1, mult2;
    // orbit samples over one angular period, gamma(t), t in [0, 2*pi]
    std::vector<double> ts;
    std::vector<Eigen::Vector2d> gamma;

    Eigen::Vector2d gamma_at(double t) const;      // periodic interpolation
    Eigen::Vector2d gamma_prime_at(double t) const;
};

// Newton continuation of the central binding orbit in the normalized field
// (angular component scaled to 1).  delta = 0 returns the axis orbit itself.
// Failure is reported through success=false with the last residual.
BindingContinuation continue_binding_orbit(const BindingChart& chart,
                                           const BindingPerturbation& h, double delta,
                                           const IntegrateOptions& opt = {});

struct TransversalityReport {
    double delta = 0.0;
    double margin = 0.0;  // min over probes of Omega(R)/(u^2+v^2)
    bool continuation_ok = false;
    int probes_used = 0;
    int probes_excluded = 0;
    double probe_radius = 0.0;
    Eigen::Matrix2d normalized_form = Eigen::Matrix2d::Zero();  // J * A at the orbit
};

TransversalityReport transversality_margin(const BindingChart& chart,
                                           const BindingPerturbation& h, double delta,
                                           double probe_radius, int n_probes,
                                           std::uint64_t probe_seed = 7,
                                           const IntegrateOptions& opt = {});

// CSV export, columns t,chart,c0,c1,c2.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory<3>& traj);

}  // namespace reeb
