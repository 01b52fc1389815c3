#include "reeb/flow.hpp"

#include <cmath>
#include <random>

#include "reeb/util.hpp"

namespace reeb {

Eigen::Matrix2d return_map_jacobian(const ReturnMap2& map, const Eigen::Vector2d& x) {
    Eigen::Matrix2d J;
    for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d xp = x, xm = x;
        xp[j] += map.fd_step;
        xm[j] -= map.fd_step;
        const Eigen::Vector2d fp = map.F(xp).first;
        const Eigen::Vector2d fm = map.F(xm).first;
        J.col(j) = (fp - fm) / (2.0 * map.fd_step);
    }
    return J;
}

namespace {

std::pair<std::complex<double>, std::complex<double>> eig2(const Eigen::Matrix2d& J) {
    const double tr = J.trace(), det = J.determinant();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
    return {tr / 2.0 + disc, tr / 2.0 - disc};
}

void refuse_if_degenerate(const Eigen::Matrix2d& J, const char* where) {
    auto [m1, m2] = eig2(J);
    if (std::abs(m1 - 1.0) < 1e-6 || std::abs(m2 - 1.0) < 1e-6)
        throw DegenerateOrbitError(std::string("linearized return map has an eigenvalue 1 (") +
                                   where + "); orbit is not isolated");
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const ReturnMap2& map, const Eigen::Vector2d& seed, double tol,
                                  int max_iter) {
    Eigen::Vector2d x = seed;
    Eigen::Matrix2d J = return_map_jacobian(map, x);
    refuse_if_degenerate(J, "at the seed");

    double res = std::numeric_limits<double>::infinity();
    double period = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        auto [fx, tau] = map.F(x);
        period = tau;
        const Eigen::Vector2d g = fx - x;
        res = g.norm();
        if (res < tol) break;
        J = return_map_jacobian(map, x);
        const Eigen::Matrix2d A = J - Eigen::Matrix2d::Identity();
        const Eigen::Vector2d dx = A.fullPivLu().solve(-g);
        if (!dx.allFinite() || dx.norm() > 1e3)
            throw FlowError("Newton step diverged while locating a periodic orbit");
        x += dx;
    }
    if (res >= tol) throw FlowError("Newton did not converge to a periodic orbit");

    J = return_map_jacobian(map, x);
    refuse_if_degenerate(J, "at the orbit");
    auto [m1, m2] = eig2(J);
    PeriodicOrbit orbit;
    orbit.section_point = x;
    orbit.period = period;
    orbit.mult1 = m1;
    orbit.mult2 = m2;
    orbit.residual = res;
    orbit.newton_iterations = it;
    return orbit;
}

Field<3> binding_field(const BindingChart& chart) {
    return [chart](const State<3>& s) -> State<3> {
        const ReebVelocity v = reeb_at(chart, s[1]);
        return State<3>(v.v_theta1, 0.0, v.v_theta2);
    };
}

Field<3> mapping_torus_field() {
    return [](const State<3>&) -> State<3> { return State<3>(0.0, 0.0, 1.0); };
}

Transition<3> mapping_torus_wrap(const Monodromy& m) {
    Transition<3> tr;
    tr.trigger = [m](const State<3>& s) { return s[2] + m.shift(s[0]); };
    tr.apply = [m](const State<3>& s) -> State<3> {
        return State<3>(s[0], s[1] + m.twist(s[0]), s[2] + m.shift(s[0]));
    };
    return tr;
}

State<3> mapping_torus_normalize(const Monodromy& m, State<3> s) {
    // tolerate tiny negative overshoot from event location
    while (s[2] >= -m.shift(s[0]) - 1e-12) {
        s[1] += m.twist(s[0]);
        s[2] += m.shift(s[0]);
    }
    if (s[2] < 0.0 && s[2] > -1e-9) s[2] = 0.0;
    return s;
}

// --------------------------------------------------------------------------
// perturbed binding dynamics
// --------------------------------------------------------------------------

double BindingPerturbation::cutoff(double rho) const {
    // 1 on [0, r_support/2], 0 beyond r_support
    return 1.0 - smooth_step((rho - 0.5 * r_support) / (0.5 * r_support));
}

Eigen::Vector2d BindingPerturbation::eval(double x, double y, double t) const {
    const double c = cutoff(std::sqrt(x * x + y * y));
    double hx = lin_x * x * std::cos(t);
    double hy = lin_y * y * std::sin(2.0 * t);
    for (int k = 0; k < 3; ++k) {
        hx += cx[k] * std::sin((k + 1) * t + px[k]);
        hy += cy[k] * std::cos((k + 1) * t + py[k]);
    }
    return c * Eigen::Vector2d(hx, hy);
}

BindingPerturbation make_binding_perturbation(std::uint64_t seed, double r_support) {
    BindingPerturbation p;
    p.seed = seed;
    p.r_support = r_support;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::normal_distribution<double> amp(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        p.cx[k] = amp(rng) / (k + 1);
        p.px[k] = angle(rng);
        p.cy[k] = amp(rng) / (k + 1);
        p.py[k] = angle(rng);
    }
    p.lin_x = 0.3 * amp(rng);
    p.lin_y = 0.3 * amp(rng);
    return p;
}

namespace {

// Raw chart field near the axis in (x, y, t) coordinates, t the binding angle.
// Unperturbed: ((a/2)(-y, x), 1/2); the perturbation acts transversally.
struct XytField {
    double a;
    double delta;
    const BindingPerturbation* h;

    State<3> operator()(const State<3>& s) const {
        const double x = s[0], y = s[1], t = s[2];
        Eigen::Vector2d v(-0.5 * a * y, 0.5 * a * x);
        if (delta != 0.0) v += delta * h->eval(x, y, t);
        return State<3>(v[0], v[1], 0.5);
    }
};

}  // namespace

Eigen::Vector2d BindingContinuation::gamma_at(double t) const {
    if (gamma.empty()) return Eigen::Vector2d::Zero();
    double w = std::fmod(t, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    const std::size_t n = gamma.size() - 1;  // gamma[n] == gamma at 2*pi
    const double step = kTwoPi / static_cast<double>(n);
    std::size_t i = std::min(static_cast<std::size_t>(w / step), n - 1);
    const double u = (w - i * step) / step;
    return (1.0 - u) * gamma[i] + u * gamma[i + 1];
}

Eigen::Vector2d BindingContinuation::gamma_prime_at(double t) const {
    if (gamma.empty()) return Eigen::Vector2d::Zero();
    const double h = 1e-4;
    return (gamma_at(t + h) - gamma_at(t - h)) / (2.0 * h);
}

BindingContinuation continue_binding_orbit(const BindingChart& chart,
                                           const BindingPerturbation& h, double delta,
                                           const IntegrateOptions& opt) {
    if (delta < 0.0) throw std::invalid_argument("delta must be non-negative");
    BindingContinuation out;
    out.delta = delta;
    // normalized field: angular component scaled to 1, transverse motion
    // twice the raw rates
    const double a = chart.a;
    auto normalized = [&](double t, const Eigen::Vector2d& z) -> Eigen::Vector2d {
        Eigen::Vector2d v(-a * z[1], a * z[0]);
        if (delta != 0.0) v += 2.0 * delta * h.eval(z[0], z[1], t);
        return v;
    };
    // return map over one angular period, integrated in the angle variable
    auto angular_map = [&](const Eigen::Vector2d& z0) -> std::pair<Eigen::Vector2d, double> {
        Field<3> f = [&](const State<3>& s) -> State<3> {
            const Eigen::Vector2d v = normalized(s[2], Eigen::Vector2d(s[0], s[1]));
            return State<3>(v[0], v[1], 1.0);
        };
        IntegrateOptions o = opt;
        o.record = false;
        const auto traj = integrate<3>(f, State<3>(z0[0], z0[1], 0.0), kTwoPi, o);
        return {Eigen::Vector2d(traj.back()[0], traj.back()[1]), kTwoPi};
    };

    if (delta == 0.0) {
        out.success = true;
        out.fixed_point.setZero();
        out.displacement = 0.0;
        out.period = 2.0 * kTwoPi;  // angular speed 1/2 along the axis orbit
        out.residual = 0.0;
        out.mult1 = std::polar(1.0, kTwoPi * a);
        out.mult2 = std::polar(1.0, -kTwoPi * a);
        const int n = 128;
        out.ts.resize(n + 1);
        out.gamma.assign(n + 1, Eigen::Vector2d::Zero());
        for (int i = 0; i <= n; ++i) out.ts[i] = kTwoPi * i / n;
        return out;
    }

    ReturnMap2 rm;
    rm.F = angular_map;
    rm.fd_step = std::max(1e-7, 1e-3 * delta);
    try {
        const PeriodicOrbit po = find_periodic_orbit(rm, Eigen::Vector2d::Zero(), 1e-10);
        out.success = true;
        out.fixed_point = po.section_point;
        out.residual = po.residual;
        out.newton_iterations = po.newton_iterations;
        out.mult1 = po.mult1;
        out.mult2 = po.mult2;
    } catch (const FlowError&) {
        out.success = false;
        out.residual = (angular_map(out.fixed_point).first - out.fixed_point).norm();
        return out;
    }

    // sample the orbit over one angular period
    Field<3> f = [&](const State<3>& s) -> State<3> {
        const Eigen::Vector2d v = normalized(s[2], Eigen::Vector2d(s[0], s[1]));
        return State<3>(v[0], v[1], 1.0);
    };
    const int n = 256;
    out.ts.resize(n + 1);
    out.gamma.resize(n + 1);
    State<3> s(out.fixed_point[0], out.fixed_point[1], 0.0);
    out.ts[0] = 0.0;
    out.gamma[0] = out.fixed_point;
    IntegrateOptions o = opt;
    o.record = false;
    for (int i = 1; i <= n; ++i) {
        const auto traj = integrate<3>(f, s, kTwoPi / n, o);
        s = traj.back();
        out.ts[i] = kTwoPi * i / n;
        out.gamma[i] = Eigen::Vector2d(s[0], s[1]);
    }
    double disp = 0.0;
    for (const auto& g : out.gamma) disp = std::max(disp, g.norm());
    out.displacement = disp;
    out.period = 2.0 * kTwoPi;  // the angular component stays 1/2 under transverse forcing
    return out;
}

TransversalityReport transversality_margin(const BindingChart& chart,
                                           const BindingPerturbation& h, double delta,
                                           double probe_radius, int n_probes,
                                           std::uint64_t probe_seed,
                                           const IntegrateOptions& opt) {
    TransversalityReport rep;
    rep.delta = delta;
    rep.probe_radius = probe_radius;
    const BindingContinuation cont = continue_binding_orbit(chart, h, delta, opt);
    rep.continuation_ok = cont.success;
    if (!cont.success) return rep;

    const double a = chart.a;
    XytField raw{a, delta, &h};

    // recentering cutoff: 1 within probe_radius of the axis, 0 beyond twice that
    auto rc = [&](double rho) {
        return 1.0 - smooth_step((rho - probe_radius) / probe_radius);
    };
    auto drc = [&](double rho) {
        return -smooth_step_deriv((rho - probe_radius) / probe_radius) / probe_radius;
    };

    std::mt19937_64 rng(probe_seed);
    std::uniform_real_distribution<double> uang(0.0, kTwoPi);
    std::uniform_real_distribution<double> urad(0.0, probe_radius);

    double margin = std::numeric_limits<double>::infinity();
    int used = 0, excluded = 0;
    for (int i = 0; i < n_probes; ++i) {
        const double t = uang(rng), phi = uang(rng), rad = urad(rng);
        const Eigen::Vector2d g = cont.gamma_at(t);
        const double x = g[0] + rad * std::cos(phi);
        const double y = g[1] + rad * std::sin(phi);
        const double rho = std::sqrt(x * x + y * y);

        const State<3> vel = raw(State<3>(x, y, t));
        const double xdot = vel[0], ydot = vel[1], tdot = vel[2];
        const Eigen::Vector2d gp = cont.gamma_prime_at(t);  // d gamma / d angle

        const double c = rc(rho);
        const double u = x - c * g[0];
        const double v = y - c * g[1];
        const double s2 = u * u + v * v;
        if (s2 < 1e-18) {
            ++excluded;  // probes on the continued orbit carry no information
            continue;
        }
        const double rhodot = rho > 1e-300 ? (x * xdot + y * ydot) / rho : 0.0;
        const double cdot = drc(rho) * rhodot;
        const double udot = xdot - cdot * g[0] - c * gp[0] * tdot;
        const double vdot = ydot - cdot * g[1] - c * gp[1] * tdot;
        const double omega = u * vdot - v * udot;
        margin = std::min(margin, omega / s2);
        ++used;
    }
    rep.margin = margin;
    rep.probes_used = used;
    rep.probes_excluded = excluded;

    // linearization of the normalized field about the continued orbit at t=0,
    // rotated into the quadratic form that must be positive definite
    auto normalized_xy = [&](const Eigen::Vector2d& z, double t) -> Eigen::Vector2d {
        Eigen::Vector2d v(-a * z[1], a * z[0]);
        if (delta != 0.0) v += 2.0 * delta * h.eval(z[0], z[1], t);
        return v;
    };
    const double fd = 1e-6;
    Eigen::Matrix2d A;
    for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d zp = cont.fixed_point, zm = cont.fixed_point;
        zp[j] += fd;
        zm[j] -= fd;
        A.col(j) = (normalized_xy(zp, 0.0) - normalized_xy(zm, 0.0)) / (2.0 * fd);
    }
    Eigen::Matrix2d Jrot;
    Jrot << 0.0, 1.0, -1.0, 0.0;
    rep.normalized_form = Jrot * A;
    return rep;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory<3>& traj) {
    CsvWriter csv(path, {"t", "chart", "c0", "c1", "c2"});
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        csv.row_mixed({format_double(traj.t[i]), traj.chart.empty() ? "-" : traj.chart,
                       format_double(traj.x[i][0]), format_double(traj.x[i][1]),
                       format_double(traj.x[i][2])});
}

}  // namespace reeb
