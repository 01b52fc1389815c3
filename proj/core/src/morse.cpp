#include "reeb/morse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "reeb/util.hpp"

namespace reeb {

namespace {

// integral of (g0 - wc*w) * quintic_step(w) on [0,u], u in [0,1]
double collar_poly_integral(double g0, double wc, double u) {
    const double u4 = u * u * u * u;
    return g0 * u4 * (2.5 - 3.0 * u + u * u) + wc * u4 * u * (-2.0 + 2.5 * u - (6.0 / 7.0) * u * u);
}

}  // namespace

double HandleAnnulusModel::h1(double r) const {
    const double base = -0.5 * kPi * r * r + kPi * r;
    if (r >= -collar_join) return base;
    const double g0 = 1.0 - collar_join;
    const double wc = collar_lock - collar_join;
    const double u = (-collar_join - r) / wc;
    if (u <= 1.0) return base - kPi * wc * collar_poly_integral(g0, wc, u);
    const double at_lock = -kPi * wc * collar_poly_integral(g0, wc, 1.0);
    // below the lock the speed is exactly 2*pi
    const double cl = collar_lock;
    return base + at_lock + kPi * ((r + 0.5 * r * r) - (-cl + 0.5 * cl * cl));
}

double HandleAnnulusModel::dh1(double r) const {
    const double base = kPi * (1.0 - r);
    if (r >= -collar_join) return base;
    const double wc = collar_lock - collar_join;
    const double u = (-collar_join - r) / wc;
    return base + kPi * (1.0 + r) * quintic_step(u);
}

double HandleAnnulusModel::h2(double r, double theta) const {
    const double dr = r - 1.5;
    const double q = 4.0 * theta / kPi;
    return C * (1.0 - dr * dr + q * q);
}

double HandleAnnulusModel::rho(double r, double theta) const {
    if (r <= strip_lo) return 1.0;
    if (r >= strip_hi) return 0.0;
    const double sr = smooth_step((r - strip_lo) / (strip_hi - strip_lo));
    const double st = smooth_step((wall - std::abs(theta)) / corner_width);
    return 1.0 - sr * st;
}

Eigen::Vector2d HandleAnnulusModel::grad_rho(double r, double theta) const {
    if (r <= strip_lo || r >= strip_hi) return Eigen::Vector2d::Zero();
    const double ur = (r - strip_lo) / (strip_hi - strip_lo);
    const double ut = (wall - std::abs(theta)) / corner_width;
    const double sr = smooth_step(ur), st = smooth_step(ut);
    const double dsr = smooth_step_deriv(ur) / (strip_hi - strip_lo);
    const double dst = smooth_step_deriv(ut) * (theta >= 0.0 ? -1.0 : 1.0) / corner_width;
    return {-dsr * st, -sr * dst};
}

double HandleAnnulusModel::h0(double r, double theta) const {
    if (!in_domain(r, theta)) throw std::domain_error("point outside the glued model domain");
    if (r >= strip_hi) return h2(r, theta);
    const double p = rho(r, theta);
    if (p >= 1.0) return h1(r);
    return p * h1(r) + (1.0 - p) * h2(r, theta);
}

Eigen::Vector2d HandleAnnulusModel::grad_h0(double r, double theta) const {
    if (!in_domain(r, theta)) throw std::domain_error("point outside the glued model domain");
    if (r >= strip_hi) {
        const double q = 4.0 * theta / kPi;
        return {-2.0 * C * (r - 1.5), 2.0 * C * q * 4.0 / kPi};
    }
    const double p = rho(r, theta);
    if (p >= 1.0) return {dh1(r), 0.0};
    const Eigen::Vector2d gp = grad_rho(r, theta);
    const double q = 4.0 * theta / kPi;
    const Eigen::Vector2d g1(dh1(r), 0.0);
    const Eigen::Vector2d g2(-2.0 * C * (r - 1.5), 2.0 * C * q * 4.0 / kPi);
    return p * g1 + (1.0 - p) * g2 + (h1(r) - h2(r, theta)) * gp;
}

Eigen::Vector2d HandleAnnulusModel::field(double r, double theta) const {
    const Eigen::Vector2d g = grad_h0(r, theta);
    return {-g[1], g[0]};
}

double morse_h1(const HandleAnnulusModel& m, double r) {
    if (!m.in_annulus(r)) throw std::domain_error("radius outside the annulus");
    return m.h1(r);
}

double morse_h2(const HandleAnnulusModel& m, double r, double theta) {
    if (!(r >= m.strip_lo && r <= m.handle_hi && std::abs(theta) <= m.wall))
        throw std::domain_error("point outside the handle strip");
    return m.h2(r, theta);
}

double morse_h0(const HandleAnnulusModel& m, double r, double theta) { return m.h0(r, theta); }

Eigen::Vector2d morse_field(const HandleAnnulusModel& m, double r, double theta) {
    return m.field(r, theta);
}

namespace {

// predictor-corrector trace of { h0 = level } from a seed, stepping in the
// given rotational direction until r leaves [r_stop_lo, r_stop_hi]
TrimArc trace_level(const HandleAnnulusModel& m, double level, Eigen::Vector2d x, int dir,
                    double r_stop_lo, double r_stop_hi, double step, double& min_grad) {
    TrimArc arc;
    arc.points.push_back(x);
    for (int i = 0; i < 4000; ++i) {
        const Eigen::Vector2d g = m.grad_h0(x[0], x[1]);
        min_grad = std::min(min_grad, g.norm());
        Eigen::Vector2d tang(-g[1], g[0]);
        if (tang.norm() < 1e-14) break;
        tang.normalize();
        Eigen::Vector2d y = x + dir * step * tang;
        for (int it = 0; it < 5; ++it) {  // Newton back to the level
            const double f = m.h0(y[0], y[1]) - level;
            const Eigen::Vector2d gy = m.grad_h0(y[0], y[1]);
            y -= f * gy / gy.squaredNorm();
        }
        arc.points.push_back(y);
        x = y;
        if (x[0] < r_stop_lo || x[0] > r_stop_hi || std::abs(x[1]) > m.wall) break;
    }
    return arc;
}

double dist_to_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                       const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - a - t * ab).norm();
}

}  // namespace

TrimReport trim_domain(const HandleAnnulusModel& m) {
    const double eps = m.epsilon_trim;
    if (!(eps > 0.0))
        throw std::invalid_argument("trim level passes through the saddle; need epsilon_trim > 0");
    const double off = std::sqrt(eps / m.C);
    if (off >= 0.5)
        throw std::invalid_argument("trim level exits the handle; epsilon_trim too large");

    TrimReport rep;
    rep.level = m.saddle_value() - eps;
    rep.min_grad_norm = std::numeric_limits<double>::infinity();

    // the two corridor arcs through the hyperbola vertices on theta = 0
    for (double sign : {-1.0, 1.0}) {
        const Eigen::Vector2d vertex(1.5 + sign * off, 0.0);
        double mg = std::numeric_limits<double>::infinity();
        TrimArc up = trace_level(m, rep.level, vertex, +1, m.strip_hi, m.handle_hi, 0.004, mg);
        TrimArc down = trace_level(m, rep.level, vertex, -1, m.strip_hi, m.handle_hi, 0.004, mg);
        rep.min_grad_norm = std::min(rep.min_grad_norm, mg);
        TrimArc full;
        full.points.assign(down.points.rbegin(), down.points.rend());
        full.points.insert(full.points.end(), up.points.begin() + 1, up.points.end());
        rep.arcs.push_back(std::move(full));
    }

    // clearance from the cutoff discontinuity segments on the attaching edges
    const double t0 = m.discontinuity_theta_lo();
    const std::array<std::pair<Eigen::Vector2d, Eigen::Vector2d>, 4> segs{{
        {{m.strip_hi, t0}, {m.strip_hi, m.wall}},
        {{m.strip_hi, -m.wall}, {m.strip_hi, -t0}},
        {{m.handle_hi, t0}, {m.handle_hi, m.wall}},
        {{m.handle_hi, -m.wall}, {m.handle_hi, -t0}},
    }};
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& arc : rep.arcs)
        for (const auto& p : arc.points)
            for (const auto& [a, b] : segs) dmin = std::min(dmin, dist_to_segment(p, a, b));
    rep.min_discontinuity_dist = dmin;

    rep.regular = rep.min_grad_norm > 1e-6 && rep.min_discontinuity_dist > 0.0;
    if (!rep.regular)
        throw std::runtime_error("trim level regularity certificate failed at epsilon_trim = " +
                                 format_double(eps));
    return rep;
}

MorseProperties verify_properties(const HandleAnnulusModel& m, int rotation_radii,
                                  const IntegrateOptions& opt) {
    MorseProperties out;

    Field<2> f2 = [&m](const State<2>& s) -> State<2> {
        const Eigen::Vector2d v = m.field(s[0], s[1]);
        return State<2>(v[0], v[1]);
    };
    IntegrateOptions o = opt;
    o.record = false;

    // (1) suspended saddle orbit: unit-time map, Newton, Floquet
    ReturnMap2 unit_map;
    unit_map.F = [&](const Eigen::Vector2d& z) -> std::pair<Eigen::Vector2d, double> {
        const auto traj = integrate<2>(f2, State<2>(z[0], z[1]), 1.0, o);
        return {Eigen::Vector2d(traj.back()[0], traj.back()[1]), 1.0};
    };
    unit_map.fd_step = 1e-6;
    const PeriodicOrbit saddle = find_periodic_orbit(unit_map, Eigen::Vector2d(1.46, 0.03), 1e-9);
    out.saddle_location = saddle.section_point;
    const bool first_expands = std::abs(saddle.mult1) >= std::abs(saddle.mult2);
    out.mult_expanding = first_expands ? saddle.mult1 : saddle.mult2;
    out.mult_contracting = first_expands ? saddle.mult2 : saddle.mult1;
    const double e2pi = std::exp(kTwoPi);
    out.mult_rel_error =
        std::max(std::abs(std::abs(out.mult_expanding) - e2pi) / e2pi,
                 std::abs(std::abs(out.mult_contracting) - 1.0 / e2pi) * e2pi);

    // (2) rotation numbers on the invariant band |r| <= 1/2
    out.max_rotation_error = 0.0;
    for (int i = 0; i < rotation_radii; ++i) {
        const double r = -0.5 + static_cast<double>(i) / (rotation_radii - 1);
        const auto traj = integrate<2>(f2, State<2>(r, 0.0), 1.0, o);
        const double turns = (traj.back()[1] - 0.0) / kTwoPi;
        out.rotation_samples.emplace_back(r, turns);
        out.max_rotation_error =
            std::max(out.max_rotation_error, std::abs(turns - (1.0 - r) / 2.0));
    }

    // (3) identity return map on the boundary collar
    out.boundary_displacement = 0.0;
    for (double r : {-1.0, -0.99, -0.98, -m.collar_lock}) {
        const auto traj = integrate<2>(f2, State<2>(r, 0.25), 1.0, o);
        const double defect = std::abs((traj.back()[1] - 0.25) - kTwoPi);
        out.boundary_displacement = std::max(out.boundary_displacement, defect);
    }

    // energy conservation across the blend strip and the handle
    double drift = 0.0;
    const double t_run = 5.0;
    for (const auto& start : {Eigen::Vector2d(0.75, 0.45), Eigen::Vector2d(1.2, 0.15),
                              Eigen::Vector2d(0.85, -0.35)}) {
        const double e0 = m.h0(start[0], start[1]);
        const auto traj = integrate<2>(f2, State<2>(start[0], start[1]), t_run, o);
        drift = std::max(drift, std::abs(m.h0(traj.back()[0], traj.back()[1]) - e0) / t_run);
    }
    out.energy_drift_per_time = drift;

    // saddle uniqueness in the handle set: coarse grid + Newton polish
    std::vector<Eigen::Vector2d> roots;
    const int gr = 40, gt = 24;
    for (int i = 0; i <= gr; ++i) {
        for (int j = 0; j <= gt; ++j) {
            const double r = m.strip_hi + (m.handle_hi - m.strip_hi) * i / gr;
            const double th = -m.wall + 2.0 * m.wall * j / gt;
            Eigen::Vector2d x(r, th);
            if (m.field(x[0], x[1]).norm() > 2.0) continue;
            bool converged = true;
            for (int it = 0; it < 40; ++it) {
                const Eigen::Vector2d fv = m.field(x[0], x[1]);
                if (fv.norm() < 1e-12) break;
                Eigen::Matrix2d J;
                const double h = 1e-6;
                for (int c = 0; c < 2; ++c) {
                    Eigen::Vector2d xp = x, xm = x;
                    xp[c] += h;
                    xm[c] -= h;
                    J.col(c) = (m.field(xp[0], xp[1]) - m.field(xm[0], xm[1])) / (2.0 * h);
                }
                const Eigen::Vector2d dx = J.fullPivLu().solve(-fv);
                x += dx;
                if (!m.in_handle(x[0], x[1])) {
                    converged = false;
                    break;
                }
            }
            if (!converged || m.field(x[0], x[1]).norm() > 1e-10) continue;
            bool known = false;
            for (const auto& rt : roots)
                if ((rt - x).norm() < 1e-6) known = true;
            if (!known) roots.push_back(x);
        }
    }
    out.saddle_unique = roots.size() == 1 && (roots[0] - m.saddle()).norm() < 1e-8;

    out.ok = out.mult_rel_error < 1e-4 && out.max_rotation_error < 1e-6 &&
             out.boundary_displacement < 1e-8 && out.energy_drift_per_time < 1e-8 &&
             out.saddle_unique;
    if (!out.ok) throw std::runtime_error("handle-annulus model property verification failed");
    return out;
}

std::vector<LevelPolyline> morse_level_sets(const HandleAnnulusModel& m,
                                            const std::vector<double>& levels, int grid) {
    // marching squares over the glued domain; segments joined into polylines
    std::vector<LevelPolyline> out;
    const double r_lo = -1.0, r_hi = m.handle_hi;
    const double t_lo = -kPi, t_hi = kPi;
    const int nr = grid, nt = grid;
    const double dr = (r_hi - r_lo) / nr, dt = (t_hi - t_lo) / nt;

    auto value = [&](int i, int j, bool& ok) -> double {
        const double r = r_lo + i * dr, th = t_lo + j * dt;
        if (!m.in_domain(r, th)) {
            ok = false;
            return 0.0;
        }
        ok = true;
        return m.h0(r, th);
    };

    for (double level : levels) {
        std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> segs;
        for (int i = 0; i < nr; ++i) {
            for (int j = 0; j < nt; ++j) {
                bool ok00, ok10, ok01, ok11;
                const double v00 = value(i, j, ok00), v10 = value(i + 1, j, ok10);
                const double v01 = value(i, j + 1, ok01), v11 = value(i + 1, j + 1, ok11);
                if (!(ok00 && ok10 && ok01 && ok11)) continue;
                const double r0 = r_lo + i * dr, t0 = t_lo + j * dt;
                std::vector<Eigen::Vector2d> pts;
                auto edge = [&](double va, double vb, Eigen::Vector2d a, Eigen::Vector2d b) {
                    if ((va - level) * (vb - level) < 0.0) {
                        const double s = (level - va) / (vb - va);
                        pts.push_back(a + s * (b - a));
                    }
                };
                edge(v00, v10, {r0, t0}, {r0 + dr, t0});
                edge(v10, v11, {r0 + dr, t0}, {r0 + dr, t0 + dt});
                edge(v11, v01, {r0 + dr, t0 + dt}, {r0, t0 + dt});
                edge(v01, v00, {r0, t0 + dt}, {r0, t0});
                if (pts.size() == 2) segs.emplace_back(pts[0], pts[1]);
            }
        }
        // stitch segments into polylines by quantized endpoints
        auto key = [&](const Eigen::Vector2d& p) {
            return std::make_pair(static_cast<long long>(std::llround(p[0] * 1e7)),
                                  static_cast<long long>(std::llround(p[1] * 1e7)));
        };
        std::multimap<std::pair<long long, long long>, std::size_t> by_end;
        std::vector<bool> usedseg(segs.size(), false);
        for (std::size_t s = 0; s < segs.size(); ++s) {
            by_end.emplace(key(segs[s].first), s);
            by_end.emplace(key(segs[s].second), s);
        }
        for (std::size_t s = 0; s < segs.size(); ++s) {
            if (usedseg[s]) continue;
            usedseg[s] = true;
            std::vector<Eigen::Vector2d> line{segs[s].first, segs[s].second};
            bool grew = true;
            while (grew) {
                grew = false;
                auto range = by_end.equal_range(key(line.back()));
                for (auto it = range.first; it != range.second; ++it) {
                    const std::size_t cand = it->second;
                    if (usedseg[cand]) continue;
                    usedseg[cand] = true;
                    const auto& sg = segs[cand];
                    line.push_back(key(sg.first) == key(line.back()) ? sg.second : sg.first);
                    grew = true;
                    break;
                }
            }
            out.push_back({level, std::move(line)});
        }
    }
    return out;
}

}  // namespace reeb
