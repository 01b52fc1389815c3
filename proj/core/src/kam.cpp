#include "reeb/kam.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "reeb/util.hpp"

namespace reeb {

namespace {

// integral of the quintic step on [0,u], u in [0,1]
double quintic_step_integral(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 0.5;
    const double u4 = u * u * u * u;
    return u4 * (2.5 - 3.0 * u + u * u);
}

struct RampShape {
    double slope;
    static constexpr double rise_lo = 0.10, rise_hi = 0.115;
    static constexpr double fall_lo = 0.225, fall_hi = 0.24;
    static constexpr double drop_lo = 0.30, drop_hi = 0.40;
    static constexpr double shoulder = rise_hi - rise_lo;

    double plateau() const { return slope * (shoulder + (fall_lo - rise_hi)); }

    double value(double r) const {
        if (r <= rise_lo) return 0.0;
        if (r < rise_hi)
            return slope * shoulder * quintic_step_integral((r - rise_lo) / shoulder);
        if (r <= fall_lo) return slope * (0.5 * shoulder + (r - rise_hi));
        if (r < fall_hi) {
            const double u = (r - fall_lo) / shoulder;
            return slope * (0.5 * shoulder + (fall_lo - rise_hi) + shoulder * (0.5 - quintic_step_integral(1.0 - u)));
        }
        if (r <= drop_lo) return plateau();
        if (r < drop_hi)
            return plateau() * (1.0 - quintic_step((r - drop_lo) / (drop_hi - drop_lo)));
        return 0.0;
    }

    double deriv(double r) const {
        if (r <= rise_lo || r >= drop_hi) return 0.0;
        if (r < rise_hi) return slope * quintic_step((r - rise_lo) / shoulder);
        if (r <= fall_lo) return slope;
        if (r < fall_hi) return slope * quintic_step(1.0 - (r - fall_lo) / shoulder);
        if (r <= drop_lo) return 0.0;
        return -plateau() * quintic_step_deriv((r - drop_lo) / (drop_hi - drop_lo)) /
               (drop_hi - drop_lo);
    }
};

}  // namespace

double ModifiedHamiltonian::value(double I1, double I2) const {
    const double s = I1 + a * I2;
    const double r = radius(I1, I2);
    const double gr = (g && r > r_zero) ? g(r) : 0.0;
    return 0.5 * s * s + gr;
}

double ModifiedHamiltonian::radius(double I1, double I2) const {
    const double s = I1 + a * I2;
    if (!(s > 0.0)) throw std::invalid_argument("action combination I1 + a*I2 must be positive");
    return std::sqrt(2.0 * I2 / s);
}

ModifiedHamiltonian ModifiedHamiltonian::flat(double a) {
    ModifiedHamiltonian H;
    H.a = a;
    H.g = nullptr;
    H.dg = nullptr;
    return H;
}

ModifiedHamiltonian ModifiedHamiltonian::with_default_ramp(double a, double amplitude) {
    ModifiedHamiltonian H;
    H.a = a;
    RampShape shape{amplitude / 0.125};
    H.g = [shape](double r) { return shape.value(r); };
    H.dg = [shape](double r) { return shape.deriv(r); };
    H.r_zero = RampShape::rise_lo;
    return H;
}

Eigen::Vector2d frequency(const ModifiedHamiltonian& H, double I1, double I2) {
    const double S = I1 + H.a * I2;
    if (!(S > 0.0)) throw std::invalid_argument("action combination I1 + a*I2 must be positive");
    Eigen::Vector2d omega(S, H.a * S);
    if (H.dg) {
        const double r = std::sqrt(2.0 * std::max(I2, 0.0) / S);
        const double gp = H.dg(r);
        if (gp != 0.0 && r > 0.0) {
            const double dr_dI1 = -r / (2.0 * S);
            const double dr_dI2 = I1 / (r * S * S);
            omega[0] += gp * dr_dI1;
            omega[1] += gp * dr_dI2;
        }
    }
    return omega;
}

double nondegeneracy(const ModifiedHamiltonian& H, double r_lo, double r_hi, int grid) {
    if (grid < 2) throw std::invalid_argument("grid must have at least 2 points");
    double min_det = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        const double r = r_lo + (r_hi - r_lo) * i / (grid - 1);
        const double I1 = 2.0 - H.a * r * r;  // inner-profile actions at rho = 1
        const double I2 = r * r;
        const double h = 1e-2;
        auto f = [&](double x, double y) { return H.value(x, y); };
        const double H11 = (f(I1 + h, I2) - 2.0 * f(I1, I2) + f(I1 - h, I2)) / (h * h);
        const double H22 = (f(I1, I2 + h) - 2.0 * f(I1, I2) + f(I1, I2 - h)) / (h * h);
        const double H12 = (f(I1 + h, I2 + h) - f(I1 + h, I2 - h) - f(I1 - h, I2 + h) +
                            f(I1 - h, I2 - h)) /
                           (4.0 * h * h);
        min_det = std::min(min_det, std::abs(H11 * H22 - H12 * H12));
    }
    return min_det;
}

DiophantineReport diophantine(double x, double alpha, double beta, long K) {
    if (!(alpha > 0.0) || !(beta > 0.0) || K < 100)
        throw std::invalid_argument("need alpha, beta > 0 and K >= 100");
    DiophantineReport rep;
    rep.vector_mode = false;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (long q = 1; q <= K; ++q) {
        const long p = std::lround(x * q);
        const double margin = std::abs(x - static_cast<double>(p) / q) * std::pow(q, beta);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.p = p;
            rep.q = q;
        }
    }
    rep.pass = rep.worst_margin >= alpha;
    return rep;
}

DiophantineReport diophantine(const Eigen::Vector2d& omega, double c, double gamma, long K) {
    if (!(c > 0.0) || !(gamma > 0.0) || K < 100)
        throw std::invalid_argument("need c, gamma > 0 and K >= 100");
    DiophantineReport rep;
    rep.vector_mode = true;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (long k1 = 0; k1 <= K; ++k1) {
        for (long k2 = (k1 == 0 ? 1 : -K); k2 <= K; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double inner = std::abs(k1 * omega[0] + k2 * omega[1]);
            const double norm = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
            const double margin = inner * c * std::pow(norm, gamma);
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.k = Eigen::Vector2i(static_cast<int>(k1), static_cast<int>(k2));
            }
        }
    }
    rep.pass = rep.worst_margin >= 1.0;
    return rep;
}

// --------------------------------------------------------------------------
// twist maps
// --------------------------------------------------------------------------

double GeneratingPerturbation::taper(double r) const {
    return smooth_step((1.0 - std::abs(r)) / (1.0 - taper_edge));
}

double GeneratingPerturbation::dtaper(double r) const {
    const double u = (1.0 - std::abs(r)) / (1.0 - taper_edge);
    return smooth_step_deriv(u) * (r >= 0.0 ? -1.0 : 1.0) / (1.0 - taper_edge);
}

double GeneratingPerturbation::s(double rp, double theta) const {
    double v = 0.0, w = 0.0;
    for (int k = 0; k < 3; ++k) {
        v += c[k] * std::sin((k + 1) * theta + phase[k]);
        w += d[k] * std::cos((k + 1) * theta + phase2[k]);
    }
    return taper(rp) * (v + rp * w);
}

double GeneratingPerturbation::ds_dtheta(double rp, double theta) const {
    double v = 0.0, w = 0.0;
    for (int k = 0; k < 3; ++k) {
        v += (k + 1) * c[k] * std::cos((k + 1) * theta + phase[k]);
        w -= (k + 1) * d[k] * std::sin((k + 1) * theta + phase2[k]);
    }
    return taper(rp) * (v + rp * w);
}

double GeneratingPerturbation::ds_drp(double rp, double theta) const {
    double v = 0.0, w = 0.0;
    for (int k = 0; k < 3; ++k) {
        v += c[k] * std::sin((k + 1) * theta + phase[k]);
        w += d[k] * std::cos((k + 1) * theta + phase2[k]);
    }
    return dtaper(rp) * (v + rp * w) + taper(rp) * w;
}

GeneratingPerturbation make_generating_perturbation(std::uint64_t seed) {
    GeneratingPerturbation p;
    p.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::normal_distribution<double> amp(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        p.c[k] = amp(rng) / ((k + 1) * (k + 1));
        p.phase[k] = angle(rng);
        p.d[k] = 0.5 * amp(rng) / ((k + 1) * (k + 1));
        p.phase2[k] = angle(rng);
    }
    return p;
}

double TwistMap::sigma(double x) const { return kPi * (1.0 - x); }
double TwistMap::dsigma(double x) const {
    (void)x;
    return -kPi;
}
double TwistMap::sigma_inverse(double kappa) const { return 1.0 - kappa / kPi; }

Eigen::Vector2d TwistMap::apply(const Eigen::Vector2d& rtheta) const {
    const double r = rtheta[0], theta = rtheta[1];
    double rp = r;
    if (delta != 0.0) {
        for (int it = 0; it < 50; ++it) {
            const double f = rp + delta * pert.ds_dtheta(rp, theta) - r;
            if (std::abs(f) < 1e-15) break;
            const double fd = 1e-7;
            const double df = 1.0 + delta * (pert.ds_dtheta(rp + fd, theta) -
                                             pert.ds_dtheta(rp - fd, theta)) /
                                        (2.0 * fd);
            rp -= f / df;
        }
    }
    const double theta_out = theta + sigma(rp) + (delta != 0.0 ? delta * pert.ds_drp(rp, theta) : 0.0);
    return {rp, theta_out};
}

Eigen::Matrix2d TwistMap::jacobian(const Eigen::Vector2d& rtheta, double fd) const {
    Eigen::Matrix2d J;
    for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d xp = rtheta, xm = rtheta;
        xp[j] += fd;
        xm[j] -= fd;
        J.col(j) = (apply(xp) - apply(xm)) / (2.0 * fd);
    }
    return J;
}

TwistMap make_twist_map(double delta, std::uint64_t seed) {
    TwistMap m;
    m.delta = delta;
    m.pert = make_generating_perturbation(seed);
    return m;
}

namespace {

double birkhoff_weight(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(-1.0 / (t * (1.0 - t)));
}

double weighted_average(const std::vector<double>& incr, std::size_t n) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = birkhoff_weight((j + 0.5) / n);
        num += w * incr[j];
        den += w;
    }
    return num / den;
}

}  // namespace

double rotation_number(const TwistMap& map, double r0, int N, double* error_estimate) {
    if (N < 16) throw std::invalid_argument("need at least 16 iterates");
    std::vector<double> incr;
    incr.reserve(N);
    Eigen::Vector2d z(r0, 0.0);
    for (int j = 0; j < N; ++j) {
        const Eigen::Vector2d next = map.apply(z);
        if (std::abs(next[0]) > 1.0 + 1e-12)
            throw std::runtime_error("orbit escaped the annulus during rotation-number estimation");
        incr.push_back(next[1] - z[1]);
        z = next;
    }
    const double full = weighted_average(incr, incr.size());
    const double half = weighted_average(incr, incr.size() / 2);
    if (error_estimate) *error_estimate = std::abs(full - half) / kTwoPi;
    return full / kTwoPi;
}

// --------------------------------------------------------------------------
// invariant circles by Fourier collocation Newton
// --------------------------------------------------------------------------

namespace {

double eval_series_full(const Eigen::VectorXd& coef, int N, double gamma) {
    // [a0, a1..aN, b1..bN]
    double v = coef[0];
    for (int k = 1; k <= N; ++k)
        v += coef[k] * std::cos(k * gamma) + coef[N + k] * std::sin(k * gamma);
    return v;
}

double eval_series_zero_mean(const Eigen::VectorXd& coef, int N, double gamma) {
    // [a1..aN, b1..bN]
    double v = 0.0;
    for (int k = 1; k <= N; ++k)
        v += coef[k - 1] * std::cos(k * gamma) + coef[N + k - 1] * std::sin(k * gamma);
    return v;
}

struct CircleSystem {
    const TwistMap* map;
    double kappa;
    int N;
    int M;

    int n_unknowns() const { return (2 * N + 1) + 2 * N; }

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
        Eigen::VectorXd F(2 * M);
        const auto r_coef = x.head(2 * N + 1);
        const auto t_coef = x.tail(2 * N);
        for (int i = 0; i < M; ++i) {
            const double gamma = kTwoPi * i / M;
            const double R = eval_series_full(r_coef, N, gamma);
            const double Th = gamma + eval_series_zero_mean(t_coef, N, gamma);
            const Eigen::Vector2d img = map->apply({R, Th});
            const double Rk = eval_series_full(r_coef, N, gamma + kappa);
            const double Thk = gamma + kappa + eval_series_zero_mean(t_coef, N, gamma + kappa);
            F[2 * i] = img[0] - Rk;
            F[2 * i + 1] = img[1] - Thk;
        }
        return F;
    }
};

}  // namespace

double InvariantCircle::eval_g1(double gamma) const {
    return eval_series_full(g1_coeffs, modes, gamma) - r0;
}

double InvariantCircle::eval_g2(double gamma) const {
    return eval_series_zero_mean(g2_coeffs, modes, gamma);
}

InvariantCircle find_invariant_circle(const TwistMap& map, double kappa,
                                      const CircleSearchOptions& opt) {
    const auto admission = diophantine(kappa / kTwoPi, opt.dioph_alpha, opt.dioph_beta, opt.dioph_K);
    if (!admission.pass)
        throw std::invalid_argument(
            "target rotation number fails the Diophantine admission test (worst p/q = " +
            std::to_string(admission.p) + "/" + std::to_string(admission.q) + ")");
    if (kappa <= 0.0 || kappa >= kTwoPi)
        throw std::invalid_argument("target rotation angle must lie in (0, 2*pi)");
    const double r0 = map.sigma_inverse(kappa);
    if (std::abs(r0) > 1.0) throw std::invalid_argument("target circle lies outside the annulus");

    int N = opt.modes;
    Eigen::VectorXd x;  // warm start across mode doublings
    while (true) {
        CircleSystem sys{&map, kappa, N, 4 * N};
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n_unknowns());
        x0[0] = r0;
        if (x.size() > 0) {
            // zero-padded previous solution
            const int Nold = (static_cast<int>(x.size()) - 1) / 4;
            x0.head(Nold + 1) = x.head(Nold + 1);
            x0.segment(N + 1, Nold) = x.segment(Nold + 1, Nold);
            x0.segment(2 * N + 1, Nold) = x.segment(2 * Nold + 1, Nold);
            x0.segment(3 * N + 1, Nold) = x.segment(3 * Nold + 1, Nold);
        }
        Eigen::VectorXd F = sys.residual(x0);
        double res = F.lpNorm<Eigen::Infinity>();
        int it = 0;
        double prev = std::numeric_limits<double>::infinity();
        bool stagnated = false;
        while (res >= opt.tol && it < opt.max_newton) {
            Eigen::MatrixXd J(2 * sys.M, sys.n_unknowns());
            const double h = 1e-7;
            for (int j = 0; j < sys.n_unknowns(); ++j) {
                Eigen::VectorXd xp = x0;
                xp[j] += h;
                J.col(j) = (sys.residual(xp) - F) / h;
            }
            const Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-F);
            x0 += dx;
            F = sys.residual(x0);
            res = F.lpNorm<Eigen::Infinity>();
            ++it;
            if (res > 0.5 * prev && res >= opt.tol) {
                stagnated = true;
                break;
            }
            prev = res;
        }
        if (res < opt.tol) {
            InvariantCircle circle;
            circle.kappa = kappa;
            circle.r0 = r0;
            circle.modes = N;
            circle.residual = res;
            circle.g1_coeffs = x0.head(2 * N + 1);
            circle.g2_coeffs = x0.tail(2 * N);
            const int dense = 1024;
            double g1s = 0.0, g1d = 0.0, g2s = 0.0, g2d = 0.0;
            double prev_g1 = circle.eval_g1(0.0), prev_g2 = circle.eval_g2(0.0);
            const double dg = kTwoPi / dense;
            for (int i = 1; i <= dense; ++i) {
                const double gamma = dg * i;
                const double v1 = circle.eval_g1(gamma), v2 = circle.eval_g2(gamma);
                g1s = std::max(g1s, std::abs(v1));
                g2s = std::max(g2s, std::abs(v2));
                g1d = std::max(g1d, std::abs(v1 - prev_g1) / dg);
                g2d = std::max(g2d, std::abs(v2 - prev_g2) / dg);
                prev_g1 = v1;
                prev_g2 = v2;
            }
            circle.g1_sup = g1s;
            circle.g1_deriv_sup = g1d;
            circle.g2_sup = g2s;
            circle.g2_deriv_sup = g2d;
            return circle;
        }
        if ((stagnated || it >= opt.max_newton) && 2 * N <= opt.max_modes) {
            x = x0;
            N *= 2;
            continue;
        }
        throw std::runtime_error("invariant-circle Newton failed to reach tolerance (residual " +
                                 format_double(res) + ")");
    }
}

}  // namespace reeb
