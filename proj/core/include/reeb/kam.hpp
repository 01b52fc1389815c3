#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace reeb {

// ---------------------------------------------------------------------------
// Action-space frequency analysis and twist-map numerics.
//
// The integrable normal form near a binding is H(I1,I2) = 1/2 (I1 + a I2)^2
// + g(r(I1,I2)) with r(I1,I2) = sqrt(2 I2 / (I1 + a I2)) and g a shaping
// function vanishing near r = 0.  Without g the Hessian is rank one; a g with
// nonzero slope across a radial band makes the frequency map invertible there.
// ---------------------------------------------------------------------------

struct ModifiedHamiltonian {
    double a = 1.4142135623730951;
    std::function<double(double)> g;   // g(r)
    std::function<double(double)> dg;  // g'(r)
    double r_zero = 0.1;               // g vanishes on [0, r_zero)

    double value(double I1, double I2) const;
    double radius(double I1, double I2) const;  // r(I1, I2)

    static ModifiedHamiltonian flat(double a);  // g = 0
    // Shaping ramp: zero below r=0.1, constant slope across [0.115, 0.225],
    // leveling off to `amplitude` by r=0.24 and returning to zero far right.
    static ModifiedHamiltonian with_default_ramp(double a, double amplitude = 0.05);
};

// Frequency vector (dH/dI1, dH/dI2); throws on I1 + a*I2 <= 0.
Eigen::Vector2d frequency(const ModifiedHamiltonian& H, double I1, double I2);

// Minimum |det D^2 H| over the action image of the radial band [r_lo, r_hi]
// at rho = 1, sampled on `grid` points (central differences).
double nondegeneracy(const ModifiedHamiltonian& H, double r_lo, double r_hi, int grid);

struct DiophantineReport {
    bool pass = false;
    double worst_margin = 0.0;  // min over tested resonances of lhs * scale
    long p = 0, q = 0;          // scalar mode: worst rational
    Eigen::Vector2i k = Eigen::Vector2i::Zero();  // vector mode: worst integer vector
    bool vector_mode = false;
};

// Scalar mode: |x - p/q| >= alpha * q^{-beta} for all 0 < q <= K.
DiophantineReport diophantine(double x, double alpha, double beta, long K);
// Vector mode: |<k, omega>| >= 1/(c * |k|^gamma) for all 0 < |k|_inf <= K.
DiophantineReport diophantine(const Eigen::Vector2d& omega, double c, double gamma, long K);

// ---------------------------------------------------------------------------
// Area-preserving twist maps from a generating function
// ---------------------------------------------------------------------------

// Seeded trigonometric term for the generating function, tapered off near the
// annulus boundary so the perturbed map stays an annulus map.
struct GeneratingPerturbation {
    std::uint64_t seed = 1;
    std::array<double, 3> c{}, phase{};
    std::array<double, 3> d{}, phase2{};
    double taper_edge = 0.85;  // taper is 1 on [-taper_edge, taper_edge]

    double taper(double r) const;
    double dtaper(double r) const;
    double s(double rp, double theta) const;
    double ds_dtheta(double rp, double theta) const;
    double ds_drp(double rp, double theta) const;
};

GeneratingPerturbation make_generating_perturbation(std::uint64_t seed);

// (r, theta) -> (r', theta + sigma(r') + delta * ds/dr') with
// r = r' + delta * ds/dtheta solved implicitly; exactly area-preserving.
// The unperturbed twist is sigma(x) = pi(1 - x) on [-1, 1].
struct TwistMap {
    double delta = 0.0;
    GeneratingPerturbation pert;

    double sigma(double x) const;
    double dsigma(double x) const;
    double sigma_inverse(double kappa) const;  // kappa in [0, 2*pi]
    Eigen::Vector2d apply(const Eigen::Vector2d& rtheta) const;
    Eigen::Matrix2d jacobian(const Eigen::Vector2d& rtheta, double fd = 1e-7) const;
};

TwistMap make_twist_map(double delta, std::uint64_t seed);

// Weighted Birkhoff average of the lifted angle increments over N iterates;
// returns turns per iterate (sigma(r0)/2pi on the unperturbed map).  Throws
// when the orbit leaves the annulus.
double rotation_number(const TwistMap& map, double r0, int N,
                       double* error_estimate = nullptr);

struct InvariantCircle {
    double kappa = 0.0;  // rotation angle per iterate
    double r0 = 0.0;     // radius with sigma(r0) = kappa
    int modes = 0;
    double residual = 0.0;
    // graph corrections r = r0 + g1(gamma), theta = gamma + g2(gamma)
    Eigen::VectorXd g1_coeffs;  // [a0, a1..aN, b1..bN]
    Eigen::VectorXd g2_coeffs;  // [a1..aN, b1..bN], zero mean
    double g1_sup = 0.0, g1_deriv_sup = 0.0;
    double g2_sup = 0.0, g2_deriv_sup = 0.0;

    double eval_g1(double gamma) const;
    double eval_g2(double gamma) const;
};

struct CircleSearchOptions {
    double tol = 1e-10;
    int modes = 48;
    int max_modes = 192;
    int max_newton = 30;
    double dioph_alpha = 0.05;  // admission test for the target rotation number
    double dioph_beta = 3.0;
    long dioph_K = 2000;
};

// Solves the conjugacy equation  map(curve(gamma)) = curve(gamma + kappa)
// by a Fourier collocation Newton iteration.  The target kappa must pass the
// configured Diophantine admission test (use 2*pi*p/q to see it refuse).
// Throws std::invalid_argument on an inadmissible kappa and std::runtime_error
// when Newton fails to reach the tolerance (detection failure at this delta).
InvariantCircle find_invariant_circle(const TwistMap& map, double kappa,
                                      const CircleSearchOptions& opt = {});

}  // namespace reeb
