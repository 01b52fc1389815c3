#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "reeb/flow.hpp"
#include "reeb/util.hpp"

namespace reeb {

// ---------------------------------------------------------------------------
// Explicit Morse model for one annulus-plus-handle piece of a summed page.
//
// Domain D = [-1,1] x S^1 (annulus, coordinates (r, theta)) glued to the
// handle strip [1, 5/2] x [-pi/4, pi/4].  Two Hamiltonians,
//     H_annulus(r)        = -pi/2 r^2 + pi r          (field  pi(1-r) dtheta),
//     H_handle(r, theta)  = C (1 - (r-3/2)^2 + (4 theta/pi)^2),
// are blended across the strip [1/2,1] x [-pi/4,pi/4] by a cutoff rho that is
// 1 on the strip's left edge and its theta = +-pi/4 sides and 0 on the middle
// of its right edge.  The handle field is derived from H_handle and the area
// form dr ^ dtheta (its theta-coefficient is -(32 C/pi^2) theta, which is what
// differentiating the quadratic actually gives).
//
// With C = pi^2/4 and unit return time the saddle at (3/2, 0) has linearized
// rate 2*pi, so the suspended orbit carries multipliers e^{+-2*pi}.  Near the
// free boundary r = -1 the angular speed is ramped to a constant full turn so
// the unit-time return map is the identity on a collar.
// ---------------------------------------------------------------------------

struct HandleAnnulusModel {
    double C = kPi * kPi / 4.0;
    double epsilon_trim = kPi * kPi / 40.0;  // C/10
    double corner_width = kPi / 16.0;        // cutoff release width along the right edge
    double collar_lock = 0.97;               // speed locked to 2*pi for r <= -collar_lock
    double collar_join = 0.90;               // printed profile untouched for r >= -collar_join

    // strip geometry
    static constexpr double strip_lo = 0.5;
    static constexpr double strip_hi = 1.0;
    static constexpr double handle_hi = 2.5;
    static constexpr double wall = kPi / 4.0;

    double h1(double r) const;               // annulus Hamiltonian (collar-adjusted)
    double dh1(double r) const;
    double h2(double r, double theta) const; // handle Hamiltonian
    double rho(double r, double theta) const;
    Eigen::Vector2d grad_rho(double r, double theta) const;
    double h0(double r, double theta) const; // blended Hamiltonian
    Eigen::Vector2d grad_h0(double r, double theta) const;
    // Hamiltonian field wrt dr ^ dtheta: (-dH/dtheta, dH/dr)
    Eigen::Vector2d field(double r, double theta) const;

    bool in_annulus(double r) const { return r >= -1.0 && r <= 1.0; }
    bool in_handle(double r, double theta) const {
        return r >= strip_hi && r <= handle_hi && std::abs(theta) <= wall;
    }
    bool in_strip(double r, double theta) const {
        return r > strip_lo && r < strip_hi && std::abs(theta) < wall;
    }
    bool in_domain(double r, double theta) const {
        return in_annulus(r) || in_handle(r, theta);
    }

    Eigen::Vector2d saddle() const { return {1.5, 0.0}; }
    double saddle_value() const { return C; }
    // segments of the right strip edge where the cutoff jumps against the
    // handle-side extension: {r=1, corner released zone <= |theta| <= wall}
    double discontinuity_theta_lo() const { return wall - corner_width; }
};

// Free-function views of the model evaluations.
double morse_h1(const HandleAnnulusModel& m, double r);
double morse_h2(const HandleAnnulusModel& m, double r, double theta);
double morse_h0(const HandleAnnulusModel& m, double r, double theta);
Eigen::Vector2d morse_field(const HandleAnnulusModel& m, double r, double theta);

struct TrimArc {
    std::vector<Eigen::Vector2d> points;
};

struct TrimReport {
    double level = 0.0;           // saddle value minus epsilon_trim
    double min_grad_norm = 0.0;   // regularity certificate along the traced arcs
    double min_discontinuity_dist = 0.0;
    bool regular = false;
    std::vector<TrimArc> arcs;    // the two connecting-side arcs through the corridor
};

// Traces the level { h0 = saddle_value - epsilon_trim } through the handle
// corridor and certifies regularity and clearance from the cutoff's
// discontinuity segments.  Throws std::invalid_argument when the level passes
// through the saddle (epsilon_trim = 0) or exits the handle (epsilon_trim too
// large), std::runtime_error when the regularity certificate fails.
TrimReport trim_domain(const HandleAnnulusModel& m);

struct MorseProperties {
    Eigen::Vector2d saddle_location = Eigen::Vector2d::Zero();
    std::complex<double> mult_expanding, mult_contracting;
    double mult_rel_error = 0.0;  // vs e^{+-2*pi}
    std::vector<std::pair<double, double>> rotation_samples;  // (r, measured turns per return)
    double max_rotation_error = 0.0;                          // vs (1-r)/2
    double boundary_displacement = 0.0;  // worst unit-time angular defect on the collar
    double energy_drift_per_time = 0.0;
    bool saddle_unique = false;
    bool ok = false;
};

// Checks the three contract properties of the model: the hyperbolic suspended
// saddle orbit with multipliers e^{+-2*pi}, the continuum of invariant circles
// with rotation number (1-r)/2 for |r| <= 1/2, and the identity return map on
// the boundary collar.  Also measures energy conservation across the blend.
MorseProperties verify_properties(const HandleAnnulusModel& m, int rotation_radii = 20,
                                  const IntegrateOptions& opt = {});

// Marching-squares level-set polylines of h0 over the glued domain, for the
// level-set figure export.
struct LevelPolyline {
    double level;
    std::vector<Eigen::Vector2d> points;
};
std::vector<LevelPolyline> morse_level_sets(const HandleAnnulusModel& m,
                                            const std::vector<double>& levels,
                                            int grid = 320);

}  // namespace reeb
