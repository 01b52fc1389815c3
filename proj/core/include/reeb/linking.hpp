#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reeb/open_book.hpp"

namespace reeb {

// ---------------------------------------------------------------------------
// Linking numbers: a numeric Gauss-integral oracle on sampled space curves,
// the combinatorial forced-zero rules of a block decomposition, and the
// induction that certifies a lower bound on how many boundary components any
// global surface of section must carry.
// ---------------------------------------------------------------------------

struct ClosedCurve {
    std::vector<Eigen::Vector3d> pts;  // implicitly closed (last joins to first)
    ClosedCurve reversed() const;
};

ClosedCurve make_circle(const Eigen::Vector3d& center, const Eigen::Vector3d& unit_u,
                        const Eigen::Vector3d& unit_v, double radius, int n);
// Torus curve of class (p longitudes, q meridians) around the circle of
// radius `major` in the xy-plane through `center`.
ClosedCurve make_torus_curve(int p, int q, double major, double minor,
                             const Eigen::Vector3d& center, int n);

struct GaussLinkResult {
    long long value = 0;
    double raw = 0.0;
    double residual = 0.0;
    int refinements = 0;
};

// Midpoint-rule Gauss double integral over the two polygons, refined by
// segment subdivision until the rounding residual is below 0.05.  Throws when
// the curves come closer than ten sampling steps or the residual stays above
// 0.1 after refinement.
GaussLinkResult gauss_link(const ClosedCurve& c1, const ClosedCurve& c2);

// ---------------------------------------------------------------------------
// combinatorial rules and the certificate
// ---------------------------------------------------------------------------

enum class LinkRule { forced_zero, unconstrained };

LinkRule block_link_rule(const BlockDecomposition& dec, const std::string& b1,
                         const std::string& b2);
// Torus-partition regions: orbits two or more regions apart cannot link.
LinkRule v_region_link_rule(int i, int j);

// Counting regimes.  `handle_per_join` obstructs with every handle orbit of
// the chain (each confined to its own join); `torus_partition` uses the
// partition of a 3n+2-annulus chain by invariant tori, obstructing with every
// third handle so the confinement windows are pairwise disjoint.
enum class Regime { handle_per_join, torus_partition };

Regime regime_from_string(const std::string& s);   // accepts "thm1" / "thm2"
std::string regime_to_string(Regime r);

struct WitnessStep {
    std::string handle;                        // obstructing handle orbit's block/region
    std::vector<std::string> allowed;          // placements that may link it
    std::vector<std::string> excluded_prior;   // earlier components, all forced to zero
};

struct LinkingCertificate {
    std::string regime;
    int handle_count = 0;     // obstruction set size
    int bound = 0;            // certified minimum number of boundary components
    std::vector<WitnessStep> log;
    std::string chain_summary;
};

// The inductive argument: every obstructing handle orbit must link some
// boundary component, that component is confined to the handle's allowed
// placements, and disjoint allowed sets force a fresh component each step.
LinkingCertificate certify_lower_bound(const BlockDecomposition& dec, Regime regime);

// Independent oracle: exhaustively places m = 0..m_max components into
// blocks/regions and searches for a linking-support pattern consistent with
// the forced-zero rules in which every obstructing handle links something;
// returns the smallest feasible m.  Caps: <= 40 placement sites, m_max <= 6.
int brute_force_bound(const BlockDecomposition& dec, int m_max,
                      Regime regime = Regime::handle_per_join);

// Re-derives the bound from the witness log alone; true when it matches.
bool replay_witness(const LinkingCertificate& cert);

// Human-readable transcript of the certificate.
std::string certificate_transcript(const LinkingCertificate& cert);

// ---------------------------------------------------------------------------
// standard embedding of a chain for numeric cross-checks
// ---------------------------------------------------------------------------

// Model curves in a standard embedding of the summed chain: each join's
// binding core is a unit circle, the join's handle orbit threads through it
// (they link once), and page orbits sit split from everything else.
ClosedCurve embedded_binding_core(const BlockDecomposition& dec, int join, int n = 256);
ClosedCurve embedded_handle_orbit(const BlockDecomposition& dec, int join, int n = 256);
ClosedCurve embedded_page_orbit(const BlockDecomposition& dec, int summand, int n = 256);

}  // namespace reeb
