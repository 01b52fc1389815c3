#include "reeb/linking.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "reeb/util.hpp"

namespace reeb {

ClosedCurve ClosedCurve::reversed() const {
    ClosedCurve out;
    out.pts.assign(pts.rbegin(), pts.rend());
    return out;
}

ClosedCurve make_circle(const Eigen::Vector3d& center, const Eigen::Vector3d& unit_u,
                        const Eigen::Vector3d& unit_v, double radius, int n) {
    ClosedCurve c;
    c.pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double t = kTwoPi * i / n;
        c.pts.push_back(center + radius * (std::cos(t) * unit_u + std::sin(t) * unit_v));
    }
    return c;
}

ClosedCurve make_torus_curve(int p, int q, double major, double minor,
                             const Eigen::Vector3d& center, int n) {
    ClosedCurve c;
    c.pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double t = kTwoPi * i / n;
        const double w = major + minor * std::cos(q * t);
        c.pts.push_back(center + Eigen::Vector3d(w * std::cos(p * t), w * std::sin(p * t),
                                                 minor * std::sin(q * t)));
    }
    return c;
}

namespace {

double gauss_sum(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
    const std::size_t na = a.size(), nb = b.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const Eigen::Vector3d ta = a[(i + 1) % na] - a[i];
        const Eigen::Vector3d ma = 0.5 * (a[(i + 1) % na] + a[i]);
        for (std::size_t j = 0; j < nb; ++j) {
            const Eigen::Vector3d tb = b[(j + 1) % nb] - b[j];
            const Eigen::Vector3d mb = 0.5 * (b[(j + 1) % nb] + b[j]);
            const Eigen::Vector3d d = ma - mb;
            const double dist = d.norm();
            sum += d.dot(ta.cross(tb)) / (dist * dist * dist);
        }
    }
    return sum / (4.0 * kPi);
}

std::vector<Eigen::Vector3d> subdivide(const std::vector<Eigen::Vector3d>& pts) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(pts.size() * 2);
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(pts[i]);
        out.push_back(0.5 * (pts[i] + pts[(i + 1) % n]));
    }
    return out;
}

double max_step(const std::vector<Eigen::Vector3d>& pts) {
    double m = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, (pts[(i + 1) % n] - pts[i]).norm());
    return m;
}

double min_separation(const std::vector<Eigen::Vector3d>& a,
                      const std::vector<Eigen::Vector3d>& b) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : a)
        for (const auto& q : b) m = std::min(m, (p - q).norm());
    return m;
}

}  // namespace

GaussLinkResult gauss_link(const ClosedCurve& c1, const ClosedCurve& c2) {
    if (c1.pts.size() < 8 || c2.pts.size() < 8)
        throw std::invalid_argument("curves need at least 8 samples");
    std::vector<Eigen::Vector3d> a = c1.pts, b = c2.pts;
    GaussLinkResult res;
    for (int level = 0; level < 6; ++level) {
        const double sep = min_separation(a, b);
        const double step = std::max(max_step(a), max_step(b));
        if (sep < 10.0 * step) {
            if (level < 5) {
                a = subdivide(a);
                b = subdivide(b);
                ++res.refinements;
                continue;
            }
            throw std::invalid_argument("curves too close for the sampling resolution");
        }
        const double forward = gauss_sum(a, b);
        const double backward = gauss_sum(b, a);
        if (std::abs(forward - backward) > 1e-9 * std::max(1.0, std::abs(forward)))
            throw std::logic_error("Gauss integral asymmetry beyond roundoff");
        res.raw = forward;
        res.value = std::llround(forward);
        res.residual = std::abs(forward - static_cast<double>(res.value));
        if (res.residual < 0.05) return res;
        a = subdivide(a);
        b = subdivide(b);
        ++res.refinements;
    }
    if (res.residual > 0.1)
        throw std::runtime_error("Gauss integral residual stayed above 0.1; sampling too coarse");
    return res;
}

// --------------------------------------------------------------------------
// combinatorial rules
// --------------------------------------------------------------------------

LinkRule block_link_rule(const BlockDecomposition& dec, const std::string& b1,
                         const std::string& b2) {
    return dec.zero_link(b1, b2) ? LinkRule::forced_zero : LinkRule::unconstrained;
}

LinkRule v_region_link_rule(int i, int j) {
    return std::abs(i - j) >= 2 ? LinkRule::forced_zero : LinkRule::unconstrained;
}

Regime regime_from_string(const std::string& s) {
    if (s == "thm1" || s == "handle_per_join") return Regime::handle_per_join;
    if (s == "thm2" || s == "torus_partition") return Regime::torus_partition;
    throw std::invalid_argument("unknown regime: " + s);
}

std::string regime_to_string(Regime r) {
    return r == Regime::handle_per_join ? "thm1" : "thm2";
}

namespace {

// Obstruction model shared by the certifier and the brute-force oracle:
// placement sites, obstructing handles, and which sites may link which handle.
struct ObstructionModel {
    std::vector<std::string> sites;
    std::vector<std::string> handles;               // labels, for the log
    std::vector<std::vector<char>> allowed;         // [handle][site]
    std::string summary;
};

ObstructionModel build_model(const BlockDecomposition& dec, Regime regime) {
    ObstructionModel m;
    if (regime == Regime::handle_per_join) {
        for (const auto& b : dec.blocks) m.sites.push_back(b.label);
        for (int j = 0; j < dec.joins(); ++j) m.handles.push_back("H" + std::to_string(j));
        m.allowed.assign(m.handles.size(), std::vector<char>(m.sites.size(), 0));
        for (std::size_t h = 0; h < m.handles.size(); ++h) {
            const Block& hb = dec.block(m.handles[h]);
            for (std::size_t s = 0; s < m.sites.size(); ++s)
                m.allowed[h][s] = dec.zero_link(dec.block(m.sites[s]), hb) ? 0 : 1;
        }
        std::ostringstream os;
        os << dec.summands() << " summands, " << dec.joins() << " joins, obstruction set of "
           << m.handles.size() << " handle orbits";
        m.summary = os.str();
        return m;
    }
    // torus_partition: chain must be base + 3n+2 annuli; invariant tori in
    // every annulus partition the space into regions V_0..V_{3n+2}; the
    // handle between annuli i and i+1 lies in V_i; obstruct with handles
    // 2, 5, ..., 3n-1 so the +-1 windows are pairwise disjoint.
    const int annuli = dec.summands() - 1;
    if (annuli < 5 || (annuli - 2) % 3 != 0)
        throw std::invalid_argument(
            "torus-partition regime needs a chain of 3n+2 annulus summands");
    const int n = (annuli - 2) / 3;
    const int regions = annuli + 1;  // V_0 .. V_{3n+2}
    for (int v = 0; v < regions; ++v) m.sites.push_back("V" + std::to_string(v));
    for (int j = 1; j <= n; ++j) m.handles.push_back("h" + std::to_string(3 * j - 1));
    m.allowed.assign(m.handles.size(), std::vector<char>(m.sites.size(), 0));
    for (int j = 1; j <= n; ++j) {
        const int hv = 3 * j - 1;  // handle h_i lies in region V_i
        for (int v = 0; v < regions; ++v)
            m.allowed[j - 1][v] =
                v_region_link_rule(v, hv) == LinkRule::unconstrained ? 1 : 0;
    }
    std::ostringstream os;
    os << annuli << " annulus summands, invariant tori in each, " << regions
       << " partition regions, obstruction set of " << n << " spaced handle orbits";
    m.summary = os.str();
    return m;
}

}  // namespace

LinkingCertificate certify_lower_bound(const BlockDecomposition& dec, Regime regime) {
    const ObstructionModel m = build_model(dec, regime);
    LinkingCertificate cert;
    cert.regime = regime_to_string(regime);
    cert.handle_count = static_cast<int>(m.handles.size());
    cert.chain_summary = m.summary;

    // components introduced so far, each known only up to its allowed sites
    std::vector<std::vector<char>> component_sites;
    for (std::size_t h = 0; h < m.handles.size(); ++h) {
        WitnessStep step;
        step.handle = m.handles[h];
        for (std::size_t s = 0; s < m.sites.size(); ++s)
            if (m.allowed[h][s]) step.allowed.push_back(m.sites[s]);
        // an earlier component could serve this handle only if one of its
        // possible sites is allowed here
        bool reusable = false;
        for (std::size_t c = 0; c < component_sites.size(); ++c) {
            bool overlap = false;
            for (std::size_t s = 0; s < m.sites.size(); ++s)
                if (component_sites[c][s] && m.allowed[h][s]) overlap = true;
            if (overlap) {
                reusable = true;
            } else {
                step.excluded_prior.push_back("K" + std::to_string(c + 1));
            }
        }
        if (!reusable) {
            component_sites.push_back(m.allowed[h]);
            cert.log.push_back(std::move(step));
        }
    }
    cert.bound = static_cast<int>(component_sites.size());
    return cert;
}

int brute_force_bound(const BlockDecomposition& dec, int m_max, Regime regime) {
    if (m_max > 6) throw std::invalid_argument("brute-force cap m_max <= 6");
    const ObstructionModel model = build_model(dec, regime);
    const int S = static_cast<int>(model.sites.size());
    const int H = static_cast<int>(model.handles.size());
    if (S > 40) throw std::invalid_argument("brute-force cap: at most 40 placement sites");
    if (H == 0) return 0;

    // placements with repetition, nondecreasing site indices
    std::vector<int> placement;
    std::function<bool(int, int)> search = [&](int start, int remaining) -> bool {
        if (remaining == 0) {
            for (int h = 0; h < H; ++h) {
                bool covered = false;
                for (int s : placement)
                    if (model.allowed[h][s]) covered = true;
                if (!covered) return false;
            }
            return true;
        }
        for (int s = start; s < S; ++s) {
            placement.push_back(s);
            if (search(s, remaining - 1)) return true;
            placement.pop_back();
        }
        return false;
    };
    for (int m = 0; m <= m_max; ++m) {
        placement.clear();
        if (search(0, m)) return m;
    }
    throw std::runtime_error("no feasible placement within m_max components");
}

bool replay_witness(const LinkingCertificate& cert) {
    // each logged step must have excluded every previously forced component
    for (std::size_t i = 0; i < cert.log.size(); ++i)
        if (cert.log[i].excluded_prior.size() != i) return false;
    return static_cast<int>(cert.log.size()) == cert.bound;
}

std::string certificate_transcript(const LinkingCertificate& cert) {
    std::ostringstream os;
    os << "Lower bound on boundary components of any global surface of section\n";
    os << "Chain: " << cert.chain_summary << "\n";
    os << "Regime: " << cert.regime << "\n\n";
    int k = 1;
    for (const auto& step : cert.log) {
        os << "Step " << k << ": handle orbit " << step.handle
           << " must link some boundary component.\n";
        os << "  A component linking it can only lie in {";
        for (std::size_t i = 0; i < step.allowed.size(); ++i)
            os << step.allowed[i] << (i + 1 < step.allowed.size() ? ", " : "");
        os << "}.\n";
        if (step.excluded_prior.empty()) {
            os << "  No components exist yet; a first one is forced.\n";
        } else {
            os << "  Components ";
            for (std::size_t i = 0; i < step.excluded_prior.size(); ++i)
                os << step.excluded_prior[i] << (i + 1 < step.excluded_prior.size() ? ", " : "");
            os << " are confined to regions forced to have zero linking with " << step.handle
               << "; a fresh component K" << k << " is forced.\n";
        }
        ++k;
    }
    os << "\nConclusion: at least " << cert.bound
       << " boundary components are required.\n";
    return os.str();
}

// --------------------------------------------------------------------------
// standard embedding
// --------------------------------------------------------------------------

namespace {
Eigen::Vector3d join_center(int join) { return {4.0 * join, 0.0, 0.0}; }
}  // namespace

ClosedCurve embedded_binding_core(const BlockDecomposition& dec, int join, int n) {
    if (join < 0 || join >= dec.joins()) throw std::invalid_argument("join index out of range");
    return make_circle(join_center(join), Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), 1.0,
                       n);
}

ClosedCurve embedded_handle_orbit(const BlockDecomposition& dec, int join, int n) {
    if (join < 0 || join >= dec.joins()) throw std::invalid_argument("join index out of range");
    // threads through the binding core: circle in the xz-plane centered on a
    // point of the core circle
    const Eigen::Vector3d center = join_center(join) + Eigen::Vector3d(1.0, 0.0, 0.0);
    return make_circle(center, Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(), 0.5, n);
}

ClosedCurve embedded_page_orbit(const BlockDecomposition& dec, int summand, int n) {
    if (summand < 0 || summand >= dec.summands())
        throw std::invalid_argument("summand index out of range");
    const Eigen::Vector3d center(4.0 * summand - 2.0, 8.0, 0.0);
    return make_circle(center, Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), 0.8, n);
}

}  // namespace reeb
