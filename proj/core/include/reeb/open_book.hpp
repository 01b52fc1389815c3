#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reeb {

// ---------------------------------------------------------------------------
// Abstract open books: a compact page surface plus a monodromy that is the
// identity near the boundary.  Book-connected sums chain several books along
// chosen boundary components; the induced flow then splits the total space
// into page sets P_i, handle sets H_j and binding neighborhoods N_j.
// ---------------------------------------------------------------------------

enum class PageKind { disk, annulus, abstract_surface };

struct PageSurface {
    PageKind kind = PageKind::disk;
    int boundary_count = 1;
    int genus = 0;  // abstract_surface only

    static PageSurface disk();
    static PageSurface annulus();
    static PageSurface abstract(int boundary_count, int genus);
    void validate() const;  // throws std::invalid_argument
};

enum class MonodromyKind { identity, dehn_twist, opaque };

// The twist profile sigma acts on the annulus width coordinate x in [-1,1];
// the shift function gives the x-dependent mapping-torus period.  Both must
// stay consistent: shift'(x) = -x * sigma'(x), shift < 0 everywhere.
struct Monodromy {
    MonodromyKind kind = MonodromyKind::identity;
    double boundary_shift = -kDefaultShift;  // value of the shift at the boundary, < 0

    double twist(double x) const;       // sigma(x); identity -> 0
    double shift(double x) const;       // mapping-torus period function, < 0

    static Monodromy identity_map(double boundary_shift);
    static Monodromy positive_dehn_twist(double boundary_shift);
    static Monodromy opaque_map();
    void validate() const;

    static constexpr double kDefaultShift = 6.283185307179586476925286766559;  // 2*pi
};

struct AbstractOpenBook {
    PageSurface page;
    Monodromy monodromy;
    std::vector<std::string> boundary_labels;

    void validate() const;
};

// The annulus book with one positive Dehn twist, boundary labels {"U","L"}.
AbstractOpenBook make_annulus_book();
// A one-boundary base book whose interior dynamics are never integrated.
AbstractOpenBook make_base_book(const std::string& label = "B");

struct BookSumChain {
    std::vector<AbstractOpenBook> books;  // [0] is the base
    std::vector<std::pair<std::string, std::string>> joins;

    int summands() const { return static_cast<int>(books.size()); }
    void validate() const;
    // Free (unjoined) boundary labels in chain order.
    std::vector<std::string> free_labels() const;
};

// base followed by k annulus books labeled (L1,U1)...(Lk,Uk), joined
// base-L1, U1-L2, ..., U_{k-1}-Lk.  The base must have a single boundary.
BookSumChain build_chain(const AbstractOpenBook& base, int k);

enum class BlockTag { page_set, handle_set, binding_neighborhood };

struct Block {
    BlockTag tag;
    int index;          // P_i / H_j / N_j index
    std::string label;  // "P0", "H0", "N0", ...
    int position;       // linear position along the chain (P_i=3i, H_j=3j+1, N_j=3j+2)
};

struct BlockDecomposition {
    BookSumChain chain;  // canonicalized join order
    std::vector<Block> blocks;

    int joins() const { return static_cast<int>(chain.joins.size()); }
    int summands() const { return chain.summands(); }
    const Block& block(const std::string& label) const;
    bool has_block(const std::string& label) const;

    // Combinatorial forced-zero-linking relation.  A pair is forced to zero
    // when some join separates them (one strictly left of the join's handle,
    // the other strictly right of its binding neighborhood), or when one of
    // them is a handle set and the other lies outside that join's handle and
    // neighborhood.  Symmetric; false on identical blocks.
    bool zero_link(const Block& b1, const Block& b2) const;
    bool zero_link(const std::string& l1, const std::string& l2) const;
};

BlockDecomposition decompose(const BookSumChain& chain);

// A chart-tagged point of the assembled manifold.  Binding charts carry the
// boundary label they are attached to; handle charts the join index; mapping
// torus charts the summand index.  On overlaps the binding chart wins over
// the handle chart, which wins over the mapping torus.
struct ChartPoint {
    enum class Chart { binding, handle, mapping_torus };
    Chart chart = Chart::binding;
    std::string boundary_label;  // binding charts
    int join = -1;               // handle charts
    int summand = -1;            // mapping-torus charts
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;

    static ChartPoint binding(std::string label, double r, double theta1 = 0.0,
                              double theta2 = 0.0);
    static ChartPoint handle(int join, double r, double theta);
    static ChartPoint mapping_torus(int summand, double x, double theta_page = 0.0,
                                    double theta = 0.0);
};

// Block label ("P2", "H1", "N0") containing the point; throws if the point
// does not belong to any registered chart of the decomposition.
std::string classify_point(const BlockDecomposition& dec, const ChartPoint& p);

}  // namespace reeb
