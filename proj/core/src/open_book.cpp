#include "reeb/open_book.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "reeb/util.hpp"

namespace reeb {

PageSurface PageSurface::disk() { return {PageKind::disk, 1, 0}; }
PageSurface PageSurface::annulus() { return {PageKind::annulus, 2, 0}; }
PageSurface PageSurface::abstract(int boundary_count, int genus) {
    return {PageKind::abstract_surface, boundary_count, genus};
}

void PageSurface::validate() const {
    if (boundary_count <= 0) throw std::invalid_argument("page needs a positive boundary count");
    if (genus < 0) throw std::invalid_argument("page genus must be non-negative");
    if (kind == PageKind::disk && boundary_count != 1)
        throw std::invalid_argument("a disk page has exactly one boundary component");
    if (kind == PageKind::annulus && boundary_count != 2)
        throw std::invalid_argument("an annulus page has exactly two boundary components");
    if (kind != PageKind::abstract_surface && genus != 0)
        throw std::invalid_argument("genus is only meaningful for abstract pages");
}

double Monodromy::twist(double x) const {
    switch (kind) {
        case MonodromyKind::identity:
            return 0.0;
        case MonodromyKind::dehn_twist:
            return kPi * (1.0 - x);
        case MonodromyKind::opaque:
            throw std::logic_error("opaque monodromy has no twist profile");
    }
    return 0.0;
}

double Monodromy::shift(double x) const {
    switch (kind) {
        case MonodromyKind::identity:
            return boundary_shift;
        case MonodromyKind::dehn_twist:
            // shift'(x) = -x * sigma'(x) with sigma(x) = pi(1-x)
            return boundary_shift + kPi * (x * x - 1.0) / 2.0;
        case MonodromyKind::opaque:
            throw std::logic_error("opaque monodromy has no shift function");
    }
    return boundary_shift;
}

Monodromy Monodromy::identity_map(double boundary_shift) {
    Monodromy m{MonodromyKind::identity, boundary_shift};
    m.validate();
    return m;
}

Monodromy Monodromy::positive_dehn_twist(double boundary_shift) {
    Monodromy m{MonodromyKind::dehn_twist, boundary_shift};
    m.validate();
    return m;
}

Monodromy Monodromy::opaque_map() { return {MonodromyKind::opaque, -kDefaultShift}; }

void Monodromy::validate() const {
    if (kind == MonodromyKind::opaque) return;
    if (!(boundary_shift < 0.0))
        throw std::invalid_argument("monodromy shift must be negative");
    // identity near the boundary: the twist must be a full number of turns there
    for (double x : {-1.0, 1.0}) {
        const double t = twist(x);
        const double frac = std::abs(t / kTwoPi - std::round(t / kTwoPi));
        if (frac > 1e-12)
            throw std::invalid_argument("monodromy is not the identity at the boundary");
        if (!(shift(x) < 0.0)) throw std::invalid_argument("boundary shift must stay negative");
    }
}

void AbstractOpenBook::validate() const {
    page.validate();
    monodromy.validate();
    if (static_cast<int>(boundary_labels.size()) != page.boundary_count)
        throw std::invalid_argument("boundary labels must match the page boundary count");
    for (std::size_t i = 0; i < boundary_labels.size(); ++i)
        for (std::size_t j = i + 1; j < boundary_labels.size(); ++j)
            if (boundary_labels[i] == boundary_labels[j])
                throw std::invalid_argument("duplicate boundary label: " + boundary_labels[i]);
}

AbstractOpenBook make_annulus_book() {
    AbstractOpenBook b;
    b.page = PageSurface::annulus();
    b.monodromy = Monodromy::positive_dehn_twist(-Monodromy::kDefaultShift);
    b.boundary_labels = {"U", "L"};
    b.validate();
    return b;
}

AbstractOpenBook make_base_book(const std::string& label) {
    AbstractOpenBook b;
    b.page = PageSurface::disk();
    b.monodromy = Monodromy::opaque_map();
    b.boundary_labels = {label};
    return b;
}

namespace {

// label -> owning book index; throws on duplicates/unknowns
std::map<std::string, int> label_owners(const BookSumChain& chain) {
    std::map<std::string, int> owner;
    for (int i = 0; i < chain.summands(); ++i)
        for (const auto& l : chain.books[i].boundary_labels) {
            if (owner.count(l))
                throw std::invalid_argument("boundary label used by two books: " + l);
            owner[l] = i;
        }
    return owner;
}

}  // namespace

void BookSumChain::validate() const {
    if (books.empty()) throw std::invalid_argument("empty chain");
    for (const auto& b : books) b.validate();
    const auto owner = label_owners(*this);
    std::map<std::string, int> uses;
    std::map<int, std::map<int, int>> edges;
    for (const auto& [la, lb] : joins) {
        if (!owner.count(la)) throw std::invalid_argument("join references unknown label: " + la);
        if (!owner.count(lb)) throw std::invalid_argument("join references unknown label: " + lb);
        if (++uses[la] > 1) throw std::invalid_argument("label joined twice: " + la);
        if (++uses[lb] > 1) throw std::invalid_argument("label joined twice: " + lb);
        const int a = owner.at(la), b = owner.at(lb);
        if (a == b) throw std::invalid_argument("join connects a book to itself");
        edges[std::min(a, b)][std::max(a, b)]++;
    }
    // the joins must realize the linear chain 0-1-...-(m-1)
    if (static_cast<int>(joins.size()) != summands() - 1)
        throw std::invalid_argument("a chain of m books needs exactly m-1 joins");
    for (int i = 0; i + 1 < summands(); ++i)
        if (edges[i][i + 1] != 1)
            throw std::invalid_argument("joins do not form a linear chain of consecutive books");
}

std::vector<std::string> BookSumChain::free_labels() const {
    std::map<std::string, bool> joined;
    for (const auto& [la, lb] : joins) joined[la] = joined[lb] = true;
    std::vector<std::string> out;
    for (const auto& b : books)
        for (const auto& l : b.boundary_labels)
            if (!joined.count(l)) out.push_back(l);
    return out;
}

BookSumChain build_chain(const AbstractOpenBook& base, int k) {
    base.validate();
    if (base.boundary_labels.size() != 1)
        throw std::invalid_argument("the chain base must have a unique boundary component");
    if (k <= 0) throw std::invalid_argument("chain needs at least one annulus summand");
    BookSumChain chain;
    chain.books.push_back(base);
    std::string prev = base.boundary_labels[0];
    for (int i = 1; i <= k; ++i) {
        AbstractOpenBook a = make_annulus_book();
        a.boundary_labels = {"U" + std::to_string(i), "L" + std::to_string(i)};
        chain.books.push_back(a);
        chain.joins.emplace_back(prev, "L" + std::to_string(i));
        prev = "U" + std::to_string(i);
    }
    chain.validate();
    return chain;
}

const Block& BlockDecomposition::block(const std::string& label) const {
    for (const auto& b : blocks)
        if (b.label == label) return b;
    throw std::invalid_argument("no such block: " + label);
}

bool BlockDecomposition::has_block(const std::string& label) const {
    for (const auto& b : blocks)
        if (b.label == label) return true;
    return false;
}

bool BlockDecomposition::zero_link(const Block& b1, const Block& b2) const {
    if (b1.position == b2.position) return false;
    const Block& left = b1.position < b2.position ? b1 : b2;
    const Block& right = b1.position < b2.position ? b2 : b1;
    // a handle orbit can only share linking with its own join's neighborhood
    const Block* pair[2] = {&b1, &b2};
    for (int s = 0; s < 2; ++s) {
        const Block& h = *pair[s];
        const Block& other = *pair[1 - s];
        if (h.tag == BlockTag::handle_set) {
            const bool same_join =
                (other.tag == BlockTag::handle_set || other.tag == BlockTag::binding_neighborhood) &&
                other.index == h.index;
            if (!same_join) return true;
        }
    }
    // a join separates the pair when one is strictly left of its handle and
    // the other strictly right of its neighborhood
    for (int j = 0; j < joins(); ++j) {
        const int hpos = 3 * j + 1, npos = 3 * j + 2;
        if (left.position < hpos && right.position > npos) return true;
    }
    return false;
}

bool BlockDecomposition::zero_link(const std::string& l1, const std::string& l2) const {
    return zero_link(block(l1), block(l2));
}

BlockDecomposition decompose(const BookSumChain& chain) {
    chain.validate();
    BlockDecomposition dec;
    dec.chain = chain;
    // canonical join order: join j connects books j and j+1, left label first
    const auto owner = label_owners(chain);
    std::vector<std::pair<std::string, std::string>> ordered(chain.joins.size());
    for (const auto& [la, lb] : chain.joins) {
        int a = owner.at(la), b = owner.at(lb);
        if (a < b)
            ordered[a] = {la, lb};
        else
            ordered[b] = {lb, la};
    }
    dec.chain.joins = ordered;

    const int m = chain.summands();
    for (int i = 0; i < m; ++i) {
        dec.blocks.push_back({BlockTag::page_set, i, "P" + std::to_string(i), 3 * i});
        if (i + 1 < m) {
            dec.blocks.push_back({BlockTag::handle_set, i, "H" + std::to_string(i), 3 * i + 1});
            dec.blocks.push_back(
                {BlockTag::binding_neighborhood, i, "N" + std::to_string(i), 3 * i + 2});
        }
    }
    return dec;
}

ChartPoint ChartPoint::binding(std::string label, double r, double theta1, double theta2) {
    ChartPoint p;
    p.chart = Chart::binding;
    p.boundary_label = std::move(label);
    p.c0 = r;
    p.c1 = theta1;
    p.c2 = theta2;
    return p;
}

ChartPoint ChartPoint::handle(int join, double r, double theta) {
    ChartPoint p;
    p.chart = Chart::handle;
    p.join = join;
    p.c0 = r;
    p.c1 = theta;
    return p;
}

ChartPoint ChartPoint::mapping_torus(int summand, double x, double theta_page, double theta) {
    ChartPoint p;
    p.chart = Chart::mapping_torus;
    p.summand = summand;
    p.c0 = x;
    p.c1 = theta_page;
    p.c2 = theta;
    return p;
}

std::string classify_point(const BlockDecomposition& dec, const ChartPoint& p) {
    switch (p.chart) {
        case ChartPoint::Chart::binding: {
            if (p.c0 < 0.0 || p.c0 > 1.0)
                throw std::domain_error("binding chart radius outside [0,1]");
            for (int j = 0; j < dec.joins(); ++j) {
                const auto& [la, lb] = dec.chain.joins[j];
                if (la == p.boundary_label || lb == p.boundary_label)
                    return "N" + std::to_string(j);
            }
            const auto owner = label_owners(dec.chain);
            auto it = owner.find(p.boundary_label);
            if (it == owner.end())
                throw std::domain_error("unknown boundary label: " + p.boundary_label);
            // free binding components belong to their book's page set
            return "P" + std::to_string(it->second);
        }
        case ChartPoint::Chart::handle: {
            if (p.join < 0 || p.join >= dec.joins())
                throw std::domain_error("handle chart join index out of range");
            if (p.c0 < 1.0 || p.c0 > 2.5 || std::abs(p.c1) > kPi / 4.0)
                throw std::domain_error("point outside the handle chart rectangle");
            return "H" + std::to_string(p.join);
        }
        case ChartPoint::Chart::mapping_torus: {
            if (p.summand < 0 || p.summand >= dec.summands())
                throw std::domain_error("mapping-torus summand index out of range");
            const auto& book = dec.chain.books[p.summand];
            if (book.page.kind == PageKind::annulus && std::abs(p.c0) > 1.0)
                throw std::domain_error("point outside the annulus page");
            return "P" + std::to_string(p.summand);
        }
    }
    throw std::domain_error("unrecognized chart");
}

}  // namespace reeb
