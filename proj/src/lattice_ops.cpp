#include "detline/lattice_ops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace detline {

// ---------------------------------------------------------------- boxes, spaces

bool BoxIndicator::finite(int dim) const {
    for (int a = 0; a < dim; ++a)
        if (axes[a].lo == kNegInf || axes[a].hi == kPosInf) return false;
    return true;
}

BoxIndicator BoxIndicator::intersect(const BoxIndicator& o) const {
    BoxIndicator r;
    for (int a = 0; a < 2; ++a) {
        r.axes[a].lo = std::max(axes[a].lo, o.axes[a].lo);
        r.axes[a].hi = std::min(axes[a].hi, o.axes[a].hi);
    }
    return r;
}

bool SlotSpace::active(size_t slot, const Point& x) const {
    for (const auto& b : supports[slot])
        if (b.contains(x)) return true;
    return false;
}

std::vector<int> SlotSpace::active_slots(const Point& x) const {
    std::vector<int> out;
    for (size_t s = 0; s < size(); ++s)
        if (active(s, x)) out.push_back(static_cast<int>(s));
    return out;
}

SlotSpace& SlotSpace::add(const std::string& label, std::vector<BoxIndicator> support) {
    labels.push_back(label);
    supports.push_back(std::move(support));
    return *this;
}

SlotSpace SlotSpace::full(int dim, size_t slots) {
    SlotSpace s;
    s.dim = dim;
    for (size_t i = 0; i < slots; ++i) s.add("s" + std::to_string(i), {BoxIndicator::all()});
    return s;
}

SlotSpace direct_sum(const SlotSpace& a, const SlotSpace& b) {
    if (a.dim != b.dim) throw ShapeMismatch("direct sum of slot spaces of different dimension");
    SlotSpace r = a;
    for (size_t i = 0; i < b.size(); ++i) r.add(b.labels[i], b.supports[i]);
    return r;
}

namespace {

void add_box_cuts(Grid& g, const BoxIndicator& b) {
    for (int a = 0; a < g.dim; ++a) {
        if (b.axes[a].empty()) continue;
        if (b.axes[a].lo != kNegInf) g.cuts[a].push_back(b.axes[a].lo);
        if (b.axes[a].hi != kPosInf) g.cuts[a].push_back(b.axes[a].hi + 1);
    }
}

void normalize(Grid& g) {
    for (auto& c : g.cuts) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
}

Grid support_grid(const SlotSpace& s) {
    Grid g;
    g.dim = s.dim;
    for (const auto& sup : s.supports)
        for (const auto& b : sup) add_box_cuts(g, b);
    normalize(g);
    return g;
}

}  // namespace

bool same_space(const SlotSpace& a, const SlotSpace& b) {
    if (a.dim != b.dim || a.size() != b.size()) return false;
    Grid g = merge(support_grid(a), support_grid(b));
    for (size_t c = 0; c < g.cell_count(); ++c) {
        const Point x = g.representative(c);
        for (size_t s = 0; s < a.size(); ++s)
            if (a.active(s, x) != b.active(s, x)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- grid

size_t Grid::cell_of(const Point& x) const {
    size_t k[2] = {0, 0};
    for (int a = 0; a < dim; ++a)
        k[a] = static_cast<size_t>(std::upper_bound(cuts[a].begin(), cuts[a].end(), x[a]) - cuts[a].begin());
    return index(k[0], k[1]);
}

bool Grid::bounded(size_t cell) const {
    const auto k = coords(cell);
    for (int a = 0; a < dim; ++a)
        if (k[a] == 0 || k[a] + 1 == ncells(a)) return false;
    return true;
}

Point Grid::representative(size_t cell) const {
    const auto k = coords(cell);
    Point x{0, 0};
    for (int a = 0; a < dim; ++a) {
        if (cuts[a].empty()) x[a] = 0;
        else if (k[a] == 0) x[a] = cuts[a][0] - 1;
        else x[a] = cuts[a][k[a] - 1];
    }
    return x;
}

std::pair<long, long> Grid::extent(size_t cell, int axis) const {
    if (axis >= dim) return {0, 1};
    const auto k = coords(cell)[axis];
    return {cuts[axis][k - 1], cuts[axis][k]};
}

long Grid::point_count(size_t cell) const {
    long n = 1;
    for (int a = 0; a < dim; ++a) {
        const auto e = extent(cell, a);
        n *= e.second - e.first;
    }
    return n;
}

void Grid::for_each_point(size_t cell, const std::function<void(const Point&)>& f) const {
    const auto e0 = extent(cell, 0);
    const auto e1 = extent(cell, 1);
    for (long y = e1.first; y < e1.second; ++y)
        for (long x = e0.first; x < e0.second; ++x) f(Point{x, y});
}

Grid merge(const Grid& a, const Grid& b) {
    if (a.dim != b.dim) throw ShapeMismatch("grids of different dimension");
    Grid g;
    g.dim = a.dim;
    for (int ax = 0; ax < 2; ++ax) {
        g.cuts[ax] = a.cuts[ax];
        g.cuts[ax].insert(g.cuts[ax].end(), b.cuts[ax].begin(), b.cuts[ax].end());
    }
    normalize(g);
    return g;
}

// ---------------------------------------------------------------- sparse vectors

cplx inner(const LVec& a, const LVec& b) {
    cplx s = 0.0;
    for (const auto& [x, va] : a) {
        auto it = b.find(x);
        if (it != b.end()) s += va.dot(it->second);
    }
    return s;
}

LVec axpy(const LVec& x, cplx a, const LVec& y) {
    LVec r = x;
    for (const auto& [p, v] : y) {
        auto it = r.find(p);
        if (it == r.end()) r.emplace(p, a * v);
        else it->second += a * v;
    }
    return r;
}

double norm(const LVec& a) { return std::sqrt(std::abs(inner(a, a))); }

// ---------------------------------------------------------------- operator

FiberedLatticeOp::FiberedLatticeOp(SlotSpace dom, SlotSpace cod, const std::vector<Term>& terms)
    : dom_(std::move(dom)), cod_(std::move(cod)) {
    if (dom_.dim != cod_.dim) throw ShapeMismatch("domain and codomain dimensions differ");
    grid_ = merge(support_grid(dom_), support_grid(cod_));
    Grid tg;
    tg.dim = dom_.dim;
    for (const auto& t : terms) {
        if (t.row < 0 || t.col < 0 || static_cast<size_t>(t.row) >= cod_.size() ||
            static_cast<size_t>(t.col) >= dom_.size())
            throw ShapeMismatch("term index out of range");
        add_box_cuts(tg, t.box);
    }
    normalize(tg);
    grid_ = merge(grid_, tg);
    cells_.assign(grid_.cell_count(), Mat::Zero(cod_.size(), dom_.size()));
    for (size_t c = 0; c < cells_.size(); ++c) {
        const Point x = grid_.representative(c);
        for (const auto& t : terms)
            if (t.box.contains(x)) cells_[c](t.row, t.col) += t.coef;
    }
    mask_cells();
    *this = coarsened();
}

FiberedLatticeOp::FiberedLatticeOp(SlotSpace dom, SlotSpace cod, Grid grid, std::vector<Mat> cells)
    : dom_(std::move(dom)), cod_(std::move(cod)), grid_(std::move(grid)), cells_(std::move(cells)) {
    if (grid_.cell_count() != cells_.size()) throw ShapeMismatch("cell data does not match the grid");
    const Grid g = merge(grid_, merge(support_grid(dom_), support_grid(cod_)));
    if (g.cuts != grid_.cuts) *this = refined(g);
    mask_cells();
}

void FiberedLatticeOp::mask_cells() {
    for (size_t c = 0; c < cells_.size(); ++c) {
        const Point x = grid_.representative(c);
        for (size_t s = 0; s < dom_.size(); ++s)
            if (!dom_.active(s, x)) cells_[c].col(s).setZero();
        for (size_t s = 0; s < cod_.size(); ++s)
            if (!cod_.active(s, x)) cells_[c].row(s).setZero();
    }
}

FiberedLatticeOp FiberedLatticeOp::identity(const SlotSpace& s) {
    std::vector<Term> t;
    for (size_t i = 0; i < s.size(); ++i)
        t.push_back({static_cast<int>(i), static_cast<int>(i), 1.0, BoxIndicator::all()});
    return FiberedLatticeOp(s, s, t);
}

FiberedLatticeOp FiberedLatticeOp::zero(const SlotSpace& dom, const SlotSpace& cod) {
    return FiberedLatticeOp(dom, cod, std::vector<Term>{});
}

Mat FiberedLatticeOp::full_fiber(const Point& x) const { return cells_[grid_.cell_of(x)]; }

Mat FiberedLatticeOp::fiber_matrix(const Point& x) const {
    const auto rows = cod_.active_slots(x);
    const auto cols = dom_.active_slots(x);
    const Mat& f = cells_[grid_.cell_of(x)];
    Mat m(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) m(i, j) = f(rows[i], cols[j]);
    return m;
}

std::vector<FiberedLatticeOp::Term> FiberedLatticeOp::entries() const {
    std::vector<Term> out;
    for (size_t c = 0; c < cells_.size(); ++c) {
        const auto k = grid_.coords(c);
        BoxIndicator b;
        for (int a = 0; a < grid_.dim; ++a) {
            const auto& cu = grid_.cuts[a];
            b.axes[a].lo = k[a] == 0 ? kNegInf : cu[k[a] - 1];
            b.axes[a].hi = k[a] == cu.size() ? kPosInf : cu[k[a]] - 1;
        }
        for (Eigen::Index i = 0; i < cells_[c].rows(); ++i)
            for (Eigen::Index j = 0; j < cells_[c].cols(); ++j)
                if (cells_[c](i, j) != cplx(0.0))
                    out.push_back({static_cast<int>(i), static_cast<int>(j), cells_[c](i, j), b});
    }
    return out;
}

LVec FiberedLatticeOp::apply(const LVec& v) const {
    LVec out;
    for (const auto& [x, c] : v) {
        if (static_cast<size_t>(c.size()) != dom_.size()) throw ShapeMismatch("vector slot count");
        CVec y = full_fiber(x) * c;
        if (y.cwiseAbs().maxCoeff() > 0.0) out.emplace(x, std::move(y));
    }
    return out;
}

FiberedLatticeOp FiberedLatticeOp::refined(const Grid& g) const {
    std::vector<Mat> cells(g.cell_count());
    for (size_t c = 0; c < cells.size(); ++c) cells[c] = cells_[grid_.cell_of(g.representative(c))];
    FiberedLatticeOp r;
    r.dom_ = dom_;
    r.cod_ = cod_;
    r.grid_ = g;
    r.cells_ = std::move(cells);
    return r;
}

FiberedLatticeOp FiberedLatticeOp::coarsened() const {
    FiberedLatticeOp cur = *this;
    auto activity = [&](const Point& x) {
        std::vector<bool> a;
        for (size_t s = 0; s < dom_.size(); ++s) a.push_back(dom_.active(s, x));
        for (size_t s = 0; s < cod_.size(); ++s) a.push_back(cod_.active(s, x));
        return a;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < cur.grid_.dim && !changed; ++a) {
            const auto& cu = cur.grid_.cuts[a];
            for (size_t k = 0; k < cu.size() && !changed; ++k) {
                bool same = true;
                const int other = 1 - a;
                for (size_t j = 0; j < cur.grid_.ncells(other) && same; ++j) {
                    const size_t c0 = a == 0 ? cur.grid_.index(k, j) : cur.grid_.index(j, k);
                    const size_t c1 = a == 0 ? cur.grid_.index(k + 1, j) : cur.grid_.index(j, k + 1);
                    if (cur.cells_[c0] != cur.cells_[c1] ||
                        activity(cur.grid_.representative(c0)) != activity(cur.grid_.representative(c1)))
                        same = false;
                }
                if (same) {
                    Grid g = cur.grid_;
                    g.cuts[a].erase(g.cuts[a].begin() + static_cast<long>(k));
                    cur = cur.refined(g);
                    changed = true;
                }
            }
        }
    }
    return cur;
}

FiberedLatticeOp compose(const FiberedLatticeOp& a, const FiberedLatticeOp& b) {
    if (!same_space(b.codomain(), a.domain())) throw ShapeMismatch("compose: codomain/domain mismatch");
    const Grid g = merge(a.grid(), b.grid());
    const FiberedLatticeOp ar = a.refined(g), br = b.refined(g);
    std::vector<Mat> cells(g.cell_count());
    for (size_t c = 0; c < cells.size(); ++c) cells[c] = ar.cell(c) * br.cell(c);
    return FiberedLatticeOp(b.domain(), a.codomain(), g, std::move(cells)).coarsened();
}

FiberedLatticeOp add(const FiberedLatticeOp& a, const FiberedLatticeOp& b) {
    if (!same_space(a.domain(), b.domain()) || !same_space(a.codomain(), b.codomain()))
        throw ShapeMismatch("add: shapes differ");
    const Grid g = merge(a.grid(), b.grid());
    const FiberedLatticeOp ar = a.refined(g), br = b.refined(g);
    std::vector<Mat> cells(g.cell_count());
    for (size_t c = 0; c < cells.size(); ++c) cells[c] = ar.cell(c) + br.cell(c);
    return FiberedLatticeOp(a.domain(), a.codomain(), g, std::move(cells)).coarsened();
}

FiberedLatticeOp scale(cplx s, const FiberedLatticeOp& a) {
    std::vector<Mat> cells(a.grid().cell_count());
    for (size_t c = 0; c < cells.size(); ++c) cells[c] = s * a.cell(c);
    return FiberedLatticeOp(a.domain(), a.codomain(), a.grid(), std::move(cells)).coarsened();
}

FiberedLatticeOp subtract(const FiberedLatticeOp& a, const FiberedLatticeOp& b) { return add(a, scale(-1.0, b)); }

FiberedLatticeOp direct_sum(const FiberedLatticeOp& a, const FiberedLatticeOp& b) {
    const Grid g = merge(a.grid(), b.grid());
    const FiberedLatticeOp ar = a.refined(g), br = b.refined(g);
    const SlotSpace dom = direct_sum(a.domain(), b.domain());
    const SlotSpace cod = direct_sum(a.codomain(), b.codomain());
    std::vector<Mat> cells(g.cell_count());
    for (size_t c = 0; c < cells.size(); ++c) {
        Mat m = Mat::Zero(cod.size(), dom.size());
        m.topLeftCorner(ar.cell(c).rows(), ar.cell(c).cols()) = ar.cell(c);
        m.bottomRightCorner(br.cell(c).rows(), br.cell(c).cols()) = br.cell(c);
        cells[c] = std::move(m);
    }
    return FiberedLatticeOp(dom, cod, g, std::move(cells)).coarsened();
}

FiberedLatticeOp restrict_to(const FiberedLatticeOp& a, const SlotSpace& dom, const SlotSpace& cod) {
    if (dom.size() != a.domain().size() || cod.size() != a.codomain().size())
        throw ShapeMismatch("restrict: slot counts differ");
    const Grid g = merge(a.grid(), merge(support_grid(dom), support_grid(cod)));
    const FiberedLatticeOp ar = a.refined(g);
    std::vector<Mat> cells(g.cell_count());
    for (size_t c = 0; c < cells.size(); ++c) cells[c] = ar.cell(c);
    return FiberedLatticeOp(dom, cod, g, std::move(cells)).coarsened();
}

FiberedLatticeOp inverse(const FiberedLatticeOp& a) {
    const Grid& g = a.grid();
    std::vector<Mat> cells(g.cell_count());
    for (size_t c = 0; c < cells.size(); ++c) {
        const Point x = g.representative(c);
        const auto rows = a.codomain().active_slots(x);
        const auto cols = a.domain().active_slots(x);
        const Mat m = a.fiber_matrix(x);
        if (m.rows() != m.cols() || rank(m) != m.rows()) throw NotFredholm("fiber is not invertible");
        const Mat mi = m.size() ? Mat(m.inverse()) : Mat(0, 0);
        cells[c] = Mat::Zero(a.domain().size(), a.codomain().size());
        for (size_t i = 0; i < cols.size(); ++i)
            for (size_t j = 0; j < rows.size(); ++j) cells[c](cols[i], rows[j]) = mi(i, j);
    }
    return FiberedLatticeOp(a.codomain(), a.domain(), g, std::move(cells));
}

bool is_zero(const FiberedLatticeOp& a, double tol) {
    for (size_t c = 0; c < a.grid().cell_count(); ++c)
        if (max_abs(a.cell(c)) > tol) return false;
    return true;
}

bool approx_equal(const FiberedLatticeOp& a, const FiberedLatticeOp& b, double tol) {
    if (!same_space(a.domain(), b.domain()) || !same_space(a.codomain(), b.codomain())) return false;
    return is_zero(subtract(a, b), tol);
}

bool is_finite_box(const FiberedLatticeOp& a, double tol) {
    for (size_t c = 0; c < a.grid().cell_count(); ++c)
        if (!a.grid().bounded(c) && max_abs(a.cell(c)) > tol) return false;
    return true;
}

// ---------------------------------------------------------------- Fredholm data

void check_fredholm(const FiberedLatticeOp& a) {
    const Grid& g = a.grid();
    for (size_t c = 0; c < g.cell_count(); ++c) {
        if (g.bounded(c)) continue;
        const Mat m = a.fiber_matrix(g.representative(c));
        if (m.rows() != m.cols() || rank(m) != m.rows())
            throw NotFredholm("fiber matrix on an unbounded region is not bijective");
    }
}

namespace {

LVec expand(const Point& x, const std::vector<int>& active, const CVec& v, size_t slots) {
    CVec full = CVec::Zero(static_cast<Eigen::Index>(slots));
    for (size_t i = 0; i < active.size(); ++i) full(active[i]) = v(static_cast<Eigen::Index>(i));
    LVec r;
    r.emplace(x, std::move(full));
    return r;
}

}  // namespace

KernelCokernel kernel_cokernel(const FiberedLatticeOp& a) {
    check_fredholm(a);
    const Grid& g = a.grid();
    std::map<Point, std::pair<std::vector<LVec>, std::vector<LVec>>, PointLess> per_point;
    for (size_t c = 0; c < g.cell_count(); ++c) {
        if (!g.bounded(c)) continue;
        const Point rep = g.representative(c);
        const Mat m = a.fiber_matrix(rep);
        const Mat nk = nullspace(m);
        const Mat nc = nullspace(m.adjoint());
        if (nk.cols() == 0 && nc.cols() == 0) continue;
        const auto cols = a.domain().active_slots(rep);
        const auto rows = a.codomain().active_slots(rep);
        g.for_each_point(c, [&](const Point& x) {
            auto& slot = per_point[x];
            for (Eigen::Index k = 0; k < nk.cols(); ++k)
                slot.first.push_back(expand(x, cols, nk.col(k), a.domain().size()));
            for (Eigen::Index k = 0; k < nc.cols(); ++k)
                slot.second.push_back(expand(x, rows, nc.col(k), a.codomain().size()));
        });
    }
    KernelCokernel kc;
    for (auto& [x, pr] : per_point) {
        for (auto& v : pr.first) kc.kernel.push_back(std::move(v));
        for (auto& v : pr.second) kc.cokernel.push_back(std::move(v));
    }
    return kc;
}

long index(const FiberedLatticeOp& a) {
    check_fredholm(a);
    const Grid& g = a.grid();
    long ind = 0;
    for (size_t c = 0; c < g.cell_count(); ++c) {
        if (!g.bounded(c)) continue;
        const Mat m = a.fiber_matrix(g.representative(c));
        ind += g.point_count(c) * (static_cast<long>(m.cols()) - static_cast<long>(m.rows()));
    }
    return ind;
}

cplx fredholm_det(const FiberedLatticeOp& a) {
    if (!same_space(a.domain(), a.codomain())) throw NotDeterminantClass("not an endomorphism");
    const Grid& g = a.grid();
    cplx d = 1.0;
    for (size_t c = 0; c < g.cell_count(); ++c) {
        const Mat m = a.fiber_matrix(g.representative(c));
        if (!g.bounded(c)) {
            if (m.rows() && max_abs(m - Mat::Identity(m.rows(), m.cols())) > 1e-12)
                throw NotDeterminantClass("operator differs from the identity on an unbounded region");
            continue;
        }
        const cplx f = det(m);
        d *= std::pow(f, static_cast<double>(g.point_count(c)));
    }
    return d;
}

double trace_norm(const FiberedLatticeOp& a) {
    const Grid& g = a.grid();
    double s = 0.0;
    for (size_t c = 0; c < g.cell_count(); ++c) {
        const Mat& m = a.cell(c);
        if (!g.bounded(c)) {
            if (max_abs(m) > 1e-12) throw NotFiniteRank("non-zero on an unbounded region");
            continue;
        }
        if (m.size() == 0) continue;
        Eigen::JacobiSVD<Mat> svd(m);
        s += svd.singularValues().sum() * static_cast<double>(g.point_count(c));
    }
    return s;
}

// ---------------------------------------------------------------- window mode

Mat WindowOp::restricted() const {
    Mat m = matrix;
    if (dom_basis.size()) m = m * dom_basis;
    if (cod_basis.size()) m = cod_basis.adjoint() * m;
    return m;
}

WindowKernelCokernel window_kernel_cokernel(const WindowOp& a, double tol) {
    const Mat m = a.restricted();
    WindowKernelCokernel out;
    const Eigen::Index r = m.rows(), c = m.cols();
    Mat u = Mat::Identity(r, r), v = Mat::Identity(c, c);
    Eigen::VectorXd s;
    if (r > 0 && c > 0) {
        Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    }
    const double smax = s.size() ? s.maxCoeff() : 0.0;
    Eigen::Index rk = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol * smax) ++rk;
    Mat ker = v.rightCols(c - rk);
    Mat cok = u.rightCols(r - rk);
    out.kernel = a.dom_basis.size() ? Mat(a.dom_basis * ker) : ker;
    out.cokernel = a.cod_basis.size() ? Mat(a.cod_basis * cok) : cok;
    out.index = static_cast<long>(ker.cols()) - static_cast<long>(cok.cols());
    return out;
}

cplx window_det(const WindowOp& a) {
    const Mat m = a.restricted();
    if (m.rows() != m.cols()) throw ShapeMismatch("window determinant of a non-square operator");
    return det(m);
}

WindowCertificate certify_window(const std::function<WindowOp(int)>& build, int radius, double rel_tol) {
    WindowCertificate res[2];
    for (int k = 0; k < 2; ++k) {
        const WindowOp op = build(radius + 16 * k);
        res[k].radius = radius + 16 * k;
        res[k].index = window_kernel_cokernel(op).index;
        if (op.dom_dim() == op.cod_dim()) {
            res[k].has_det = true;
            res[k].det = window_det(op);
        }
    }
    if (res[0].index != res[1].index) throw Unstable("window index changes between radii");
    if (res[0].has_det != res[1].has_det) throw Unstable("window shape changes between radii");
    if (res[0].has_det && res[0].index == 0 && rel_diff(res[0].det, res[1].det) > rel_tol)
        throw Unstable("window determinant changes between radii");
    return res[0];
}

}  // namespace detline
