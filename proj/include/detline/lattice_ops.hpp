#pragma once

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "detline/errors.hpp"
#include "detline/linalg.hpp"

namespace detline {

/// Lattice point of Z^d, d in {1,2}. For d = 1 the second coordinate is 0.
using Point = std::array<long, 2>;

inline constexpr long kNegInf = std::numeric_limits<long>::min() / 4;
inline constexpr long kPosInf = std::numeric_limits<long>::max() / 4;

/// Canonical lattice order: axis 2 major, axis 1 minor, ascending.
struct PointLess {
    bool operator()(const Point& a, const Point& b) const {
        return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0];
    }
};

/// Closed integer interval [lo, hi]; infinite ends use kNegInf / kPosInf.
struct Interval {
    long lo = kNegInf;
    long hi = kPosInf;

    bool contains(long x) const { return lo <= x && x <= hi; }
    bool empty() const { return lo > hi; }
    static Interval at_least(long a) { return {a, kPosInf}; }
    static Interval below(long a) { return {kNegInf, a - 1}; }
    static Interval range(long a, long b_exclusive) { return {a, b_exclusive - 1}; }
};

/// Product of per-axis intervals. Axis 2 is ignored (full) in dimension 1.
struct BoxIndicator {
    std::array<Interval, 2> axes{};

    static BoxIndicator all() { return {}; }
    static BoxIndicator make(Interval a1, Interval a2 = {}) { return BoxIndicator{{a1, a2}}; }
    bool contains(const Point& x) const { return axes[0].contains(x[0]) && axes[1].contains(x[1]); }
    bool empty() const { return axes[0].empty() || axes[1].empty(); }
    bool finite(int dim = 2) const;
    BoxIndicator intersect(const BoxIndicator& o) const;
};

/// Ordered list of slots, each a copy of l^2(Z^d) restricted to a union of boxes.
struct SlotSpace {
    int dim = 2;
    std::vector<std::string> labels;
    std::vector<std::vector<BoxIndicator>> supports;

    size_t size() const { return labels.size(); }
    bool active(size_t slot, const Point& x) const;
    std::vector<int> active_slots(const Point& x) const;
    SlotSpace& add(const std::string& label, std::vector<BoxIndicator> support);

    static SlotSpace full(int dim, size_t slots);
};

SlotSpace direct_sum(const SlotSpace& a, const SlotSpace& b);
/// Equality of the underlying subspaces (labels are ignored).
bool same_space(const SlotSpace& a, const SlotSpace& b);

/// Rectangular cell decomposition of Z^d by sorted cut positions per axis.
/// Cell k on an axis is [cuts[k-1], cuts[k]) with infinite outer ends.
struct Grid {
    int dim = 2;
    std::array<std::vector<long>, 2> cuts;

    size_t ncells(int axis) const { return axis < dim ? cuts[axis].size() + 1 : 1; }
    size_t cell_count() const { return ncells(0) * ncells(1); }
    size_t cell_of(const Point& x) const;
    std::array<size_t, 2> coords(size_t cell) const { return {cell % ncells(0), cell / ncells(0)}; }
    size_t index(size_t k0, size_t k1) const { return k0 + ncells(0) * k1; }
    bool bounded(size_t cell) const;
    Point representative(size_t cell) const;
    /// Half-open extent [lo, hi) of a bounded cell along an axis.
    std::pair<long, long> extent(size_t cell, int axis) const;
    long point_count(size_t cell) const;
    void for_each_point(size_t cell, const std::function<void(const Point&)>& f) const;
};

Grid merge(const Grid& a, const Grid& b);

/// Finitely supported vector in a slot space: lattice point -> slot coefficients.
using LVec = std::map<Point, CVec, PointLess>;

cplx inner(const LVec& a, const LVec& b);  ///< <a,b>, conjugate-linear in a
LVec axpy(const LVec& x, cplx a, const LVec& y);  ///< x + a*y
double norm(const LVec& a);

/// Block operator on slot spaces, diagonal over lattice fibers, entries piecewise
/// constant on a cell grid. Each cell stores the full cod.size() x dom.size() matrix
/// with entries outside the active slots set to zero.
class FiberedLatticeOp {
public:
    struct Term {
        int row = 0;
        int col = 0;
        cplx coef = 1.0;
        BoxIndicator box;
    };

    FiberedLatticeOp() = default;
    FiberedLatticeOp(SlotSpace dom, SlotSpace cod, const std::vector<Term>& terms);
    FiberedLatticeOp(SlotSpace dom, SlotSpace cod, Grid grid, std::vector<Mat> cells);

    static FiberedLatticeOp identity(const SlotSpace& s);
    static FiberedLatticeOp zero(const SlotSpace& dom, const SlotSpace& cod);

    const SlotSpace& domain() const { return dom_; }
    const SlotSpace& codomain() const { return cod_; }
    int dim() const { return dom_.dim; }
    const Grid& grid() const { return grid_; }
    const Mat& cell(size_t c) const { return cells_[c]; }

    /// Full cod.size() x dom.size() matrix at x.
    Mat full_fiber(const Point& x) const;
    /// Matrix restricted to active codomain rows and active domain columns at x.
    Mat fiber_matrix(const Point& x) const;
    /// Entry list, one term per non-zero cell value.
    std::vector<Term> entries() const;

    LVec apply(const LVec& v) const;

    /// Same operator on a grid refining the current one.
    FiberedLatticeOp refined(const Grid& g) const;
    /// Removes cuts that separate identical cells.
    FiberedLatticeOp coarsened() const;

private:
    void mask_cells();

    SlotSpace dom_, cod_;
    Grid grid_;
    std::vector<Mat> cells_;
};

FiberedLatticeOp compose(const FiberedLatticeOp& a, const FiberedLatticeOp& b);  ///< a o b
FiberedLatticeOp add(const FiberedLatticeOp& a, const FiberedLatticeOp& b);
FiberedLatticeOp subtract(const FiberedLatticeOp& a, const FiberedLatticeOp& b);
FiberedLatticeOp scale(cplx c, const FiberedLatticeOp& a);
FiberedLatticeOp direct_sum(const FiberedLatticeOp& a, const FiberedLatticeOp& b);
/// Compression to new domain/codomain supports (slot counts must agree).
FiberedLatticeOp restrict_to(const FiberedLatticeOp& a, const SlotSpace& dom, const SlotSpace& cod);
/// Fiberwise inverse; throws NotFredholm unless every fiber is bijective.
FiberedLatticeOp inverse(const FiberedLatticeOp& a);
bool approx_equal(const FiberedLatticeOp& a, const FiberedLatticeOp& b, double tol = 1e-12);
bool is_zero(const FiberedLatticeOp& a, double tol = 1e-12);
/// True when the operator vanishes outside a finite set of lattice points.
bool is_finite_box(const FiberedLatticeOp& a, double tol = 1e-12);

struct KernelCokernel {
    std::vector<LVec> kernel;  ///< ordered by the canonical lattice order
    std::vector<LVec> cokernel;  ///< representatives orthogonal to the image
};

/// Throws NotFredholm if a fiber matrix on an unbounded cell is not bijective.
void check_fredholm(const FiberedLatticeOp& a);
KernelCokernel kernel_cokernel(const FiberedLatticeOp& a);
long index(const FiberedLatticeOp& a);
cplx fredholm_det(const FiberedLatticeOp& a);
double trace_norm(const FiberedLatticeOp& a);

/// Dense operator on a finite window, optionally restricted to subspaces given by
/// orthonormal column bases (empty basis matrix means the full window).
struct WindowOp {
    int radius = 0;
    Mat matrix;
    Mat dom_basis;
    Mat cod_basis;

    Mat restricted() const;
    long dom_dim() const { return dom_basis.size() ? dom_basis.cols() : matrix.cols(); }
    long cod_dim() const { return cod_basis.size() ? cod_basis.cols() : matrix.rows(); }
};

struct WindowKernelCokernel {
    Mat kernel;    ///< columns are ambient window vectors
    Mat cokernel;  ///< columns are ambient window vectors orthogonal to the image
    long index = 0;
};

inline constexpr double kWindowTol = 1e-8;

WindowKernelCokernel window_kernel_cokernel(const WindowOp& a, double tol = kWindowTol);
cplx window_det(const WindowOp& a);

struct WindowCertificate {
    long index = 0;
    cplx det = 0.0;
    bool has_det = false;
    int radius = 0;
};

/// Evaluates index (and determinant when square) at radius N and N+16 and throws
/// Unstable unless they agree to rel_tol.
WindowCertificate certify_window(const std::function<WindowOp(int)>& build, int radius,
                                 double rel_tol = kWindowTol);

}  // namespace detline
