#include "detline/graded_lines.hpp"

#include <algorithm>
#include <random>

namespace detline {

GradedVectorSpace GradedVectorSpace::of_dims(int even, int odd, const std::string& prefix) {
    GradedVectorSpace v;
    for (int i = 0; i < even; ++i) v.even_basis.push_back(prefix + "e" + std::to_string(i));
    for (int i = 0; i < odd; ++i) v.odd_basis.push_back(prefix + "f" + std::to_string(i));
    return v;
}

namespace {

std::string join_wedge(const std::vector<std::string>& labels) {
    if (labels.empty()) return "1";
    std::string s;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (i) s += "^";
        s += labels[i];
    }
    return s;
}

}  // namespace

GradedLine det_space(const GradedVectorSpace& v) {
    GradedLine l;
    l.degree = v.dim_even() - v.dim_odd();
    if (v.even_basis.empty() && v.odd_basis.empty()) {
        l.frame_tag = "1";
    } else {
        l.frame_tag = join_wedge(v.even_basis) + " (x) (" + join_wedge(v.odd_basis) + ")*";
    }
    return l;
}

GradedLine tensor_lines(const GradedLine& a, const GradedLine& b) {
    return GradedLine{a.degree + b.degree, "(" + a.frame_tag + ") (x) (" + b.frame_tag + ")"};
}

int swap_sign(long deg_a, long deg_b) {
    const long p = (deg_a % 2 != 0) && (deg_b % 2 != 0);
    return p ? -1 : 1;
}

int koszul_sign(const std::vector<long>& degrees, const std::vector<size_t>& order) {
    if (order.size() != degrees.size()) throw ShapeMismatch("koszul_sign: order length");
    int sign = 1;
    for (size_t i = 0; i < order.size(); ++i)
        for (size_t j = i + 1; j < order.size(); ++j)
            if (order[i] > order[j]) sign *= swap_sign(degrees[order[i]], degrees[order[j]]);
    return sign;
}

int swap_epsilon(const GradedLine& a, const GradedLine& b) { return swap_sign(a.degree, b.degree); }

WedgeVector WedgeVector::make(std::vector<int> idx, cplx c) {
    // insertion sort while counting transpositions
    int sign = 1;
    for (size_t i = 1; i < idx.size(); ++i) {
        for (size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    }
    for (size_t i = 1; i < idx.size(); ++i) {
        if (idx[i] == idx[i - 1]) return WedgeVector{{}, 0.0};
    }
    if (c == cplx(0.0)) return WedgeVector{{}, 0.0};
    return WedgeVector{std::move(idx), c * static_cast<double>(sign)};
}

WedgeVector wedge(const WedgeVector& a, const WedgeVector& b) {
    if (a.is_zero() || b.is_zero()) return WedgeVector{{}, 0.0};
    std::vector<int> idx = a.indices;
    idx.insert(idx.end(), b.indices.begin(), b.indices.end());
    return WedgeVector::make(std::move(idx), a.coefficient * b.coefficient);
}

namespace {

void check_shape(const Mat& m, int rows, int cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols)
        throw NotExact(std::string("map ") + name + " has wrong shape");
}

// Lifts for a map f : X -> Y: rank(f) vectors in X whose images are independent.
Mat choose_lifts(const Mat& f, LiftStrategy s, std::mt19937_64& rng) {
    const int r = rank(f);
    if (s == LiftStrategy::Pivoted) {
        std::vector<int> piv = pivot_columns(f);
        Mat x = Mat::Zero(f.cols(), r);
        for (int k = 0; k < r; ++k) x(piv[k], k) = 1.0;
        return x;
    }
    std::normal_distribution<double> nd;
    for (int attempt = 0; attempt < 16; ++attempt) {
        Mat x(f.cols(), r);
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = cplx(nd(rng), nd(rng));
        if (rank(f * x, 1e-8) == r) return x;
    }
    throw NotExact("could not sample independent lifts");
}

Mat hcat(const Mat& a, const Mat& b) {
    Mat m(a.rows(), a.cols() + b.cols());
    if (a.cols()) m.leftCols(a.cols()) = a;
    if (b.cols()) m.rightCols(b.cols()) = b;
    return m;
}

}  // namespace

void check_exact(const ExactTriangle& t, double rel_tol) {
    const int up = t.U.dim_even(), um = t.U.dim_odd();
    const int vp = t.V.dim_even(), vm = t.V.dim_odd();
    const int wp = t.W.dim_even(), wm = t.W.dim_odd();
    check_shape(t.i_plus, vp, up, "i+");
    check_shape(t.q_plus, wp, vp, "q+");
    check_shape(t.d_plus, um, wp, "d+");
    check_shape(t.i_minus, vm, um, "i-");
    check_shape(t.q_minus, wm, vm, "q-");
    check_shape(t.d_minus, up, wm, "d-");

    const int ri_p = rank(t.i_plus, rel_tol), rq_p = rank(t.q_plus, rel_tol), rd_p = rank(t.d_plus, rel_tol);
    const int ri_m = rank(t.i_minus, rel_tol), rq_m = rank(t.q_minus, rel_tol), rd_m = rank(t.d_minus, rel_tol);
    if (up != rd_m + ri_p || vp != ri_p + rq_p || wp != rq_p + rd_p || um != rd_p + ri_m ||
        vm != ri_m + rq_m || wm != rq_m + rd_m)
        throw NotExact("rank conditions fail");

    auto small = [&](const Mat& a, const Mat& b) {
        if (a.rows() == 0 || b.cols() == 0 || a.cols() == 0) return true;
        const double scale = std::max(1.0, max_abs(a) * max_abs(b));
        return max_abs(a * b) <= 1e3 * rel_tol * scale;
    };
    if (!small(t.q_plus, t.i_plus) || !small(t.d_plus, t.q_plus) || !small(t.i_minus, t.d_plus) ||
        !small(t.q_minus, t.i_minus) || !small(t.d_minus, t.q_minus) || !small(t.i_plus, t.d_minus))
        throw NotExact("consecutive maps do not compose to zero");
}

long torsion_sign_exponent(const ExactTriangle& t) {
    return static_cast<long>(rank(t.q_plus)) * t.U.dim_even() +
           static_cast<long>(rank(t.i_minus)) * t.W.dim_even() +
           static_cast<long>(rank(t.d_minus)) * t.V.dim_odd();
}

cplx torsion_of_triangle(const ExactTriangle& t, LiftStrategy strategy, std::uint64_t seed) {
    check_exact(t);
    std::mt19937_64 rng(seed);
    const Mat u_p = choose_lifts(t.i_plus, strategy, rng);
    const Mat v_p = choose_lifts(t.q_plus, strategy, rng);
    const Mat w_p = choose_lifts(t.d_plus, strategy, rng);
    const Mat u_m = choose_lifts(t.i_minus, strategy, rng);
    const Mat v_m = choose_lifts(t.q_minus, strategy, rng);
    const Mat w_m = choose_lifts(t.d_minus, strategy, rng);

    const cplx a_up = det(hcat(t.d_minus * w_m, u_p));
    const cplx a_vp = det(hcat(t.i_plus * u_p, v_p));
    const cplx a_wp = det(hcat(t.q_plus * v_p, w_p));
    const cplx a_um = det(hcat(t.d_plus * w_p, u_m));
    const cplx a_vm = det(hcat(t.i_minus * u_m, v_m));
    const cplx a_wm = det(hcat(t.q_minus * v_m, w_m));

    const double sign = (torsion_sign_exponent(t) % 2 == 0) ? 1.0 : -1.0;
    return sign * a_up * a_wp * a_vm / (a_um * a_wm * a_vp);
}

}  // namespace detline
