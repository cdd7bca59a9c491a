#include "detline/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace detline {

double max_abs(const Mat& a) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j)));
    return m;
}

Rref rref(const Mat& a, double rel_tol) {
    Rref out;
    out.r = a;
    // relative threshold with an absolute floor so that pure round-off reads as zero
    const double tol = rel_tol * std::max(max_abs(a), 1.0);
    Mat& r = out.r;
    const Eigen::Index m = r.rows(), n = r.cols();
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < n; ++col) {
        if (row == m) {
            out.free.push_back(static_cast<int>(col));
            continue;
        }
        Eigen::Index p = row;
        double best = std::abs(r(row, col));
        for (Eigen::Index i = row + 1; i < m; ++i) {
            if (std::abs(r(i, col)) > best) {
                best = std::abs(r(i, col));
                p = i;
            }
        }
        if (best <= tol || best == 0.0) {
            for (Eigen::Index i = row; i < m; ++i) r(i, col) = 0.0;
            out.free.push_back(static_cast<int>(col));
            continue;
        }
        if (p != row) r.row(p).swap(r.row(row));
        const cplx piv = r(row, col);
        r.row(row) /= piv;
        r(row, col) = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == row) continue;
            const cplx f = r(i, col);
            if (f != cplx(0.0)) {
                r.row(i) -= f * r.row(row);
                r(i, col) = 0.0;
            }
        }
        out.pivots.push_back(static_cast<int>(col));
        ++row;
    }
    return out;
}

int rank(const Mat& a, double rel_tol) { return static_cast<int>(rref(a, rel_tol).pivots.size()); }

std::vector<int> pivot_columns(const Mat& a, double rel_tol) { return rref(a, rel_tol).pivots; }

Mat nullspace(const Mat& a, double rel_tol) {
    Rref e = rref(a, rel_tol);
    Mat ns = Mat::Zero(a.cols(), static_cast<Eigen::Index>(e.free.size()));
    for (size_t k = 0; k < e.free.size(); ++k) {
        const int f = e.free[k];
        ns(f, static_cast<Eigen::Index>(k)) = 1.0;
        for (size_t i = 0; i < e.pivots.size(); ++i)
            ns(e.pivots[i], static_cast<Eigen::Index>(k)) = -e.r(static_cast<Eigen::Index>(i), f);
    }
    return ns;
}

cplx det(const Mat& a) {
    if (a.rows() != a.cols()) return 0.0;
    if (a.rows() == 0) return 1.0;
    return Eigen::PartialPivLU<Mat>(a).determinant();
}

double rel_diff(cplx a, cplx b) {
    const double s = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / s;
}

}  // namespace detline
