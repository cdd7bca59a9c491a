#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace detline {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Default zero threshold for exact eliminations, relative to max(max |entry|, 1).
inline constexpr double kZeroTol = 1e-10;

/// Reduced row echelon form with partial pivoting.
struct Rref {
    Mat r;                    ///< reduced matrix
    std::vector<int> pivots;  ///< pivot column per pivot row
    std::vector<int> free;    ///< non-pivot columns, ascending
};

Rref rref(const Mat& a, double rel_tol = kZeroTol);
int rank(const Mat& a, double rel_tol = kZeroTol);

/// Leftmost maximal set of linearly independent columns.
std::vector<int> pivot_columns(const Mat& a, double rel_tol = kZeroTol);

/// Null space basis; one vector per free column with entry 1 there.
Mat nullspace(const Mat& a, double rel_tol = kZeroTol);

/// Determinant with the convention det of a 0x0 matrix = 1.
cplx det(const Mat& a);

double max_abs(const Mat& a);

/// Relative distance |a-b| / max(|a|,|b|,1e-300).
double rel_diff(cplx a, cplx b);

}  // namespace detline
