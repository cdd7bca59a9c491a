#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detline/errors.hpp"
#include "detline/linalg.hpp"

namespace detline {

/// Z/2-graded finite dimensional space V = V+ (+) V- given by basis labels.
struct GradedVectorSpace {
    std::vector<std::string> even_basis;
    std::vector<std::string> odd_basis;

    int dim_even() const { return static_cast<int>(even_basis.size()); }
    int dim_odd() const { return static_cast<int>(odd_basis.size()); }

    /// Convenience: basis labels e0.. and f0..
    static GradedVectorSpace of_dims(int even, int odd, const std::string& prefix = "");
};

/// A Z-graded complex line together with a symbolic description of its frame.
struct GradedLine {
    int degree = 0;
    std::string frame_tag = "1";
};

GradedLine det_space(const GradedVectorSpace& v);
GradedLine tensor_lines(const GradedLine& a, const GradedLine& b);

/// Sign of the commutativity constraint s (x) t -> t (x) s, i.e. (-1)^{deg a * deg b}.
int swap_epsilon(const GradedLine& a, const GradedLine& b);
int swap_sign(long deg_a, long deg_b);

/// Koszul sign of permuting a tensor of lines with the given degrees so that the
/// new position i holds the old factor order[i].
int koszul_sign(const std::vector<long>& degrees, const std::vector<size_t>& order);

/// Element of an exterior algebra: coefficient * e_{i1} ^ ... ^ e_{ik}.
/// Indices are kept strictly increasing; the reordering sign goes into the coefficient.
struct WedgeVector {
    std::vector<int> indices;
    cplx coefficient = 1.0;

    /// Normalizes an arbitrary index list. Repeated indices give the zero form.
    static WedgeVector make(std::vector<int> idx, cplx c);
    bool is_zero() const { return coefficient == cplx(0.0); }
    int degree() const { return static_cast<int>(indices.size()); }
};

WedgeVector wedge(const WedgeVector& a, const WedgeVector& b);

/// Coefficient of v1 ^ ... ^ vk (columns of m) against e1 ^ ... ^ ek for a square m.
inline cplx top_wedge_coefficient(const Mat& m) { return det(m); }

/// Exact triangle U -> V -> W -> U with i, q even and d odd, stored by parity blocks.
/// i_plus : U+ -> V+, q_plus : V+ -> W+, d_plus : W+ -> U-,
/// i_minus: U- -> V-, q_minus: V- -> W-, d_minus: W- -> U+.
struct ExactTriangle {
    GradedVectorSpace U, V, W;
    Mat i_plus, q_plus, d_plus, i_minus, q_minus, d_minus;
};

/// Throws NotExact unless the six-term sequence is exact.
void check_exact(const ExactTriangle& t, double rel_tol = kZeroTol);

enum class LiftStrategy { Pivoted, Random };

/// Torsion isomorphism Det(V) -> Det(U) (x) Det(W) as the scalar kappa with
/// frame(V) |-> kappa * frame(U) (x) frame(W), frames being the top wedges of
/// the basis labels. The lift strategy only changes intermediate choices.
cplx torsion_of_triangle(const ExactTriangle& t, LiftStrategy strategy = LiftStrategy::Pivoted,
                         std::uint64_t seed = 0);

/// The exponent eps(Delta) of the torsion sign.
long torsion_sign_exponent(const ExactTriangle& t);

}  // namespace detline
