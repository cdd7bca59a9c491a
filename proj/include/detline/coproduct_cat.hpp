#pragma once

#include <vector>

#include "detline/fredholm_lines.hpp"
#include "detline/torus_bipolar.hpp"

namespace detline {

/// Base point p0 used to build the hom lines; it must differ from q_e by an element
/// of the ideal for the category to be defined.
using BasePoint = RingIdempotent;

using FiberedElement = DetLineElement<FiberedLatticeOp>;

/// L_p(lambda, mu) = |F(lambda, mu)(p, p0)| and L_q^dagger(lambda, mu) = |F(lambda, mu)(p0, q)|.
FiberedLine plus_line(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& p, const BasePoint& base);
FiberedLine minus_line(const SigmaIndex& lambda, const SigmaIndex& mu, const BasePoint& base, const RingIdempotent& q);

/// Element of H(p, q)(source, target) = L_p(source, target) (x) L_q^dagger(source, target).
struct HomLineElement {
    SigmaIndex source, target;
    RingIdempotent p, q;
    BasePoint base;
    FiberedElement plus, minus;

    cplx value() const { return plus.coefficient * minus.coefficient; }
    long degree() const { return plus.line.degree() + minus.line.degree(); }
};

/// Canonical frame of H(p, q)(source, target) scaled by value.
HomLineElement hom_frame(const SigmaIndex& source, const SigmaIndex& target, const RingIdempotent& p,
                         const RingIdempotent& q, const BasePoint& base, cplx value = 1.0);

/// Unit of H(p, q)(lambda, lambda).
HomLineElement hom_identity(const SigmaIndex& lambda, const RingIdempotent& p, const RingIdempotent& q,
                            const BasePoint& base);

/// Morphism of a tensor product H(x0, x1) (x) H(x1, x2) (x) ... stored factorwise.
struct HomTensor {
    std::vector<HomLineElement> factors;

    cplx value() const;
    long degree() const;
};

/// phi: C -> L_e^dagger(lambda, mu) (x) L_e(lambda, mu) as the coefficient of the frame tensor.
cplx duality_phi(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& e, const BasePoint& base);
/// psi: L_e(lambda, mu) (x) L_e^dagger(lambda, mu) -> C evaluated on the frame tensor.
cplx duality_psi(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& e, const BasePoint& base);

/// Trivialisation mu_p: L_p(l,m) (x) L_p(m,n) (x) L_p^dagger(l,n) -> C on frames.
cplx trivialize_mu(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
                   const BasePoint& base);
/// Trivialisation mu_p^dagger: L_p(l,n) (x) L_p^dagger(m,n) (x) L_p^dagger(l,m) -> C on frames.
cplx trivialize_mu_dagger(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
                          const BasePoint& base);
/// Ternary trivialisation L_p(l,m) (x) L_p(m,n) (x) L_p(n,t) (x) L_p^dagger(l,t) -> C on frames.
cplx trivialize_mu_ternary(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const SigmaIndex& t,
                           const RingIdempotent& p, const BasePoint& base);

/// M_p: L_p(l,m) (x) L_p(m,n) -> L_p(l,n) on frames.
cplx compose_L(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
               const BasePoint& base);
/// M_p^dagger: L_p^dagger(m,n) (x) L_p^dagger(l,m) -> L_p^dagger(l,n) on frames.
cplx compose_L_dagger(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
                      const BasePoint& base);
/// Ternary composition L_p(l,m) (x) L_p(m,n) (x) L_p(n,t) -> L_p(l,t) on frames.
cplx ternary_compose(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const SigmaIndex& t,
                     const RingIdempotent& p, const BasePoint& base);

/// g o f for f: a -> b and g: b -> c in the same H(p, q).
HomLineElement compose(const HomLineElement& f, const HomLineElement& g);
/// Two-sided inverse; every hom line element with non-zero value is invertible.
HomLineElement inverse(const HomLineElement& f);

/// Factorwise composition g o f with the Koszul sign of the interchange.
HomTensor compose(const HomTensor& f, const HomTensor& g);
HomTensor inverse(const HomTensor& f);
HomTensor tensor(const HomTensor& a, const HomTensor& b);

/// Delta_e: H(p, q) -> H(p, e) (x) H(e, q).
HomTensor coproduct(const RingIdempotent& e, const HomLineElement& f);
/// Applies Delta_e to the factor at the given position.
HomTensor coproduct_at(size_t position, const RingIdempotent& e, const HomTensor& f);

/// Change of base point p0 -> new_base. Throws IdealViolation unless p0 - new_base lies in the ideal.
HomLineElement change_base(const BasePoint& new_base, const HomLineElement& f);
HomTensor change_base(const BasePoint& new_base, const HomTensor& f);

/// Transport t_k along alpha(k): H(p, q)(l, m) with base p0 -> H(kp, kq)(kl, km) with base k p0.
HomLineElement transport(const Monomial2& k, const HomLineElement& f);
/// rho(k) = change of base k p0 -> p0 after t_k.
HomLineElement group_act(const Monomial2& k, const HomLineElement& f);
HomTensor group_act(const Monomial2& k, const HomTensor& f);

/// det(X(p0') X(p0)^{-1}) for the eightfold Omega product on (l, l, l, m, n).
cplx crux_determinant(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const BasePoint& p0,
                      const BasePoint& p0_prime);

/// Unit vectors [z1^x1 z2^x2] with m <= x1 < n, s <= x2 < t placed in one slot of nslots,
/// ordered by the canonical lattice order.
std::vector<LVec> omega_vectors(long n, long m, long t, long s, size_t slot, size_t nslots);

/// Coefficient of the element wedge(ker) (x) wedge(coker)^* against the canonical frame.
cplx frame_coefficient(const FiberedLine& line, const std::vector<LVec>& ker, const std::vector<LVec>& coker);

/// Coefficient of the lattice frame, built from the unit vectors spanning kernel and cokernel
/// in the canonical lattice order (slot major). Throws NotExact if they are not unit-vector spanned.
cplx lattice_frame_coefficient(const FiberedLine& line);

}  // namespace detline
