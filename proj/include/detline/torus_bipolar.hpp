#pragma once

#include <string>
#include <vector>

#include "detline/lattice_ops.hpp"

namespace detline {

/// Invertible monomial mu * z1^a * z2^b on the two-torus.
struct Monomial2 {
    cplx mu = 1.0;
    long a = 0;
    long b = 0;

    Monomial2 operator*(const Monomial2& o) const { return {mu * o.mu, a + o.a, b + o.b}; }
    Monomial2 inverse() const { return {1.0 / mu, -a, -b}; }
    bool operator==(const Monomial2& o) const { return mu == o.mu && a == o.a && b == o.b; }
    std::string str() const;
};

/// Idempotent of the free idempotent ring: the unit 1 or a generator q_u.
struct RingIdempotent {
    enum class Kind { Unit, Generator };
    Kind kind = Kind::Unit;
    Monomial2 u;

    static RingIdempotent unit() { return {}; }
    static RingIdempotent gen(const Monomial2& u) { return {Kind::Generator, u}; }
    bool is_unit() const { return kind == Kind::Unit; }
    /// beta(g): q_u -> q_{gu}, 1 -> 1.
    RingIdempotent acted(const Monomial2& g) const { return is_unit() ? *this : gen(g * u); }
    std::string str() const;
};

/// p - q lies in the ideal generated by differences of generators.
bool in_ideal(const RingIdempotent& p, const RingIdempotent& q);

/// Object (k, sigma) of the index set with the canonical admissible family sigma.
struct SigmaIndex {
    Monomial2 k;
    SigmaIndex acted(const Monomial2& g) const { return {g * k}; }
};

/// The lattice Z^2 of Fourier modes z1^x1 z2^x2 as a single full slot.
SlotSpace torus_space();

/// Support of P_g, of Q_u, and of sigma_k(x) as lattice boxes.
BoxIndicator box_P(const Monomial2& g);
BoxIndicator box_Q(const Monomial2& u);
BoxIndicator sigma_box(const SigmaIndex& k, const RingIdempotent& x);

FiberedLatticeOp projection_P(const Monomial2& g);
FiberedLatticeOp projection_Q(const Monomial2& u);
FiberedLatticeOp sigma_apply(const SigmaIndex& k, const RingIdempotent& x);

/// alpha(g) T alpha(g)^{-1} for a fiber-diagonal T: the shift of all boxes by (a, b).
FiberedLatticeOp adjoint_action(const Monomial2& g, const FiberedLatticeOp& t);

struct BipolarReport {
    FiberedLatticeOp commutator;  ///< [P_g, Q_u]
    FiberedLatticeOp product;     ///< (P_g - P_h)(Q_u - Q_v)
    double commutator_trace_norm = 0.0;
    double product_trace_norm = 0.0;
};

/// Checks both bipolarisation conditions; throws NotFiniteRank if either fails.
BipolarReport bipolar_verify(const Monomial2& g, const Monomial2& h, const Monomial2& u, const Monomial2& v);

/// Omega(lambda, mu)(p) on pi_lambda(p) (+) pi_mu(p).
FiberedLatticeOp Omega_op(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& p);

/// F(lambda, mu)(p, q): pi_lambda(p) (+) pi_mu(q) -> pi_lambda(q) (+) pi_mu(p). Throws IdealViolation.
FiberedLatticeOp F_op(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& p,
                      const RingIdempotent& q);

/// F^{ij}(lambda)(p) for 0-based positions i < j.
FiberedLatticeOp big_F(const std::vector<SigmaIndex>& lambda, size_t i, size_t j,
                       const std::vector<RingIdempotent>& p);

/// Omega^{ij}(lambda)(p), requires p_i = p_j.
FiberedLatticeOp big_Omega(const std::vector<SigmaIndex>& lambda, size_t i, size_t j,
                           const std::vector<RingIdempotent>& p);

/// Slotwise space (+)_k pi_{lambda_k}(p_k).
SlotSpace sigma_space(const std::vector<SigmaIndex>& lambda, const std::vector<RingIdempotent>& p);

/// Support of sigma_k(1 - x); empty for the unit.
std::vector<BoxIndicator> sigma_complement(const SigmaIndex& k, const RingIdempotent& x);

/// Slotwise space (+)_k pi_{lambda_k}(1 - p_k).
SlotSpace complement_space(const std::vector<SigmaIndex>& lambda, const std::vector<RingIdempotent>& p);

/// Monomials agree in exponents and, up to rounding, in the coefficient.
bool same_monomial(const Monomial2& a, const Monomial2& b, double rel_tol = 1e-12);
bool same_idempotent(const RingIdempotent& a, const RingIdempotent& b);
bool same_index(const SigmaIndex& a, const SigmaIndex& b);

struct AssumptionSample {
    SigmaIndex lambda, mu, nu;
    RingIdempotent x;
    Monomial2 u, v;
};

struct AssumptionReport {
    size_t checked = 0;
    size_t condition1_failures = 0;
    size_t condition2_failures = 0;
    bool ok() const { return condition1_failures == 0 && condition2_failures == 0; }
};

/// Verifies the two trace class conditions on the representation family for each sample.
AssumptionReport assumption_check(const std::vector<AssumptionSample>& samples);

}  // namespace detline
