#pragma once

#include <array>
#include <vector>

#include "detline/coproduct_cat.hpp"

namespace detline {

/// The isomorphism b_{g,h} in H(q_g, q_gh)((e), (g)) with base point q_e. For
/// nonnegative exponents this is omega*_{n1,0,n2,0} (x) omega_{n1,0,n2+m2,0};
/// otherwise both factors are the lattice frames of the lines.
struct BetaChoice {
    Monomial2 g, h;
    HomLineElement b;

    static BetaChoice make(const Monomial2& g, const Monomial2& h);
    /// Degree of beta_{g,h} = id (x) b_{g,h}; equals n1 * m2.
    long degree() const { return b.degree(); }
};

/// Nonzero complex number compared modulo sign.
struct Cocycle3Value {
    cplx value = 1.0;

    /// Representative with nonnegative real part; on the imaginary axis, positive imaginary part.
    cplx canonical() const;
    bool equal_mod_sign(const Cocycle3Value& o, double rel_tol = 1e-9) const;
};

/// Formal integer combination of ordered triples.
struct HomologyCycle3 {
    struct Term {
        long coefficient = 1;
        std::array<Monomial2, 3> triple;
    };
    std::vector<Term> terms;

    /// (f,g,h) - (f,h,g) + (h,f,g) - (h,g,f) + (g,h,f) - (g,f,h).
    static HomologyCycle3 symbol(const Monomial2& f, const Monomial2& g, const Monomial2& h);
};

/// Scalar of the automorphism gamma(g,h,k) of a_g (x) g(a_h) (x) (gh)(a_k) with x = q_e and a_g = (e).
Cocycle3Value cocycle_c(const Monomial2& g, const Monomial2& h, const Monomial2& k);

/// The four-term sign exponent of the closed form.
long closed_form_epsilon(const Monomial2& g, const Monomial2& h, const Monomial2& k);

/// mu^{m1 l2} (-1)^{epsilon(g,h,k)}; throws ExponentRange if an exponent is negative.
Cocycle3Value closed_form(const Monomial2& g, const Monomial2& h, const Monomial2& k);

struct RelationReport {
    cplx lhs = 1.0;  ///< (-1)^{eps(beta_{g,h}) eps(beta_{k,l})} c(gh,k,l) c(g,h,kl)
    cplx rhs = 1.0;  ///< c(h,k,l) c(g,hk,l) c(g,h,k)
    double residual = 0.0;
    bool pass = false;
};

RelationReport verify_relation(const Monomial2& g, const Monomial2& h, const Monomial2& k, const Monomial2& l,
                               double rel_tol = 1e-9);

/// Product of c(triple)^{coefficient} over the cycle.
Cocycle3Value pair_homology(const HomologyCycle3& cycle);

struct ConjectureReport {
    cplx pairing = 1.0;
    cplx formula = 1.0;
    cplx ratio = 1.0;  ///< pairing / formula
    long w1_f = 0, w2_f = 0, w1_g = 0, w2_g = 0;
};

/// Evaluates the conjectured integral formula for the pairing with {f,g,h} by trapezoidal
/// quadrature on a q_points x q_points grid, next to the pairing itself. Throws BranchJump
/// if the continuous logarithm cannot be followed at this resolution.
ConjectureReport conjecture_probe(const Monomial2& f, const Monomial2& g, const Monomial2& h, int q_points = 256);

}  // namespace detline
