#pragma once

#include <string>
#include <vector>

#include "detline/errors.hpp"
#include "detline/linalg.hpp"

namespace detline {

/// Invertible loop on the circle: either mu * z^n or a Laurent polynomial
/// sum_k a_k z^k with a nonvanishing certificate.
class Loop {
public:
    enum class Mode { Monomial, Laurent };

    static constexpr int kCertificatePoints = 4096;
    static constexpr double kCertificateFloor = 1e-6;

    Loop() = default;
    static Loop monomial(cplx mu, long n = 0);
    static Loop z() { return monomial(1.0, 1); }
    static Loop constant(cplx mu) { return monomial(mu, 0); }
    /// coeffs[i] multiplies z^{kmin + i}. Throws Uncertified if min |u| on the
    /// certificate grid is not above kCertificateFloor.
    static Loop laurent(std::vector<cplx> coeffs, long kmin);

    Mode mode() const { return mode_; }
    bool is_monomial() const { return mode_ == Mode::Monomial; }
    cplx mu() const { return mu_; }
    long n() const { return n_; }
    long kmin() const { return kmin_; }
    long kmax() const { return kmin_ + static_cast<long>(coeffs_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }
    cplx coeff(long k) const;
    double min_modulus() const { return min_modulus_; }

    cplx operator()(cplx z) const;
    cplx at_angle(double t) const;  ///< u(e^{2 pi i t})
    cplx derivative_at_angle(double t) const;  ///< d/dt u(e^{2 pi i t})

    /// Products of monomials stay monomial; anything else becomes Laurent.
    Loop operator*(const Loop& o) const;
    bool approx_equal(const Loop& o, double rel_tol = 1e-12) const;
    std::string str() const;

private:
    Mode mode_ = Mode::Monomial;
    cplx mu_ = 1.0;
    long n_ = 0;
    std::vector<cplx> coeffs_{1.0};
    long kmin_ = 0;
    double min_modulus_ = 1.0;
};

/// For monomials the exponent; otherwise the argument increment on the certificate grid / 2 pi.
long winding_number(const Loop& u);

/// Fourier coefficients of 1/u on [-bandwidth, bandwidth] from 4 * window samples.
struct InverseSeries {
    std::vector<cplx> coeffs;  ///< coeffs[i] multiplies z^{i - bandwidth}
    long bandwidth = 0;
    double tail = 0.0;  ///< largest discarded coefficient modulus
    cplx coeff(long k) const;
};

InverseSeries laurent_inverse(const Loop& u, long window);

struct CircleOptions {
    int radius = 64;            ///< window radius N for Laurent loops
    bool force_window = false;  ///< use window mode even for monomials
    bool certify = true;        ///< recompute at N + 16 and compare
    double certify_tol = 1e-8;
};

/// c(g,h) = iota_x^{-1}(alpha_g^{-1} o g(alpha_h^{-1}) o alpha_{gh}) in the category with objects
/// loops u and morphisms |P_v P_u|, where P_u = u P u^{-1} and P projects onto k >= 0.
/// alpha_g in Mor(x, gx) is the perturbation image of 1 under g (P_x g P_x)^{-1} -> P_{gx} P_x for
/// winding zero, otherwise the wedge of the projected unit vectors e_{w(x)}, ... (kernel) against the
/// dual wedge of e_{w(gx)}, ... (cokernel). Throws Unstable if window certification fails.
cplx cres_cocycle(const Loop& g, const Loop& h, const CircleOptions& opt = {});
cplx cres_cocycle(const Loop& g, const Loop& h, const Loop& x, const CircleOptions& opt = {});

/// b(g) with alpha^x_g = b(g) * g(beta) o alpha_g o beta^{-1}, beta the canonical element of Mor(1, x).
/// The cocycles for base objects x and 1 satisfy c_x(g,h) = c_1(g,h) b(gh) / (b(g) b(h)).
cplx base_change_cochain(const Loop& g, const Loop& x, const CircleOptions& opt = {});

/// det((PghP)(PhP)^{-1}(PgP)^{-1}) on P H for winding-zero loops (F_g = 0).
cplx m_uni(const Loop& g, const Loop& h, const CircleOptions& opt = {});

struct TameSymbolResult {
    cplx value = 1.0;
    int q_points = 0;  ///< quadrature points (formula side)
    int radius = 0;    ///< window radius (determinant side, 0 in exact mode)
};

/// c(u,v) / c(v,u).
TameSymbolResult steinberg_pairing(const Loop& u, const Loop& v, const CircleOptions& opt = {});

/// exp((1/2 pi i) int_0^1 log(u) dv / v) * v(1)^{-w(u)} by the trapezoidal rule with a continuous
/// branch of log u started at the principal value. Throws BranchJump on phase steps above pi / 2.
TameSymbolResult tame_symbol_formula(const Loop& u, const Loop& v, int q_points = 4096);

struct ConventionProbe {
    int exponent = 1;  ///< s with steinberg_pairing = tame_symbol_formula^s
    cplx pairing = 1.0;
    cplx formula = 1.0;
};

/// Compares both sides on (z, 2); throws Uncertified if neither exponent fits.
ConventionProbe probe_convention(const CircleOptions& opt = {});

/// The probe on (z, 2) with default options, evaluated once.
int convention_exponent();

}  // namespace detline
