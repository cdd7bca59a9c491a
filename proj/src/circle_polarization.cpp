#include "detline/circle_polarization.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "detline/coproduct_cat.hpp"
#include "detline/fredholm_lines.hpp"

namespace detline {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<cplx> trim(std::vector<cplx> c, long& kmin) {
    double top = 0.0;
    for (const cplx& v : c) top = std::max(top, std::abs(v));
    const double cut = 1e-15 * top;
    size_t lo = 0, hi = c.size();
    while (lo < hi && std::abs(c[lo]) <= cut) ++lo;
    while (hi > lo && std::abs(c[hi - 1]) <= cut) --hi;
    if (lo == hi) throw Uncertified("zero loop");
    kmin += static_cast<long>(lo);
    return {c.begin() + static_cast<std::ptrdiff_t>(lo), c.begin() + static_cast<std::ptrdiff_t>(hi)};
}

}  // namespace

// ---------------------------------------------------------------- loops

Loop Loop::monomial(cplx mu, long n) {
    if (mu == 0.0) throw Uncertified("monomial with zero coefficient");
    Loop l;
    l.mode_ = Mode::Monomial;
    l.mu_ = mu;
    l.n_ = n;
    l.coeffs_ = {mu};
    l.kmin_ = n;
    l.min_modulus_ = std::abs(mu);
    return l;
}

Loop Loop::laurent(std::vector<cplx> coeffs, long kmin) {
    if (coeffs.empty()) throw Uncertified("empty coefficient list");
    Loop l;
    l.mode_ = Mode::Laurent;
    l.coeffs_ = trim(std::move(coeffs), kmin);
    l.kmin_ = kmin;
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kCertificatePoints; ++j)
        m = std::min(m, std::abs(l.at_angle(static_cast<double>(j) / kCertificatePoints)));
    l.min_modulus_ = m;
    if (!(m > kCertificateFloor)) throw Uncertified("loop vanishes on the certificate grid");
    return l;
}

cplx Loop::coeff(long k) const {
    if (k < kmin_ || k > kmax()) return 0.0;
    return coeffs_[static_cast<size_t>(k - kmin_)];
}

cplx Loop::operator()(cplx z) const {
    cplx s = 0.0;
    for (long k = kmax(); k >= kmin_; --k) s = s * z + coeff(k);
    return s * std::pow(z, static_cast<double>(kmin_));
}

cplx Loop::at_angle(double t) const {
    cplx s = 0.0;
    for (size_t i = 0; i < coeffs_.size(); ++i)
        s += coeffs_[i] * std::polar(1.0, kTwoPi * t * static_cast<double>(kmin_ + static_cast<long>(i)));
    return s;
}

cplx Loop::derivative_at_angle(double t) const {
    cplx s = 0.0;
    for (size_t i = 0; i < coeffs_.size(); ++i) {
        const long k = kmin_ + static_cast<long>(i);
        s += cplx(0.0, kTwoPi * static_cast<double>(k)) * coeffs_[i] *
             std::polar(1.0, kTwoPi * t * static_cast<double>(k));
    }
    return s;
}

Loop Loop::operator*(const Loop& o) const {
    if (is_monomial() && o.is_monomial()) return monomial(mu_ * o.mu_, n_ + o.n_);
    std::vector<cplx> c(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
    for (size_t i = 0; i < coeffs_.size(); ++i)
        for (size_t j = 0; j < o.coeffs_.size(); ++j) c[i + j] += coeffs_[i] * o.coeffs_[j];
    return laurent(std::move(c), kmin_ + o.kmin_);
}

bool Loop::approx_equal(const Loop& o, double rel_tol) const {
    double scale = 0.0;
    for (const cplx& c : coeffs_) scale = std::max(scale, std::abs(c));
    const long lo = std::min(kmin_, o.kmin_), hi = std::max(kmax(), o.kmax());
    for (long k = lo; k <= hi; ++k)
        if (std::abs(coeff(k) - o.coeff(k)) > rel_tol * scale) return false;
    return true;
}

std::string Loop::str() const {
    std::ostringstream os;
    os.precision(17);
    if (is_monomial()) {
        os << "(" << mu_.real() << "," << mu_.imag() << ")*z^" << n_;
        return os.str();
    }
    for (size_t i = 0; i < coeffs_.size(); ++i) {
        if (i) os << ":";
        os << "(" << coeffs_[i].real() << "," << coeffs_[i].imag() << ")";
    }
    os << "@" << kmin_;
    return os.str();
}

long winding_number(const Loop& u) {
    if (u.is_monomial()) return u.n();
    if (!(u.min_modulus() > Loop::kCertificateFloor)) throw Uncertified("loop is not certified nonvanishing");
    double total = 0.0;
    cplx prev = u.at_angle(0.0);
    for (int j = 1; j <= Loop::kCertificatePoints; ++j) {
        const cplx cur = u.at_angle(static_cast<double>(j) / Loop::kCertificatePoints);
        total += std::arg(cur / prev);
        prev = cur;
    }
    return std::lround(total / kTwoPi);
}

cplx InverseSeries::coeff(long k) const {
    if (k < -bandwidth || k > bandwidth) return 0.0;
    return coeffs[static_cast<size_t>(k + bandwidth)];
}

InverseSeries laurent_inverse(const Loop& u, long window) {
    if (window < 1) throw ShapeMismatch("window must be positive");
    InverseSeries s;
    s.bandwidth = window;
    if (u.is_monomial()) {
        s.coeffs.assign(static_cast<size_t>(2 * window + 1), 0.0);
        if (std::abs(u.n()) <= window) s.coeffs[static_cast<size_t>(window - u.n())] = 1.0 / u.mu();
        return s;
    }
    const long g = 4 * window;
    std::vector<cplx> in(static_cast<size_t>(g)), out(static_cast<size_t>(g));
    for (long j = 0; j < g; ++j) in[static_cast<size_t>(j)] = 1.0 / u.at_angle(static_cast<double>(j) / g);
    {
        static std::mutex plan_mutex;
        fftw_plan p;
        {
            std::lock_guard<std::mutex> lock(plan_mutex);
            p = fftw_plan_dft_1d(static_cast<int>(g), reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        }
        fftw_execute(p);
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(p);
    }
    auto at = [&](long k) { return out[static_cast<size_t>((k % g + g) % g)] / static_cast<double>(g); };
    s.coeffs.resize(static_cast<size_t>(2 * window + 1));
    for (long k = -window; k <= window; ++k) s.coeffs[static_cast<size_t>(k + window)] = at(k);
    for (long k = window + 1; k <= g / 2; ++k) s.tail = std::max({s.tail, std::abs(at(k)), std::abs(at(-k))});
    return s;
}

namespace {

// ---------------------------------------------------------------- category pipeline
//
// A model supplies objects (loops with their projection P_u), the lines
// |P_v P_u| : Im P_u -> Im P_v and |P_w P_v P_u|, the action |g, g| of a loop
// on morphism lines, and the coefficient of alpha_g on the frame of Mor(x, gx).

template <class Model>
struct Pipeline {
    const Model& m;
    using Obj = typename Model::Object;

    /// x (x) y on frames of Mor(u,v), Mor(v,w) -> coefficient on the frame of Mor(u,w).
    cplx compose(const Obj& u, const Obj& v, const Obj& w, cplx x, cplx y) const {
        const auto a = m.line(u, v), b = m.line(v, w), c = m.line(u, w);
        const auto ab = m.line3(u, v, w);
        return x * y * torsion(a, b, ab) * perturbation(ab, c);
    }

    /// Coefficient of the inverse in Mor(v, u) of the element a of Mor(u, v).
    cplx inverse(const Obj& u, const Obj& v, cplx a) const { return 1.0 / compose(u, v, u, a, 1.0); }

    cplx cocycle(const Loop& g, const Loop& h, const Loop& x) const {
        const Obj& ox = m.object(x);
        const Obj& ogx = m.object(g * x);
        const Obj& ohx = m.object(h * x);
        const Obj& oghx = m.object((g * h) * x);
        const cplx a_gh = m.alpha(g * h, ox, oghx);
        const cplx inv_h = inverse(ox, ohx, m.alpha(h, ox, ohx));
        const cplx inv_g = inverse(ox, ogx, m.alpha(g, ox, ogx));
        const cplx g_inv_h = inv_h * m.act(g, ohx, ox, oghx, ogx);
        return compose(ox, ogx, ox, compose(ox, oghx, ogx, a_gh, g_inv_h), inv_g);
    }

    /// alpha^x_g relative to g(beta) o alpha_g o beta^{-1}, beta the alpha of x at base 1.
    cplx base_cochain(const Loop& g, const Loop& x) const {
        const Loop one = Loop::constant(1.0);
        const Obj& o1 = m.object(one);
        const Obj& og = m.object(g);
        const Obj& ox = m.object(x);
        const Obj& ogx = m.object(g * x);
        const cplx beta = m.alpha(x, o1, ox);
        const cplx g_beta = beta * m.act(g, o1, ox, og, ogx);
        const cplx conj = compose(ox, o1, ogx, inverse(o1, ox, beta), compose(o1, og, ogx, m.alpha(g, o1, og), g_beta));
        return m.alpha(g, ox, ogx) / conj;
    }
};

// ---------------------------------------------------------------- exact mode


struct FiberedCircle {
    struct Object {
        Loop loop;
        SlotSpace space;
    };
    mutable std::vector<std::unique_ptr<Object>> cache;

    const Object& object(const Loop& u) const {
        if (!u.is_monomial()) throw ShapeMismatch("exact mode handles monomial loops only");
        for (const auto& o : cache)
            if (o->loop.approx_equal(u)) return *o;
        auto o = std::make_unique<Object>();
        o->loop = u;
        o->space.dim = 1;
        o->space.add("P_u", {BoxIndicator::make(Interval::at_least(u.n()))});
        cache.push_back(std::move(o));
        return *cache.back();
    }

    static FiberedLatticeOp op(const Object& u, const Object& v) {
        return FiberedLatticeOp(u.space, v.space, {{0, 0, 1.0, BoxIndicator::all()}});
    }

    FiberedLine line(const Object& u, const Object& v) const { return det_line(op(u, v)); }
    FiberedLine line3(const Object& u, const Object& v, const Object& w) const {
        return det_line(compose(op(v, w), op(u, v)));
    }

    cplx act(const Loop& g, const Object& u, const Object& v, const Object& gu, const Object& gv) const {
        VectorMap phi;
        phi.shift = {g.n(), 0};
        phi.slot_map = {0};
        phi.scale = {g.mu()};
        phi.target_slots = 1;
        return quasi_map(phi, phi, line(u, v), line(gu, gv));
    }

    // Winding-zero monomials are constants, for which the perturbation choice is the frame 1.
    cplx alpha(const Loop& g, const Object& x, const Object& gx) const {
        (void)g;
        return lattice_frame_coefficient(line(x, gx));
    }
};

// ---------------------------------------------------------------- window mode
//
// Two-sided window [-N, N) of Fourier modes inside an ambient window [-W, W), W = 2N.
// Operators are assembled on the ambient window and compressed, so truncation
// effects at +-W never reach the small window.

Mat toeplitz(const std::function<cplx(long)>& c, long radius) {
    const long n = 2 * radius;
    Mat m(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m(i, j) = c(i - j);
    return m;
}

Mat compress(const Mat& big, long big_radius, long radius) {
    return big.block(big_radius - radius, big_radius - radius, 2 * radius, 2 * radius);
}

struct WindowCircle {
    long n = 64;
    long w = 128;

    struct Object {
        Loop loop;
        Mat mult_big, inv_big;  ///< u and u^{-1} on the ambient window
        Mat proj;               ///< P_u on the small window
        Mat basis;              ///< orthonormal basis of Im P_u
    };
    mutable std::vector<std::unique_ptr<Object>> cache;

    explicit WindowCircle(long radius) : n(radius), w(2 * radius) {}

    const Object& object(const Loop& u) const {
        for (const auto& o : cache)
            if (o->loop.approx_equal(u)) return *o;
        auto o = std::make_unique<Object>();
        o->loop = u;
        o->mult_big = toeplitz([&](long k) { return u.coeff(k); }, w);
        const InverseSeries inv = laurent_inverse(u, 2 * w);
        o->inv_big = toeplitz([&](long k) { return inv.coeff(k); }, w);
        Mat p = Mat::Zero(2 * w, 2 * w);
        for (long k = 0; k < w; ++k) p(w + k, w + k) = 1.0;
        o->proj = compress(o->mult_big * p * o->inv_big, w, n);
        Eigen::JacobiSVD<Mat> svd(o->proj, Eigen::ComputeFullU);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 0.5) ++r;
        o->basis = svd.matrixU().leftCols(r);
        cache.push_back(std::move(o));
        return *cache.back();
    }

    WindowOp op(const Object& u, const Object& v) const { return WindowOp{static_cast<int>(n), v.proj, u.basis, v.basis}; }

    WindowLine line(const Object& u, const Object& v) const { return det_line(op(u, v)); }
    WindowLine line3(const Object& u, const Object& v, const Object& x) const {
        return det_line(compose_ops(op(v, x), op(u, v)));
    }

    cplx act(const Loop& g, const Object& u, const Object& v, const Object& gu, const Object& gv) const {
        const Mat phi = compress(object(g).mult_big, w, n);
        return quasi_map(phi, phi, line(u, v), line(gu, gv));
    }

    cplx alpha(const Loop& g, const Object& x, const Object& gx) const {
        const WindowLine target = line(x, gx);
        if (winding_number(g) == 0) {
            // g (P_x g P_x)^{-1} = g x T(g)^{-1} x^{-1} on Im P_x, T(g) the compression of g to k >= 0.
            const Object& og = object(g);
            const Mat t = og.mult_big.block(w, w, w, w);
            const Eigen::PartialPivLU<Mat> lu(t);
            if (std::abs(lu.determinant()) == 0.0) throw Uncertified("compression of a winding-zero loop is singular");
            Mat tinv = Mat::Zero(2 * w, 2 * w);
            tinv.block(w, w, w, w) = lu.inverse();
            const Mat xbig = og.mult_big * x.mult_big * tinv * x.inv_big;
            const WindowLine from = det_line(WindowOp{static_cast<int>(n), compress(xbig, w, n), x.basis, gx.basis});
            if (!from.ker.empty() || !from.coker.empty()) throw Uncertified("perturbation source is not invertible");
            return perturbation(from, target);
        }
        const long wx = winding_number(x.loop), wgx = winding_number(gx.loop);
        auto coords = [&](const std::vector<CVec>& basis, long first) {
            const auto k = static_cast<Eigen::Index>(basis.size());
            Mat g_(k, k), r(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                for (Eigen::Index j = 0; j < k; ++j) {
                    g_(i, j) = basis[static_cast<size_t>(i)].dot(basis[static_cast<size_t>(j)]);
                    r(i, j) = std::conj(basis[static_cast<size_t>(i)](n + first + j));
                }
            }
            return Mat(g_.partialPivLu().solve(r));
        };
        const cplx da = det(coords(target.ker, wx)), db = det(coords(target.coker, wgx));
        if (std::abs(da) < 1e-6 || std::abs(db) < 1e-6) throw Uncertified("projected unit vectors are degenerate");
        return da / db;
    }
};

bool exact_mode(std::initializer_list<const Loop*> loops, const CircleOptions& opt) {
    if (opt.force_window) return false;
    return std::all_of(loops.begin(), loops.end(), [](const Loop* l) { return l->is_monomial(); });
}

template <class F>
cplx certified(const CircleOptions& opt, F&& eval) {
    if (opt.radius < 4) throw ShapeMismatch("window radius too small");
    const cplx v = eval(opt.radius);
    if (!opt.certify) return v;
    const cplx v2 = eval(opt.radius + 16);
    if (rel_diff(v, v2) > opt.certify_tol) throw Unstable("window value changes between radii N and N+16");
    return v;
}

}  // namespace

cplx cres_cocycle(const Loop& g, const Loop& h, const CircleOptions& opt) {
    return cres_cocycle(g, h, Loop::constant(1.0), opt);
}

cplx cres_cocycle(const Loop& g, const Loop& h, const Loop& x, const CircleOptions& opt) {
    if (exact_mode({&g, &h, &x}, opt)) {
        const FiberedCircle m;
        return Pipeline<FiberedCircle>{m}.cocycle(g, h, x);
    }
    return certified(opt, [&](int radius) {
        const WindowCircle m(radius);
        return Pipeline<WindowCircle>{m}.cocycle(g, h, x);
    });
}

cplx base_change_cochain(const Loop& g, const Loop& x, const CircleOptions& opt) {
    if (exact_mode({&g, &x}, opt)) {
        const FiberedCircle m;
        return Pipeline<FiberedCircle>{m}.base_cochain(g, x);
    }
    return certified(opt, [&](int radius) {
        const WindowCircle m(radius);
        return Pipeline<WindowCircle>{m}.base_cochain(g, x);
    });
}

cplx m_uni(const Loop& g, const Loop& h, const CircleOptions& opt) {
    if (winding_number(g) != 0 || winding_number(h) != 0) throw IndexMismatch("m_uni needs winding-zero loops");
    return certified(opt, [&](int radius) {
        const long n = radius, w = 2 * radius;
        auto compression = [&](const Loop& u) {
            return Mat(toeplitz([&](long k) { return u.coeff(k); }, w).block(w, w, w, w));
        };
        const Mat k = compression(g * h) * compression(h).partialPivLu().inverse() *
                      compression(g).partialPivLu().inverse();
        return det(Mat(k.topLeftCorner(n, n)));
    });
}

TameSymbolResult steinberg_pairing(const Loop& u, const Loop& v, const CircleOptions& opt) {
    TameSymbolResult r;
    r.value = cres_cocycle(u, v, opt) / cres_cocycle(v, u, opt);
    r.radius = exact_mode({&u, &v}, opt) ? 0 : opt.radius;
    return r;
}

TameSymbolResult tame_symbol_formula(const Loop& u, const Loop& v, int q_points) {
    if (q_points < 2) throw ShapeMismatch("at least two quadrature points required");
    const long wu = winding_number(u);
    (void)winding_number(v);
    const double h = 1.0 / q_points;
    cplx log_u = std::log(u.at_angle(0.0));
    cplx sum = 0.0;
    for (int j = 0; j <= q_points; ++j) {
        const double t = j * h;
        const cplx uv = u.at_angle(t);
        if (j > 0) {
            const double d = std::remainder(std::arg(uv) - log_u.imag(), kTwoPi);
            if (std::abs(d) > std::numbers::pi / 2) throw BranchJump("phase jump along the quadrature grid");
            log_u = cplx(std::log(std::abs(uv)), log_u.imag() + d);
        }
        const double weight = (j == 0 || j == q_points) ? 0.5 : 1.0;
        sum += weight * log_u * v.derivative_at_angle(t) / v.at_angle(t);
    }
    TameSymbolResult r;
    r.value = std::exp(sum * h / cplx(0.0, kTwoPi)) * std::pow(v.at_angle(0.0), -static_cast<double>(wu));
    r.q_points = q_points;
    return r;
}

ConventionProbe probe_convention(const CircleOptions& opt) {
    ConventionProbe p;
    const Loop z = Loop::z(), two = Loop::constant(2.0);
    p.pairing = steinberg_pairing(z, two, opt).value;
    p.formula = tame_symbol_formula(z, two).value;
    if (rel_diff(p.pairing, p.formula) <= 1e-9)
        p.exponent = 1;
    else if (rel_diff(p.pairing, 1.0 / p.formula) <= 1e-9)
        p.exponent = -1;
    else
        throw Uncertified("pairing matches neither orientation of the formula on (z, 2)");
    return p;
}

int convention_exponent() {
    static const int s = probe_convention().exponent;
    return s;
}

}  // namespace detline
