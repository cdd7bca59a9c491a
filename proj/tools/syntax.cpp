#include "syntax.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace detline::cli {

namespace {

class Cursor {
public:
    explicit Cursor(const std::string& text) {
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) s_ += c;
        if (s_.empty()) throw ParseError("empty input");
    }

    bool done() const { return pos_ == s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    bool accept(const std::string& word) {
        if (s_.compare(pos_, word.size(), word) != 0) return false;
        pos_ += word.size();
        return true;
    }

    double real() {
        double v = 0.0;
        const char* first = s_.data() + pos_;
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc()) fail("expected a number");
        pos_ = static_cast<size_t>(ptr - s_.data());
        return v;
    }

    long integer() {
        const bool paren = accept('(');
        long v = 0;
        const char* first = s_.data() + pos_;
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc()) fail("expected an integer");
        pos_ = static_cast<size_t>(ptr - s_.data());
        if (paren) expect(')');
        return v;
    }

    /// "(re,im)" or a bare real.
    cplx coefficient() {
        if (accept('(')) {
            const double re = real();
            expect(',');
            const double im = real();
            expect(')');
            return {re, im};
        }
        return real();
    }

    bool at_coefficient() const {
        const char c = peek();
        return c == '(' || c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c));
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at position " + std::to_string(pos_) + " in '" + s_ + "'");
    }

private:
    std::string s_;
    size_t pos_ = 0;
};

long exponent(Cursor& c) { return c.accept('^') ? c.integer() : 1; }

std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Monomial2 parse_monomial2(const std::string& text) {
    Cursor c(text);
    Monomial2 m;
    bool have_a = false, have_b = false;
    bool first = true;
    if (c.at_coefficient()) {
        m.mu = c.coefficient();
        first = false;
    }
    while (!c.done()) {
        if (!first) c.expect('*');
        first = false;
        if (c.accept("z1")) {
            if (have_a) c.fail("z1 given twice");
            have_a = true;
            m.a = exponent(c);
        } else if (c.accept("z2")) {
            if (have_b) c.fail("z2 given twice");
            have_b = true;
            m.b = exponent(c);
        } else {
            c.fail("expected z1 or z2");
        }
    }
    if (m.mu == cplx(0.0)) throw ParseError("coefficient must be nonzero in '" + text + "'");
    return m;
}

Loop parse_loop(const std::string& text) {
    if (text.find_first_of(":@") != std::string::npos) {
        Cursor c(text);
        std::vector<cplx> coeffs{c.coefficient()};
        while (c.accept(':')) coeffs.push_back(c.coefficient());
        c.expect('@');
        const long kmin = c.integer();
        if (!c.done()) c.fail("trailing characters");
        return Loop::laurent(std::move(coeffs), kmin);
    }
    Cursor c(text);
    cplx mu = 1.0;
    long n = 0;
    bool have_z = false;
    if (c.at_coefficient()) mu = c.coefficient();
    else if (c.accept('z')) have_z = true, n = exponent(c);
    else c.fail("expected a coefficient or z");
    if (!have_z && c.accept('*')) {
        if (!c.accept('z')) c.fail("expected z");
        n = exponent(c);
    }
    if (!c.done()) c.fail("trailing characters");
    if (mu == cplx(0.0)) throw ParseError("coefficient must be nonzero in '" + text + "'");
    return Loop::monomial(mu, n);
}

std::string format_monomial2(const Monomial2& m) {
    return "(" + number(m.mu.real()) + "," + number(m.mu.imag()) + ")*z1^" + std::to_string(m.a) + "*z2^" +
           std::to_string(m.b);
}

std::string format_loop(const Loop& u) { return u.str(); }

namespace {

void write_json(std::string& out, const nlohmann::json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? "\n" + std::string(static_cast<size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? "\n" + std::string(static_cast<size_t>(indent * depth), ' ') : "";
    const std::string colon = indent > 0 ? ": " : ":";
    if (j.is_object()) {
        if (j.empty()) return void(out += "{}");
        out += "{";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            out += (first ? "" : ",") + pad + nlohmann::json(it.key()).dump() + colon;
            write_json(out, it.value(), indent, depth + 1);
            first = false;
        }
        out += close + "}";
    } else if (j.is_array()) {
        if (j.empty()) return void(out += "[]");
        out += "[";
        for (size_t i = 0; i < j.size(); ++i) {
            out += (i ? "," : "") + pad;
            write_json(out, j[i], indent, depth + 1);
        }
        out += close + "]";
    } else if (j.is_number_float()) {
        const double v = j.get<double>();
        if (!std::isfinite(v)) return void(out += "null");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    } else {
        out += j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    write_json(out, j, indent, 0);
    return out;
}

}  // namespace detline::cli
