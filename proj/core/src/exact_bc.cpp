#include "indefsl/exact_bc.hpp"

#include <cctype>

#include "indefsl/error.hpp"

namespace indefsl {

cplx GaussRational::to_complex() const
{
    return {re.convert_to<double>(), im.convert_to<double>()};
}

GaussRational operator+(const GaussRational& a, const GaussRational& b)
{
    return {a.re + b.re, a.im + b.im};
}

GaussRational operator-(const GaussRational& a, const GaussRational& b)
{
    return {a.re - b.re, a.im - b.im};
}

GaussRational operator*(const GaussRational& a, const GaussRational& b)
{
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

GaussRational operator/(const GaussRational& a, const GaussRational& b)
{
    const Rational d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

GaussRational conj(const GaussRational& a) { return {a.re, -a.im}; }

bool is_zero(const GaussRational& a) { return a.re == 0 && a.im == 0; }

namespace {

// Parses an unsigned rational "p" or "p/q" starting at pos.
bool parse_unsigned(const std::string& s, size_t& pos, Rational& out)
{
    auto digits = [&](boost::multiprecision::cpp_int& v) {
        const size_t start = pos;
        v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            v = v * 10 + (s[pos++] - '0');
        return pos > start;
    };
    boost::multiprecision::cpp_int num, den = 1;
    if (!digits(num)) return false;
    // Decimal fraction and exponent are exact: 0.125 is 1/8, 2e-3 is 1/500.
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            num = num * 10 + (s[pos++] - '0');
            den *= 10;
        }
    }
    if (pos + 1 < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        size_t p = pos + 1;
        int esign = 1;
        if (s[p] == '+' || s[p] == '-') {
            esign = s[p] == '-' ? -1 : 1;
            ++p;
        }
        if (p >= s.size() || !std::isdigit(static_cast<unsigned char>(s[p]))) return false;
        int e = 0;
        while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
            e = e * 10 + (s[p++] - '0');
            if (e > 400) return false;
        }
        pos = p;
        boost::multiprecision::cpp_int ten = boost::multiprecision::pow(boost::multiprecision::cpp_int(10), e);
        if (esign > 0) num *= ten;
        else den *= ten;
    }
    if (pos < s.size() && s[pos] == '/') {
        ++pos;
        if (!digits(den) || den == 0) return false;
    }
    out = Rational(num, den);
    return true;
}

}  // namespace

bool parse_gauss_rational(const std::string& text, GaussRational& out)
{
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) return false;

    GaussRational acc;
    size_t pos = 0;
    bool any = false;
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1 : 1;
            ++pos;
        } else if (any) {
            return false;
        }
        Rational v = 1;
        const bool has_number = pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
        if (has_number && !parse_unsigned(s, pos, v)) return false;
        bool imag = false;
        if (pos < s.size() && s[pos] == 'i') {
            imag = true;
            ++pos;
        } else if (!has_number) {
            return false;
        }
        (imag ? acc.im : acc.re) += sign * v;
        any = true;
    }
    out = acc;
    return true;
}

std::string to_string(const GaussRational& v)
{
    auto text = [](const Rational& r) {
        std::string s = boost::multiprecision::numerator(r).str();
        if (boost::multiprecision::denominator(r) != 1) s += "/" + boost::multiprecision::denominator(r).str();
        return s;
    };
    if (v.im == 0) return text(v.re);
    std::string out = v.re == 0 ? "" : text(v.re);
    const Rational a = v.im < 0 ? Rational(-v.im) : v.im;
    if (v.im < 0) out += "-";
    else if (!out.empty()) out += "+";
    out += (a == 1 ? "" : text(a)) + "i";
    return out;
}

GaussRational q_form_exact(const ExactRow& x, const ExactRow& y)
{
    const GaussRational s =
        (x[2] * conj(y[0]) + x[1] * conj(y[3])) - (x[0] * conj(y[2]) + x[3] * conj(y[1]));
    return GaussRational{0, 1} * s;
}

namespace {

int exact_rank(std::array<ExactRow, 3> a)
{
    int rank = 0;
    for (int col = 0; col < 4 && rank < 3; ++col) {
        int piv = -1;
        for (int r = rank; r < 3; ++r)
            if (!is_zero(a[r][col])) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        for (int r = rank + 1; r < 3; ++r) {
            const GaussRational f = a[r][col] / a[rank][col];
            for (int c = col; c < 4; ++c) a[r][c] = a[r][c] - f * a[rank][c];
        }
        ++rank;
    }
    return rank;
}

Row4 to_row(const ExactRow& x)
{
    Row4 r;
    for (int j = 0; j < 4; ++j) r(j) = x[j].to_complex();
    return r;
}

}  // namespace

BoundaryTriple validate_triple_exact(const ExactRow& L, const ExactRow& M, const ExactRow& N)
{
    const int rank = exact_rank({L, M, N});
    if (rank < 3)
        throw Error(ErrorKind::RankDeficient, "[L; M; N] has rank " + std::to_string(rank));

    const std::pair<const char*, GaussRational> checks[] = {
        {"LQL*", q_form_exact(L, L)}, {"MQM*", q_form_exact(M, M)}, {"NQN*", q_form_exact(N, N)},
        {"LQM*", q_form_exact(L, M)}, {"LQN*", q_form_exact(L, N)}};
    for (const auto& [name, v] : checks)
        if (!is_zero(v)) throw QFormViolation(name, std::abs(v.to_complex()));

    const GaussRational s = q_form_exact(M, N);
    if (is_zero(s)) throw Error(ErrorKind::DeltaNotRealNonzero, "M Q N* vanishes");
    if (s.re != 0) throw Error(ErrorKind::DeltaNotRealNonzero, "i M Q N* is not real");

    BoundaryTriple t;
    t.L = to_row(L);
    t.M = to_row(M);
    t.N = to_row(N);
    // s = i k with k rational, so -i/s = -1/k.
    t.delta = Rational(-1 / s.im).convert_to<double>();
    t.validated = true;
    t.exact = true;
    return t;
}

}  // namespace indefsl
