#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "indefsl/bc_algebra.hpp"
#include "indefsl/error.hpp"
#include "indefsl/exact_bc.hpp"

using namespace indefsl;

namespace {

Row4 row(cplx a, cplx b, cplx c, cplx d)
{
    Row4 r;
    r << a, b, c, d;
    return r;
}

oracle::Vec4 vec(const Row4& r)
{
    return {r(0), r(1), r(2), r(3)};
}

ErrorKind kind_of(const Row4& L, const Row4& M, const Row4& N)
{
    try {
        validate_triple(L, M, N);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("concomitant matrix is a Hermitian involution matching the explicit entries")
{
    const Mat4 Q = concomitant_matrix();
    CHECK((Q * Q - Mat4::Identity()).norm() == 0.0);
    CHECK((Q.adjoint() - Q).norm() == 0.0);
    const auto ref = oracle::Q();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(Q(a, b) == ref[a][b]);
}

TEST_CASE("q_form agrees with explicit summation")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
        Row4 x, y;
        for (int j = 0; j < 4; ++j) {
            x(j) = {g(rng), g(rng)};
            y(j) = {g(rng), g(rng)};
        }
        CHECK(std::abs(q_form(x, y) - oracle::qform(vec(x), vec(y))) < 1e-13);
    }
}

TEST_CASE("left Dirichlet with eigenparameter at the right end has Delta = 1")
{
    const Row4 L = row(1, 0, 0, 0), M = row(0, 0, 0, 1), N = row(0, 1, 0, 0);
    const BoundaryTriple t = validate_triple(L, M, N);
    CHECK(t.validated);
    CHECK(t.delta == doctest::Approx(oracle::delta(vec(M), vec(N)).real()).epsilon(1e-15));
    CHECK(t.delta == doctest::Approx(1.0));
    CHECK(t.residuals.max() == 0.0);
}

TEST_CASE("separated family with N = [0 gamma 0 0]: M Q^-1 N* = -i gamma m4 and Delta > 0")
{
    // Separated rows: L = [d1 0 d3 0] on the left end, M = [0 m2 0 m4], N = [0 gamma 0 0].
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 25; ++k) {
        const double d1 = u(rng), d3 = u(rng) + 3.0, m2 = u(rng), m4 = u(rng) + 3.0;
        const double gamma = (k % 2 ? 1.0 : 0.5) * (1.0 + std::abs(u(rng)));
        const Row4 L = row(d1, 0, d3, 0), M = row(0, m2, 0, m4), N = row(0, gamma, 0, 0);
        const BoundaryTriple t = validate_triple(L, M, N);
        const cplx mqn = (M * concomitant_matrix().inverse() * N.adjoint())(0, 0);
        CHECK(std::abs(mqn - cplx(0, -gamma * m4)) <= 1e-12 * gamma * m4);
        CHECK(t.delta > 0.0);
    }
}

TEST_CASE("validation errors")
{
    const Row4 e1 = row(1, 0, 0, 0);
    CHECK(kind_of(e1, e1, e1) == ErrorKind::RankDeficient);
    CHECK(kind_of(Row4::Zero(), row(0, 0, 0, 1), row(0, 1, 0, 0)) == ErrorKind::RankDeficient);
    // i M Q N* = i * (-1) is not real.
    CHECK(kind_of(e1, row(0, 0, 0, 1), row(0, cplx(0, 1), 0, 0)) == ErrorKind::DeltaNotRealNonzero);

    try {
        validate_triple(row(1, 0, cplx(0, 1), 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
        FAIL("expected QFormViolation");
    } catch (const QFormViolation& e) {
        CHECK(e.identity() == "LQL*");
        CHECK(e.residual() > 0.5);
    }
}

TEST_CASE("form-domain cases from zero patterns")
{
    SUBCASE("essential rows only: FD4")
    {
        const auto t = validate_triple(row(1, 0, 0, 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
        CHECK(reduce_and_split(t).form_domain_case == FormDomainCase::FD4);
    }
    SUBCASE("derivative in L only: FD3")
    {
        const auto t = validate_triple(row(1, 0, 1, 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
        const EchelonSplit s = reduce_and_split(t);
        CHECK(s.form_domain_case == FormDomainCase::FD3);
        CHECK(s.N_n.norm() == 0.0);
        CHECK(s.L_n.norm() > 0.0);
    }
    SUBCASE("derivatives in both L and N: FD1")
    {
        const auto t = validate_triple(row(0, 0, 1, 0), row(0, 1, 0, 0), row(0, 0, 1, 1));
        CHECK(t.delta == doctest::Approx(-1.0));
        CHECK(reduce_and_split(t).form_domain_case == FormDomainCase::FD1);
    }
}

TEST_CASE("classification table")
{
    auto classify = [](const Row4& L, const Row4& M, const Row4& N) {
        const auto t = validate_triple(L, M, N);
        return std::make_pair(t, classify_theorem(reduce_and_split(t), t));
    };
    using RC = RequiredCondition;

    const auto [t1, c1] = classify(row(1, 0, 0, 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
    CHECK(c1.theorem == Theorem::Thm6_1);
    CHECK(c1.matched_case == "(b-ii)+(c-iii)");
    CHECK(c1.required_conditions == std::set<RC>{RC::At0});

    const auto [t2, c2] = classify(row(1, 1, 0, 0), row(1, 0, 0, 0), row(0, 0, 1, 1));
    CHECK(t2.delta == doctest::Approx(1.0));
    CHECK(c2.theorem == Theorem::Thm6_2);
    CHECK(c2.required_conditions == std::set<RC>{RC::At0, RC::AtMinus1_or_AtPlus1});

    // L = [0 0 0 1] has L_n != 0 and N = [1 0 0 0] with Delta < 0, so Thm6_1 (b-i)+(c-ii)
    // matches first under the priority order.
    const auto [t3, c3] = classify(row(0, 0, 0, 1), row(0.3, 0, 1, 0), row(1, 0, 0, 0));
    CHECK(t3.delta == doctest::Approx(-1.0));
    CHECK(c3.theorem == Theorem::Thm6_1);
    CHECK(c3.matched_case == "(b-i)+(c-ii)");
    CHECK(c3.sign_delta == -1);

    // L = [1 1 0 0] rules out Thm6_1 and N_n = 0 rules out Thm6_2.
    const auto [t5, c5] = classify(row(1, 1, 0, 0), row(0, 0, 1, 1), row(1, 0, 0, 0));
    CHECK(t5.delta == doctest::Approx(-1.0));
    CHECK(c5.theorem == Theorem::Thm6_3);
    CHECK(c5.required_conditions == std::set<RC>{RC::At0, RC::AtPlus1});
    const auto [t6, c6] = classify(row(1, 1, 0, 0), row(0, 0, -1, -1), row(1, 0, 0, 0));
    CHECK(t6.delta == doctest::Approx(1.0));
    CHECK(c6.theorem == Theorem::Thm6_3);
    CHECK(c6.required_conditions == std::set<RC>{RC::At0, RC::AtMinus1});

    const auto [t4, c4] = classify(row(1, 0, 1, 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
    CHECK(c4.theorem == Theorem::Thm6_1);
    CHECK(c4.matched_case == "(b-i)+(c-iii)");
    CHECK(c4.required_conditions == std::set<RC>{RC::At0});
}

TEST_CASE("exact rationals parse, print and validate")
{
    GaussRational v;
    REQUIRE(parse_gauss_rational("1/3-2/5i", v));
    CHECK(v.re == Rational(1, 3));
    CHECK(v.im == Rational(-2, 5));
    CHECK(to_string(v) == "1/3-2/5i");
    REQUIRE(parse_gauss_rational("0.1", v));
    CHECK(v.re == Rational(1, 10));
    REQUIRE(parse_gauss_rational("-i", v));
    CHECK(to_string(v) == "-i");
    REQUIRE(parse_gauss_rational("2e-3+2i", v));
    CHECK(v.re == Rational(1, 500));
    CHECK_FALSE(parse_gauss_rational("1//2", v));
    CHECK_FALSE(parse_gauss_rational("", v));

    auto r = [](const char* a, const char* b, const char* c, const char* d) {
        ExactRow out;
        const char* s[] = {a, b, c, d};
        for (int k = 0; k < 4; ++k) REQUIRE(parse_gauss_rational(s[k], out[k]));
        return out;
    };
    // 0.1 is not a binary fraction, so only exact arithmetic sees every identity vanish.
    const BoundaryTriple t = validate_triple_exact(r("1", "0", "0.1", "0"), r("0", "0", "0", "1/3"), r("0", "3", "0", "0"));
    CHECK(t.exact);
    CHECK(t.delta == doctest::Approx(1.0));
    CHECK_THROWS_AS(validate_triple_exact(r("1", "0", "i", "0"), r("0", "0", "0", "1"), r("0", "1", "0", "0")),
                    QFormViolation);
}
