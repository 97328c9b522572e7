#include <catch2/catch_amalgamated.hpp>

#include "m2sp/rng.hpp"
#include "m2sp/setalg.hpp"
#include "m2sp/transform.hpp"

using namespace m2sp;

TEST_CASE("ntt prime machinery") {
    CHECK(xform::is_prime_u64(2));
    CHECK(xform::is_prime_u64((u64(1) << 61) - 1));
    CHECK_FALSE(xform::is_prime_u64(u64(3215031751)));  // strong pseudoprime to 2,3,5,7
    for (int p : {3, 5, 7, 23}) {
        u64 P1 = xform::find_ntt_prime(p, 0);
        u64 P2 = xform::find_ntt_prime(p, 1);
        CHECK(P1 != P2);
        CHECK(P1 % p == 1);
        CHECK(P2 % p == 1);
        u64 r = xform::find_root(p, P1);
        CHECK(r != 1);
        CHECK(xform::powmod(r, p, P1) == 1);
    }
}

TEST_CASE("wht is an involution up to n") {
    Rng rng(3);
    int m = 8;
    std::vector<i64> a(1 << m);
    for (i64& v : a) v = i64(rng.below(1000)) - 500;
    std::vector<i64> orig = a;
    xform::wht(a, m);
    xform::wht(a, m);
    for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == orig[i] << m);
}

TEST_CASE("cayley eigenvalues on a small cyclic group") {
    // Z_3 with symmetric weights w = (2, 1, 1): circulant eigenvalues 4, 1, 1
    std::vector<i64> w{2, 1, 1};
    auto eig = xform::cayley_eigenvalues(w, 3, 1);
    CHECK(eig[0] == 4);
    CHECK(eig[1] == 1);
    CHECK(eig[2] == 1);
}

namespace {
std::vector<u64> random_table(const FieldSpec& F, u64 maxval, Rng& rng, double density) {
    std::vector<u64> t(m2_universe_size(F.q()), 0);
    for (u64& v : t)
        if (rng.unit() < density) v = rng.below(maxval) + 1;
    return t;
}
}  // namespace

TEST_CASE("exact convolution agrees with the naive reference") {
    for (auto [p, k] : {std::pair{2, 1}, {3, 1}, {2, 2}, {5, 1}, {7, 1}, {2, 3}, {3, 2}}) {
        Field f = make_field(p, k);
        Rng rng(41 + f->q());
        auto a = random_table(*f, 1u << 20, rng, 0.3);
        auto b = random_table(*f, 1u << 20, rng, 0.3);
        auto naive = convolve_tables_naive(a, b, *f);
        auto fast = xform::convolve_exact(a, b, f->p(), 4 * f->k());
        CAPTURE(p, k);
        REQUIRE(naive == fast);
    }
}

TEST_CASE("transform convolution at the largest supported orders") {
    // q = 16, 25, 27: the full-table naive reference is out of reach, so
    // compare against a direct sparse convolution
    for (auto [p, k] : {std::pair{2, 4}, {5, 2}, {3, 3}}) {
        Field f = make_field(p, k);
        const FieldSpec& F = *f;
        u32 n = m2_universe_size(f->q());
        Rng rng(7 + f->q());
        std::vector<u64> a(n, 0), b(n, 0);
        for (int i = 0; i < 120; ++i) {
            a[rng.below(n)] += 1 + rng.below(1u << 20);
            b[rng.below(n)] += 1 + rng.below(1u << 20);
        }
        std::vector<u64> expect(n, 0);
        for (u32 i = 0; i < n; ++i) {
            if (!a[i]) continue;
            Mat2 mi = m2_from_index(i, f->q());
            for (u32 j = 0; j < n; ++j) {
                if (!b[j]) continue;
                expect[m2_index(m2_add(F, mi, m2_from_index(j, f->q())), f->q())] += a[i] * b[j];
            }
        }
        auto got = xform::convolve_exact(a, b, f->p(), 4 * f->k());
        CAPTURE(p, k);
        REQUIRE(got == expect);
    }
}

TEST_CASE("convolution with 64-bit-overflowing transform intermediates stays exact") {
    // values near 2^28 over q = 8: the transform coefficients reach ~2^34 and
    // their pointwise products ~2^68, past 64-bit arithmetic, while the
    // convolution outputs themselves stay below 2^64
    Field f = make_field(2, 3);
    Rng rng(99);
    std::vector<u64> a(m2_universe_size(8), 0), b(m2_universe_size(8), 0);
    for (int i = 0; i < 64; ++i) {
        a[rng.below(a.size())] = (u64(1) << 28) + rng.below(1000);
        b[rng.below(b.size())] = (u64(1) << 28) + rng.below(1000);
    }
    auto naive = convolve_tables_naive(a, b, *f);
    auto fast = xform::convolve_exact(a, b, 2, 12);
    REQUIRE(naive == fast);

    // and the guard refuses once an output would no longer fit
    std::vector<u64> big(m2_universe_size(8), 0);
    for (int i = 0; i < 64; ++i) big[rng.below(big.size())] = u64(1) << 33;
    CHECK_THROWS_AS(xform::convolve_exact(big, big, 2, 12), Error);
}
