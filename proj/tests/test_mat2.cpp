#include <catch2/catch_amalgamated.hpp>

#include "m2sp/mat2.hpp"
#include "m2sp/rng.hpp"

using namespace m2sp;

TEST_CASE("determinant") {
    Field f3 = make_field(3, 1);
    CHECK(m2_det(*f3, m2_identity()) == 1);
    CHECK(m2_det(*f3, Mat2{{1, 2, 0, 1}}) == 1);
    Field f2 = make_field(2, 1);
    CHECK(m2_det(*f2, Mat2{{1, 1, 1, 1}}) == 0);
}

TEST_CASE("inverse") {
    Field f2 = make_field(2, 1);
    CHECK(m2_inverse(*f2, m2_identity()) == m2_identity());
    Mat2 u{{1, 1, 0, 1}};
    CHECK(m2_inverse(*f2, u) == u);  // u^2 = I over F_2
    Field f5 = make_field(5, 1);
    CHECK(m2_inverse(*f5, Mat2{{2, 0, 0, 3}}) == Mat2{{3, 0, 0, 2}});
    CHECK_THROWS_AS(m2_inverse(*f5, Mat2{{1, 2, 2, 4}}), Error);
}

TEST_CASE("rank2x4 by case") {
    Field f2 = make_field(2, 1);
    CHECK(rank2x4(*f2, Block2x4{m2_zero(), m2_zero()}) == 0);
    CHECK(rank2x4(*f2, Block2x4{m2_identity(), m2_zero()}) == 2);
    // rows (1,1,1,0) and (0,0,0,0)
    CHECK(rank2x4(*f2, Block2x4{Mat2{{1, 1, 0, 0}}, Mat2{{1, 0, 0, 0}}}) == 1);
    Field f5 = make_field(5, 1);
    // second row = 3 * first row
    CHECK(rank2x4(*f5, Block2x4{Mat2{{1, 2, 3, 1}}, Mat2{{4, 0, 2, 0}}}) == 1);
    CHECK(rank2x4(*f5, Block2x4{Mat2{{1, 2, 3, 1}}, Mat2{{4, 0, 2, 1}}}) == 2);
}

namespace {
// reference rank of the 2x4 block by row reduction
int rank2x4_elimination(const FieldSpec& F, const Block2x4& t) {
    std::array<std::array<int, 4>, 2> rows;
    for (int i = 0; i < 2; ++i) {
        auto r = t.row(i);
        for (int j = 0; j < 4; ++j) rows[i][j] = r[j];
    }
    int rank = 0;
    int lead = 0;
    for (int col = 0; col < 4 && lead < 2; ++col) {
        int pivot = -1;
        for (int i = lead; i < 2; ++i)
            if (rows[i][col] != 0) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[lead], rows[pivot]);
        int inv = F.inv(rows[lead][col]);
        for (int j = 0; j < 4; ++j) rows[lead][j] = F.mul(rows[lead][j], inv);
        for (int i = 0; i < 2; ++i) {
            if (i == lead || rows[i][col] == 0) continue;
            int c = rows[i][col];
            for (int j = 0; j < 4; ++j) rows[i][j] = F.sub(rows[i][j], F.mul(c, rows[lead][j]));
        }
        ++lead;
        ++rank;
    }
    return rank;
}
}  // namespace

TEST_CASE("rank2x4 matches row reduction") {
    for (auto [p, k] : {std::pair{2, 1}, {3, 1}, {2, 2}}) {
        Field f = make_field(p, k);
        u32 n = m2_universe_size(f->q());
        Rng rng(19);
        // exhaustive at q = 2, sampled otherwise
        u64 total = f->q() == 2 ? u64(n) * n : 20000;
        for (u64 t = 0; t < total; ++t) {
            u32 i = f->q() == 2 ? u32(t / n) : u32(rng.below(n));
            u32 j = f->q() == 2 ? u32(t % n) : u32(rng.below(n));
            Block2x4 blk{m2_from_index(i, f->q()), m2_from_index(j, f->q())};
            REQUIRE(rank2x4(*f, blk) == rank2x4_elimination(*f, blk));
        }
    }
}

TEST_CASE("proportionality class") {
    Field f5 = make_field(5, 1);
    // t rows r, 2r
    Block2x4 t{Mat2{{1, 3, 2, 1}}, Mat2{{0, 4, 0, 3}}};
    REQUIRE(rank2x4(*f5, t) == 1);
    // cbar rows s, 2s -> same factor
    CHECK(proportionality_class(*f5, t, Mat2{{2, 1, 4, 2}}) == CompatibilityTag::SameFactor);
    // cbar rows s, 3s -> incompatible
    CHECK(proportionality_class(*f5, t, Mat2{{2, 1, 1, 3}}) == CompatibilityTag::Incompatible);
    // cbar = 0 -> same factor
    CHECK(proportionality_class(*f5, t, m2_zero()) == CompatibilityTag::SameFactor);
    // zero first row in t: anchor moves to the second row
    Block2x4 t0{Mat2{{0, 0, 1, 2}}, Mat2{{0, 0, 0, 3}}};
    REQUIRE(rank2x4(*f5, t0) == 1);
    CHECK(proportionality_class(*f5, t0, Mat2{{0, 0, 2, 4}}) == CompatibilityTag::SameFactor);
    CHECK(proportionality_class(*f5, t0, Mat2{{1, 0, 2, 4}}) == CompatibilityTag::Incompatible);

    CHECK_THROWS_AS(proportionality_class(*f5, Block2x4{m2_identity(), m2_zero()}, m2_zero()),
                    Error);
}

TEST_CASE("det is multiplicative") {
    for (auto [p, k] : {std::pair{2, 1}, {3, 1}}) {
        Field f = make_field(p, k);
        u32 n = m2_universe_size(f->q());
        for (u32 i = 0; i < n; ++i)
            for (u32 j = 0; j < n; ++j) {
                Mat2 a = m2_from_index(i, f->q()), b = m2_from_index(j, f->q());
                REQUIRE(m2_det(*f, m2_mul(*f, a, b)) ==
                        f->mul(m2_det(*f, a), m2_det(*f, b)));
            }
    }
    for (auto [p, k] : {std::pair{2, 2}, {5, 1}}) {
        Field f = make_field(p, k);
        Rng rng(11);
        u32 n = m2_universe_size(f->q());
        for (int t = 0; t < 10000; ++t) {
            Mat2 a = m2_from_index(u32(rng.below(n)), f->q());
            Mat2 b = m2_from_index(u32(rng.below(n)), f->q());
            REQUIRE(m2_det(*f, m2_mul(*f, a, b)) == f->mul(m2_det(*f, a), m2_det(*f, b)));
        }
    }
}

TEST_CASE("inverse anti-homomorphism") {
    Field f2 = make_field(2, 1);
    auto gl = gl2_indices(*f2);
    REQUIRE(gl.size() == 6);
    for (u32 i : gl)
        for (u32 j : gl) {
            Mat2 a = m2_from_index(i, 2), b = m2_from_index(j, 2);
            REQUIRE(m2_inverse(*f2, m2_mul(*f2, a, b)) ==
                    m2_mul(*f2, m2_inverse(*f2, b), m2_inverse(*f2, a)));
        }
    for (auto [p, k] : {std::pair{3, 1}, {2, 2}, {5, 1}}) {
        Field f = make_field(p, k);
        auto g = gl2_indices(*f);
        Rng rng(12);
        for (int t = 0; t < 10000; ++t) {
            Mat2 a = m2_from_index(g[rng.below(g.size())], f->q());
            Mat2 b = m2_from_index(g[rng.below(g.size())], f->q());
            REQUIRE(m2_inverse(*f, m2_mul(*f, a, b)) ==
                    m2_mul(*f, m2_inverse(*f, b), m2_inverse(*f, a)));
        }
    }
}

TEST_CASE("GL2 order") {
    for (auto [p, k] : {std::pair{2, 1}, {3, 1}, {2, 2}, {5, 1}}) {
        Field f = make_field(p, k);
        u64 q = f->q();
        CHECK(gl2_indices(*f).size() == (q * q - 1) * (q * q - q));
    }
}

TEST_CASE("index encoding round-trips") {
    for (auto [p, k] : {std::pair{2, 1}, {3, 1}, {2, 2}, {5, 1}}) {
        Field f = make_field(p, k);
        for (u32 i = 0; i < m2_universe_size(f->q()); ++i)
            REQUIRE(m2_index(m2_from_index(i, f->q()), f->q()) == i);
    }
}

TEST_CASE("text format round-trips") {
    Field f5 = make_field(5, 1);
    Mat2 m{{4, 0, 3, 2}};
    CHECK(m2_format(m) == "4,0,3,2");
    CHECK(m2_parse("4,0,3,2", 5) == m);
    CHECK_THROWS_AS(m2_parse("4,0,3", 5), Error);
    CHECK_THROWS_AS(m2_parse("5,0,0,0", 5), Error);
}
