#include <catch2/catch_amalgamated.hpp>
#include <cstdio>

#include "m2sp/constructions.hpp"
#include "m2sp/digraph.hpp"

using namespace m2sp;

namespace {

Vertex random_vertex(const DigraphOracle& O, Rng& rng) {
    return vertex_from_index(rng.below(O.n()), O.q());
}

}  // namespace

TEST_CASE("regularity is exhaustive at q = 2") {
    Field f2 = make_field(2, 1);
    for (auto variant : {ProductVariant::LeftProduct, ProductVariant::RightProduct}) {
        DigraphOracle O(f2, variant);
        std::vector<u32> outdeg(4096, 0), indeg(4096, 0);
        for (u64 ui = 0; ui < O.n(); ++ui) {
            Vertex u = vertex_from_index(ui, 2);
            for (u64 wi = 0; wi < O.n(); ++wi) {
                Vertex w = vertex_from_index(wi, 2);
                if (O.has_edge(u, w)) {
                    ++outdeg[ui];
                    ++indeg[wi];
                }
            }
        }
        for (u64 v = 0; v < O.n(); ++v) {
            REQUIRE(outdeg[v] == 256);
            REQUIRE(indeg[v] == 256);
        }
    }
}

TEST_CASE("neighbor streams enumerate q^8 distinct verified neighbors") {
    Field f3 = make_field(3, 1);
    DigraphOracle O(f3, ProductVariant::LeftProduct);
    Rng rng(2024);
    for (int t = 0; t < 20; ++t) {
        Vertex u = random_vertex(O, rng);
        std::vector<u64> seen;
        O.for_each_out_neighbor(u, [&](const Vertex& w) {
            REQUIRE(O.has_edge(u, w));
            seen.push_back(vertex_index(w, 3));
        });
        std::sort(seen.begin(), seen.end());
        REQUIRE(seen.size() == 6561);
        REQUIRE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());

        seen.clear();
        O.for_each_in_neighbor(u, [&](const Vertex& w) {
            REQUIRE(O.has_edge(w, u));
            seen.push_back(vertex_index(w, 3));
        });
        std::sort(seen.begin(), seen.end());
        REQUIRE(seen.size() == 6561);
        REQUIRE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    }
}

TEST_CASE("out-neighbors of the zero vertex") {
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::LeftProduct);
    Vertex zero{m2_zero(), m2_zero(), m2_zero()};
    O.for_each_out_neighbor(zero, [&](const Vertex& w) { REQUIRE(w.c == m2_zero()); });
}

TEST_CASE("classify_pair crafted cases") {
    Field f3 = make_field(3, 1);
    DigraphOracle O(f3, ProductVariant::LeftProduct);
    Vertex u{Mat2{{1, 2, 0, 1}}, Mat2{{2, 0, 1, 1}}, Mat2{{0, 1, 1, 2}}};

    auto cls = classify_pair(u, u, O);
    CHECK(cls.tag == PairTag::Diagonal);
    CHECK(cls.predicted_common_out == 6561);  // q^8

    // abar = I, ebar = 0 -> rank 2
    Vertex v = u;
    v.a = m2_add(*f3, u.a, m2_identity());
    cls = classify_pair(v, u, O);
    CHECK(cls.tag == PairTag::Case3);
    CHECK(cls.predicted_common_out == 81);  // q^4

    // abar = ebar = 0, cbar != 0
    v = u;
    v.c = m2_add(*f3, u.c, m2_identity());
    cls = classify_pair(v, u, O);
    CHECK(cls.tag == PairTag::Rank0Mismatch);
    CHECK(cls.predicted_common_out == 0);

    // rank-1 t with compatible rank-1 cbar: rows (r, 2r) and (s, 2s)
    v = u;
    v.a = m2_add(*f3, u.a, Mat2{{1, 2, 2, 1}});  // abar rows (1,2),(2,4=1)
    v.e = m2_add(*f3, u.e, Mat2{{2, 1, 1, 2}});  // ebar rows (2,1),(4=1,2)
    v.c = m2_add(*f3, u.c, Mat2{{1, 1, 2, 2}});  // cbar rows (1,1),(2,2)
    cls = classify_pair(v, u, O);
    CHECK(cls.tag == PairTag::Case22a);
    CHECK(cls.predicted_common_out == 729);  // q^6
}

TEST_CASE("pair classification matches brute force") {
    for (int qcase = 0; qcase < 2; ++qcase) {
        Field f = qcase == 0 ? make_field(2, 1) : make_field(3, 1);
        DigraphOracle O(f, ProductVariant::LeftProduct);
        Rng rng(31 + qcase);
        int seen_tags = 0;
        for (int t = 0; t < 300; ++t) {
            Vertex u = random_vertex(O, rng);
            Vertex v = random_vertex(O, rng);
            // bias half the trials toward degenerate difference classes
            if (t % 2) {
                v.a = u.a;
                if (t % 4 == 1) v.e = u.e;
            }
            auto cls = classify_pair(u, v, O);
            u64 brute = common_neighbors_bruteforce(u, v, Direction::Out, O);
            CAPTURE(f->q(), vertex_index(u, f->q()), vertex_index(v, f->q()),
                    pair_tag_name(cls.tag));
            REQUIRE(cls.predicted_common_out == brute);
            seen_tags |= 1 << int(cls.tag);
        }
        (void)seen_tags;
    }
}

TEST_CASE("fast common-neighbor counter agrees with the literal enumeration") {
    for (auto variant : {ProductVariant::LeftProduct, ProductVariant::RightProduct}) {
        Field f3 = make_field(3, 1);
        DigraphOracle O(f3, variant);
        Rng rng(47);
        for (int t = 0; t < 60; ++t) {
            Vertex u = random_vertex(O, rng);
            Vertex v = t % 3 ? random_vertex(O, rng) : u;
            if (t % 2) v.a = u.a;
            for (auto dir : {Direction::Out, Direction::In}) {
                REQUIRE(common_neighbors_count(u, v, dir, O) ==
                        common_neighbors_bruteforce(u, v, dir, O));
            }
        }
    }
}

TEST_CASE("gram_weight equals the brute-force common-out count, both variants") {
    for (auto variant : {ProductVariant::LeftProduct, ProductVariant::RightProduct}) {
        Field f3 = make_field(3, 1);
        DigraphOracle O(f3, variant);
        Rng rng(53);
        for (int t = 0; t < 100; ++t) {
            Vertex u = random_vertex(O, rng);
            Vertex v = t % 3 == 0 ? u : random_vertex(O, rng);
            if (t % 2) v.a = u.a;
            if (t % 5 == 0) v.e = u.e;
            REQUIRE(gram_weight(u, v, O) ==
                    common_neighbors_bruteforce(u, v, Direction::Out, O));
        }
    }
}

TEST_CASE("right variant has rank-(1,1) pairs with q^5 common out-neighbors") {
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::RightProduct);
    Vertex u{m2_zero(), m2_zero(), m2_zero()};
    Vertex v{Mat2{{1, 0, 0, 0}}, Mat2{{1, 0, 0, 0}}, m2_zero()};
    u64 w = gram_weight(u, v, O);
    CHECK(w == 32);  // q^5
    CHECK(common_neighbors_bruteforce(u, v, Direction::Out, O) == 32);
}

TEST_CASE("the digraph is not normal: a frozen counterexample") {
    // difference class abar = 0, ebar = E22, cbar = E21 at q = 2 has
    // 64 common out-neighbors but 0 common in-neighbors
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::LeftProduct);
    Vertex u{m2_zero(), m2_zero(), m2_zero()};
    Vertex v{m2_zero(), Mat2{{0, 0, 0, 1}}, Mat2{{0, 0, 1, 0}}};
    CHECK(common_neighbors_bruteforce(u, v, Direction::Out, O) == 64);
    CHECK(common_neighbors_bruteforce(u, v, Direction::In, O) == 0);
}

TEST_CASE("gram identity at q = 2: explicit matrix equals the weight table") {
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::LeftProduct);
    std::vector<i64> gram = explicit_gram_q2(O);
    std::vector<i64> w = gram_weight_table(O);
    const FieldSpec& F = *f2;
    for (u64 ui = 0; ui < 4096; ++ui) {
        Vertex u = vertex_from_index(ui, 2);
        for (u64 vi = 0; vi < 4096; ++vi) {
            Vertex v = vertex_from_index(vi, 2);
            Vertex delta{m2_sub(F, v.a, u.a), m2_sub(F, v.e, u.e), m2_sub(F, v.c, u.c)};
            REQUIRE(gram[ui * 4096 + vi] == w[vertex_index(delta, 2)]);
        }
    }
    // pairs with abar = ebar = 0 and cbar != 0 have weight 0, not the q^4 a
    // difference-only all-ones term would assign them
    for (u32 ic = 1; ic < 16; ++ic) {
        REQUIRE(w[ic] == 0);
        Vertex u{m2_zero(), m2_zero(), m2_zero()};
        Vertex v{m2_zero(), m2_zero(), m2_from_index(ic, 2)};
        REQUIRE(common_neighbors_bruteforce(u, v, Direction::Out, O) == 0);
        REQUIRE(classify_pair(u, v, O).tag == PairTag::Rank0Mismatch);
    }
}

TEST_CASE("exact spectrum at q = 2 and q = 3") {
    // mu^2 = q^12 for both product variants (verified against independent
    // enumeration; the paper's budget is mu^2 <= 4 q^13)
    Field f2 = make_field(2, 1);
    Field f3 = make_field(3, 1);
    for (auto variant : {ProductVariant::LeftProduct, ProductVariant::RightProduct}) {
        SpectralResult r2 = second_eigenvalue(DigraphOracle(f2, variant));
        CHECK(r2.trivial_eigenvalue == 65536);
        CHECK(r2.mu_squared == 4096);
        CHECK(r2.min_nontrivial >= 0);
        CHECK(r2.mu == Catch::Approx(64.0));
        CHECK(r2.constant_c == Catch::Approx(1.0 / std::sqrt(2.0)));

        SpectralResult r3 = second_eigenvalue(DigraphOracle(f3, variant));
        CHECK(r3.trivial_eigenvalue == 43046721);
        CHECK(r3.mu_squared == 531441);
        CHECK(r3.min_nontrivial >= 0);
    }
    CHECK_THROWS_AS(second_eigenvalue(DigraphOracle(make_field(5, 1), ProductVariant::LeftProduct)),
                    Error);
}

TEST_CASE("power iteration cross-checks the transform at q = 2") {
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::LeftProduct);
    std::vector<i64> gram = explicit_gram_q2(O);
    PowerIterationResult pr = power_iteration_gram(gram, 4096, 12345);
    CHECK(std::abs(pr.mu - 64.0) / 64.0 < 1e-6);
}

TEST_CASE("mixing lemma on crafted and random sets") {
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::LeftProduct);
    SpectralResult spec = second_eigenvalue(O);

    // B = C = V: e = n d and zero deviation
    std::vector<u64> all(O.n());
    for (u64 i = 0; i < O.n(); ++i) all[i] = i;
    VertexSet V = VertexSet::from_indices(all, O.n());
    MixingReport full = mixing_deviation(V, V, O, spec.mu_squared);
    CHECK(full.edges == O.n() * O.d());
    CHECK(full.deviation == 0.0);
    CHECK(full.holds);

    // B a single vertex, C its out-neighborhood: e = q^8, deviation q^8(1 - q^-4)
    Vertex b0 = vertex_from_index(777, 2);
    VertexSet B = VertexSet::from_indices({777}, O.n());
    VertexSet C = VertexSet::from_indices(O.out_neighbor_indices(b0), O.n());
    MixingReport r = mixing_deviation(B, C, O, spec.mu_squared);
    CHECK(r.edges == 256);
    CHECK(r.deviation == Catch::Approx(256.0 * (1.0 - 1.0 / 16.0)));
    CHECK(r.holds);

    Rng rng(9);
    for (int t = 0; t < 25; ++t) {
        VertexSet Bs = random_vertex_set(O, 200, rng);
        VertexSet Cs = random_vertex_set(O, 200, rng);
        REQUIRE(mixing_deviation(Bs, Cs, O, spec.mu_squared).holds);
    }
    CHECK_THROWS_AS(mixing_deviation(VertexSet{}, V, O, spec.mu_squared), Error);
}

TEST_CASE("vertex-set files round-trip") {
    Field f3 = make_field(3, 1);
    DigraphOracle O(f3, ProductVariant::LeftProduct);
    Rng rng(88);
    VertexSet s = random_vertex_set(O, 64, rng);
    save_vertex_set(s, "vs_q3.txt");
    VertexSet back = load_vertex_set("vs_q3.txt", O);
    CHECK(back.idx == s.idx);
    std::remove("vs_q3.txt");
    CHECK_THROWS_AS(load_vertex_set("vs_q3.txt", O), Error);
}

TEST_CASE("count_I spectral check") {
    Field f2 = make_field(2, 1);
    DigraphOracle O(f2, ProductVariant::LeftProduct);
    SpectralResult spec = second_eigenvalue(O);
    MatSet full = MatSet::full_m2(f2);
    CountIReport r = count_I_spectral_check(full, full, full, full, full, full, O, spec.mu_squared);
    CHECK(r.count == u128(1) << 20);
    CHECK(r.deviation == 0.0);
    CHECK(r.holds);

    MatSet empty = MatSet::empty(f2);
    CountIReport re = count_I_spectral_check(empty, full, full, full, full, full, O, spec.mu_squared);
    CHECK(re.count == 0);
    CHECK(re.holds);

    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        auto pick = [&] { return random_subset(f2, Universe::M2, 6, rng.next()); };
        MatSet A = pick(), Bs = pick(), C = pick(), D = pick(), E = pick(), Fs = pick();
        REQUIRE(count_I_spectral_check(A, Bs, C, D, E, Fs, O, spec.mu_squared).holds);
    }
}
