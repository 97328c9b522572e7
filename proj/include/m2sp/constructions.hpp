#pragma once

#include <string>
#include <vector>

#include "m2sp/rng.hpp"
#include "m2sp/setalg.hpp"

namespace m2sp {

// A = B = lower-triangular matrices, C = matrices whose (1,2) entry lies in
// X; then AB + C = C's shape class, so |AB + C| = |C| = q^3 |X|.
struct SharpnessTriple {
    MatSet A, B, C;
};

inline MatSet lower_triangular_set(const Field& f) {
    std::vector<u32> idx;
    int q = f->q();
    for (u32 i = 0; i < m2_universe_size(q); ++i)
        if (m2_from_index(i, q).e[1] == 0) idx.push_back(i);
    return MatSet::from_indices(f, std::move(idx));
}

inline MatSet x23_restricted_set(const Field& f, const std::vector<int>& X) {
    if (X.empty()) fail(Errc::EmptyX, "X must be nonempty");
    std::vector<bool> inX(f->q(), false);
    for (int v : X) {
        if (v < 0 || v >= f->q()) fail(Errc::BadParameters, "X value outside F_q");
        inX[v] = true;
    }
    std::vector<u32> idx;
    int q = f->q();
    for (u32 i = 0; i < m2_universe_size(q); ++i)
        if (inX[m2_from_index(i, q).e[1]]) idx.push_back(i);
    return MatSet::from_indices(f, std::move(idx));
}

inline SharpnessTriple sharpness_ab_plus_c(const Field& f, const std::vector<int>& X) {
    MatSet C = x23_restricted_set(f, X);
    MatSet A = lower_triangular_set(f);
    return {A, A, std::move(C)};
}

// V = the F_p-span of 1, x, ..., x^{k-2} (encoded values below p^{k-1});
// A = B has its first row in V x V, C has its right column in F_p x F_p.
// Then (A+B)C has right-column-top in V: |(A+B)C| = q^3 |V| = q^{4-1/k}.
inline MatSet subspace_ab_set(const Field& f) {
    if (f->k() < 2) fail(Errc::BadParameters, "needs an extension field (k >= 2)");
    int q = f->q();
    int vmax = q / f->p();  // |V| = p^{k-1}
    std::vector<u32> idx;
    for (u32 i = 0; i < m2_universe_size(q); ++i) {
        Mat2 m = m2_from_index(i, q);
        if (m.e[0] < vmax && m.e[1] < vmax) idx.push_back(i);
    }
    return MatSet::from_indices(f, std::move(idx));
}

inline MatSet subfield_c_set(const Field& f) {
    if (f->k() < 2) fail(Errc::BadParameters, "needs an extension field (k >= 2)");
    int q = f->q(), p = f->p();
    std::vector<u32> idx;
    for (u32 i = 0; i < m2_universe_size(q); ++i) {
        Mat2 m = m2_from_index(i, q);
        if (m.e[1] < p && m.e[3] < p) idx.push_back(i);
    }
    return MatSet::from_indices(f, std::move(idx));
}

inline SharpnessTriple sharpness_a_plus_b_c(int p, int k) {
    if (k < 2) fail(Errc::BadParameters, "k must be >= 2");
    Field f = make_field(p, k);  // validates p prime, p^k <= 27
    MatSet C = subfield_c_set(f);
    MatSet A = subspace_ab_set(f);
    return {A, A, std::move(C)};
}

// A = {M in GL_2 : det(M) in G} for a multiplicative subgroup G of F_q^*;
// |A| = |G| (q^3 - q) and AA = A (det is multiplicative into G).
inline MatSet det_subgroup_set(const Field& f, const std::vector<int>& G) {
    if (G.empty()) fail(Errc::NotSubgroup, "G is empty");
    std::vector<bool> inG(f->q(), false);
    for (int g : G) {
        if (g <= 0 || g >= f->q()) fail(Errc::NotSubgroup, "G must lie in F_q^*");
        inG[g] = true;
    }
    if (!inG[1]) fail(Errc::NotSubgroup, "G must contain 1");
    for (int a = 1; a < f->q(); ++a)
        for (int b = 1; b < f->q(); ++b)
            if (inG[a] && inG[b] && !inG[f->mul(a, b)])
                fail(Errc::NotSubgroup, "G is not closed under multiplication");
    std::vector<u32> idx;
    int q = f->q();
    for (u32 i = 0; i < m2_universe_size(q); ++i) {
        Mat2 m = m2_from_index(i, q);
        if (inG[m2_det(*f, m)]) idx.push_back(i);
    }
    return MatSet::from_indices(f, std::move(idx));
}

enum class Universe { M2, GL2 };

// uniform without-replacement sample, deterministic in the seed
inline MatSet random_subset(const Field& f, Universe universe, u64 size, u64 seed) {
    std::vector<u32> pool =
        universe == Universe::M2 ? all_m2_indices(*f) : gl2_indices(*f);
    if (size > pool.size()) fail(Errc::SizeTooLarge, "sample larger than universe");
    Rng rng(seed);
    std::vector<u32> picked = sample_indices(pool.size(), size, rng);
    std::vector<u32> idx;
    idx.reserve(size);
    for (u32 pos : picked) idx.push_back(pool[pos]);
    return MatSet::from_indices(f, std::move(idx));
}

}  // namespace m2sp
