#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "m2sp/rng.hpp"
#include "m2sp/setalg.hpp"
#include "m2sp/transform.hpp"

namespace m2sp {

// Vertex of the sum-product digraph on M_2(F_q)^3.
struct Vertex {
    Mat2 a, e, c;
    bool operator==(const Vertex&) const = default;
};

inline u64 vertex_index(const Vertex& v, int q) {
    u64 q4 = m2_universe_size(q);
    return (u64(m2_index(v.a, q)) * q4 + m2_index(v.e, q)) * q4 + m2_index(v.c, q);
}

inline Vertex vertex_from_index(u64 idx, int q) {
    u64 q4 = m2_universe_size(q);
    Vertex v;
    v.c = m2_from_index(u32(idx % q4), q);
    idx /= q4;
    v.e = m2_from_index(u32(idx % q4), q);
    v.a = m2_from_index(u32(idx / q4), q);
    return v;
}

// Edge rule: (a,e,c) -> (b,f,d) iff ab + ef = c + d for LeftProduct,
// and ba + ef = c + d for RightProduct.
enum class ProductVariant { LeftProduct, RightProduct };

inline const char* variant_name(ProductVariant v) {
    return v == ProductVariant::LeftProduct ? "left" : "right";
}

enum class Direction { Out, In };

// Implicit representation: n = q^12 vertices, d = q^8, never materialized.
class DigraphOracle {
  public:
    DigraphOracle(Field field, ProductVariant variant)
        : field_(std::move(field)), variant_(variant) {}

    const Field& field() const { return field_; }
    const FieldSpec& F() const { return *field_; }
    ProductVariant variant() const { return variant_; }
    int q() const { return field_->q(); }

    u64 n() const {
        u64 q4 = m2_universe_size(q());
        return q4 * q4 * q4;
    }
    u64 d() const {
        u64 q2 = u64(q()) * q();
        return q2 * q2 * q2 * q2;
    }

    bool has_edge(const Vertex& from, const Vertex& to) const {
        const FieldSpec& F = *field_;
        Mat2 prod = variant_ == ProductVariant::LeftProduct ? m2_mul(F, from.a, to.a)
                                                            : m2_mul(F, to.a, from.a);
        Mat2 lhs = m2_add(F, prod, m2_mul(F, from.e, to.e));
        Mat2 rhs = m2_add(F, from.c, to.c);
        return lhs == rhs;
    }

    // yields each of the q^8 out-neighbors (b,f,d), d determined by (b,f)
    template <typename Fn>
    void for_each_out_neighbor(const Vertex& v, Fn&& fn) const {
        const FieldSpec& F = *field_;
        int q = F.q();
        u32 q4 = m2_universe_size(q);
        for (u32 ib = 0; ib < q4; ++ib) {
            Mat2 b = m2_from_index(ib, q);
            Mat2 prod =
                variant_ == ProductVariant::LeftProduct ? m2_mul(F, v.a, b) : m2_mul(F, b, v.a);
            Mat2 base = m2_sub(F, prod, v.c);
            for (u32 jf = 0; jf < q4; ++jf) {
                Mat2 f = m2_from_index(jf, q);
                Mat2 d = m2_add(F, base, m2_mul(F, v.e, f));
                fn(Vertex{b, f, d});
            }
        }
    }

    // yields each of the q^8 in-neighbors (x,y,z), z determined by (x,y)
    template <typename Fn>
    void for_each_in_neighbor(const Vertex& v, Fn&& fn) const {
        const FieldSpec& F = *field_;
        int q = F.q();
        u32 q4 = m2_universe_size(q);
        for (u32 ix = 0; ix < q4; ++ix) {
            Mat2 x = m2_from_index(ix, q);
            Mat2 prod =
                variant_ == ProductVariant::LeftProduct ? m2_mul(F, x, v.a) : m2_mul(F, v.a, x);
            Mat2 base = m2_sub(F, prod, v.c);
            for (u32 jy = 0; jy < q4; ++jy) {
                Mat2 y = m2_from_index(jy, q);
                Mat2 z = m2_add(F, base, m2_mul(F, y, v.e));
                fn(Vertex{x, y, z});
            }
        }
    }

    std::vector<u64> out_neighbor_indices(const Vertex& v) const {
        std::vector<u64> out;
        out.reserve(d());
        for_each_out_neighbor(v, [&](const Vertex& w) { out.push_back(vertex_index(w, q())); });
        return out;
    }

  private:
    Field field_;
    ProductVariant variant_;
};

// ---- pair classification (the ab-variant case analysis) ----

enum class PairTag { Diagonal, Rank0Mismatch, Case21, Case22a, Case22b, Case23, Case3 };

inline const char* pair_tag_name(PairTag t) {
    switch (t) {
        case PairTag::Diagonal: return "Diagonal";
        case PairTag::Rank0Mismatch: return "Rank0Mismatch";
        case PairTag::Case21: return "Case21";
        case PairTag::Case22a: return "Case22a";
        case PairTag::Case22b: return "Case22b";
        case PairTag::Case23: return "Case23";
        case PairTag::Case3: return "Case3";
    }
    return "?";
}

struct PairClass {
    PairTag tag;
    u64 predicted_common_out;
};

// Case analysis of the difference triple (abar, ebar, cbar) for the
// LeftProduct digraph; common out-neighbors of (u, v) solve
// abar*x + ebar*y = cbar. Tags cover every pair: rank(t) = 0 splits into
// the diagonal and the c-only mismatch class (0 common neighbors).
// A RightProduct oracle is classified by the same analysis of its
// difference triple; right-variant counts come from gram_weight, which can
// take the value q^5 outside this taxonomy.
inline PairClass classify_pair(const Vertex& u, const Vertex& v, const DigraphOracle& O) {
    const FieldSpec& F = O.F();
    u64 q2 = u64(O.q()) * O.q();
    u64 q4 = q2 * q2, q6 = q4 * q2, q8 = q4 * q4;
    Mat2 abar = m2_sub(F, u.a, v.a);
    Mat2 ebar = m2_sub(F, u.e, v.e);
    Mat2 cbar = m2_sub(F, u.c, v.c);
    Block2x4 t{abar, ebar};
    int rt = rank2x4(F, t);
    if (rt == 0) {
        if (cbar.is_zero()) return {PairTag::Diagonal, q8};
        return {PairTag::Rank0Mismatch, 0};
    }
    if (rt == 2) return {PairTag::Case3, q4};
    int rc = m2_rank(F, cbar);
    if (rc == 2) return {PairTag::Case21, 0};
    if (rc == 0) return {PairTag::Case23, q6};
    return proportionality_class(F, t, cbar) == CompatibilityTag::SameFactor
               ? PairClass{PairTag::Case22a, q6}
               : PairClass{PairTag::Case22b, 0};
}

// ---- exact common-neighbor counts ----

// literal q^8 enumeration of u's neighbors, testing adjacency with v
inline u64 common_neighbors_bruteforce(const Vertex& u, const Vertex& v, Direction dir,
                                       const DigraphOracle& O) {
    u64 count = 0;
    if (dir == Direction::Out) {
        O.for_each_out_neighbor(u, [&](const Vertex& w) { count += O.has_edge(v, w); });
    } else {
        O.for_each_in_neighbor(u, [&](const Vertex& w) { count += O.has_edge(w, v); });
    }
    return count;
}

// same count in O(q^4) via a frequency table over one product leg
inline u64 common_neighbors_count(const Vertex& u, const Vertex& v, Direction dir,
                                  const DigraphOracle& O) {
    const FieldSpec& F = O.F();
    int q = F.q();
    u32 q4 = m2_universe_size(q);
    Mat2 abar = m2_sub(F, u.a, v.a);
    Mat2 ebar = m2_sub(F, u.e, v.e);
    Mat2 cbar = m2_sub(F, u.c, v.c);
    bool left = O.variant() == ProductVariant::LeftProduct;
    // Out, left:  abar*x + ebar*y = cbar      In, left:  x*abar + y*ebar = cbar
    // Out, right: x*abar + ebar*y = cbar      In, right: abar*x + y*ebar = cbar
    bool first_on_left = (dir == Direction::Out) == left;
    bool second_on_left = dir == Direction::Out;

    std::vector<u32> freq(q4, 0);
    for (u32 jy = 0; jy < q4; ++jy) {
        Mat2 y = m2_from_index(jy, q);
        Mat2 t = second_on_left ? m2_mul(F, ebar, y) : m2_mul(F, y, ebar);
        ++freq[m2_index(t, q)];
    }
    u64 count = 0;
    for (u32 ix = 0; ix < q4; ++ix) {
        Mat2 x = m2_from_index(ix, q);
        Mat2 t = first_on_left ? m2_mul(F, abar, x) : m2_mul(F, x, abar);
        count += freq[m2_index(m2_sub(F, cbar, t), q)];
    }
    return count;
}

// ---- Gram weight: |N+(u, u+delta)| as a closed form of delta ----

// LeftProduct: abar*x + ebar*y = cbar has q^(8-2R) solutions when both
// columns of cbar lie in the column span of (abar ebar) (R its dimension),
// else none. RightProduct: x*abar + ebar*y = cbar; with r = rank(abar),
// s = rank(ebar) the solution space has dimension 8 - (2r + 2s - rs) when
// consistent, giving counts in {q^8, q^6, q^5, q^4, 0}.
inline u64 gram_weight(const Mat2& da, const Mat2& de, const Mat2& dc, const DigraphOracle& O) {
    const FieldSpec& F = O.F();
    u64 qq = u64(O.q());
    auto qpow = [&](int e) {
        u64 r = 1;
        for (int i = 0; i < e; ++i) r *= qq;
        return r;
    };
    if (O.variant() == ProductVariant::LeftProduct) {
        Span2 cs = col_span(F, da, de);
        if (!cs.contains(F, m2_col(dc, 0)) || !cs.contains(F, m2_col(dc, 1))) return 0;
        return qpow(8 - 2 * cs.dim);
    }
    int ra = m2_rank(F, da);
    int re = m2_rank(F, de);
    if (ra == 2 || re == 2) return qpow(4);
    if (ra == 0 && re == 0) return dc.is_zero() ? qpow(8) : 0;
    if (ra == 1 && re == 0) {
        Span2 rs = row_span(F, da, m2_zero());
        return (rs.contains(F, m2_row(dc, 0)) && rs.contains(F, m2_row(dc, 1))) ? qpow(6) : 0;
    }
    if (ra == 0 && re == 1) {
        Span2 cs = col_span(F, de, m2_zero());
        return (cs.contains(F, m2_col(dc, 0)) && cs.contains(F, m2_col(dc, 1))) ? qpow(6) : 0;
    }
    // ra == re == 1: consistent iff u'^T cbar r' = 0 where u' spans the
    // annihilator of colspace(ebar) and r' the annihilator of rowspace(abar)
    Span2 ce = col_span(F, de, m2_zero());
    Span2 ra1 = row_span(F, da, m2_zero());
    Vec2 up{ce.basis.y, u8(F.neg(ce.basis.x))};
    Vec2 rp{ra1.basis.y, u8(F.neg(ra1.basis.x))};
    int t0 = F.add(F.mul(up.x, dc.e[0]), F.mul(up.y, dc.e[2]));
    int t1 = F.add(F.mul(up.x, dc.e[1]), F.mul(up.y, dc.e[3]));
    int val = F.add(F.mul(t0, rp.x), F.mul(t1, rp.y));
    return val == 0 ? qpow(5) : 0;
}

inline u64 gram_weight(const Vertex& u, const Vertex& v, const DigraphOracle& O) {
    const FieldSpec& F = O.F();
    return gram_weight(m2_sub(F, v.a, u.a), m2_sub(F, v.e, u.e), m2_sub(F, v.c, u.c), O);
}

// ---- exact spectrum via the abelian-Cayley character transform ----

struct SpectralResult {
    ProductVariant variant = ProductVariant::LeftProduct;
    int q = 0;
    double mu = 0;             // sqrt of the largest nontrivial Gram eigenvalue
    u64 mu_squared = 0;        // that eigenvalue, exact
    u64 trivial_eigenvalue = 0;  // must equal d^2 = q^16
    i64 min_nontrivial = 0;      // Gram is PSD, so >= 0
    double constant_c = 0;       // mu / q^{13/2}
    std::vector<u64> gram_spectrum_top;  // largest eigenvalues incl. trivial
    std::string method;
};

inline int max_spectrum_q() { return 4; }

// Full weight table over difference triples, indexed like vertex indices.
inline std::vector<i64> gram_weight_table(const DigraphOracle& O) {
    const FieldSpec& F = O.F();
    int q = F.q();
    u32 q4 = m2_universe_size(q);
    std::vector<i64> w(u64(q4) * q4 * q4);
    for (u32 ia = 0; ia < q4; ++ia) {
        Mat2 da = m2_from_index(ia, q);
        for (u32 ie = 0; ie < q4; ++ie) {
            Mat2 de = m2_from_index(ie, q);
            u64 base = (u64(ia) * q4 + ie) * q4;
            for (u32 ic = 0; ic < q4; ++ic)
                w[base + ic] = i64(gram_weight(da, de, m2_from_index(ic, q), O));
        }
    }
    return w;
}

inline SpectralResult second_eigenvalue(const DigraphOracle& O) {
    int q = O.q();
    if (q > max_spectrum_q())
        fail(Errc::OrderTooLargeForSpectrum,
             "exact spectrum supported for q <= " + std::to_string(max_spectrum_q()));
    std::vector<i64> w = gram_weight_table(O);
    std::vector<i64> eig = xform::cayley_eigenvalues(w, O.F().p(), 12 * O.F().k());

    SpectralResult r;
    r.variant = O.variant();
    r.q = q;
    r.trivial_eigenvalue = u64(eig[0]);
    i64 mx = 0, mn = eig.size() > 1 ? eig[1] : 0;
    for (size_t i = 1; i < eig.size(); ++i) {
        if (eig[i] > mx) mx = eig[i];
        if (eig[i] < mn) mn = eig[i];
    }
    r.mu_squared = u64(mx);
    r.min_nontrivial = mn;
    r.mu = std::sqrt(double(r.mu_squared));
    r.constant_c = r.mu / std::pow(double(q), 6.5);
    std::partial_sort(eig.begin(), eig.begin() + std::min<size_t>(5, eig.size()), eig.end(),
                      std::greater<i64>());
    for (size_t i = 0; i < std::min<size_t>(5, eig.size()); ++i)
        r.gram_spectrum_top.push_back(u64(eig[i]));
    r.method = "character-transform";
    return r;
}

// ---- q = 2 cross-check: explicit Gram assembly + deflated power iteration ----

// 4096x4096 Gram matrix from out-neighbor bitsets (independent of the
// closed-form weights: entries are popcounts of intersections).
inline std::vector<i64> explicit_gram_q2(const DigraphOracle& O) {
    if (O.q() != 2) fail(Errc::BadParameters, "explicit Gram assembly is q = 2 only");
    const u64 n = 4096, words = n / 64;
    std::vector<u64> bits(n * words, 0);
    for (u64 u = 0; u < n; ++u) {
        Vertex vu = vertex_from_index(u, 2);
        O.for_each_out_neighbor(vu, [&](const Vertex& w) {
            u64 wi = vertex_index(w, 2);
            bits[u * words + (wi >> 6)] |= u64(1) << (wi & 63);
        });
    }
    std::vector<i64> gram(n * n);
    for (u64 u = 0; u < n; ++u)
        for (u64 v = 0; v < n; ++v) {
            int acc = 0;
            for (u64 k = 0; k < words; ++k)
                acc += __builtin_popcountll(bits[u * words + k] & bits[v * words + k]);
            gram[u * n + v] = acc;
        }
    return gram;
}

struct PowerIterationResult {
    double mu = 0;           // sqrt of the dominant eigenvalue on the 1-complement
    double lambda = 0;
    int iterations = 0;
    double residual = 0;
};

inline PowerIterationResult power_iteration_gram(const std::vector<i64>& gram, u64 n, u64 seed,
                                                 double rel_residual_stop = 1e-10,
                                                 int max_iters = 10000) {
    Rng rng(seed);
    std::vector<double> v(n), y(n);
    for (u64 i = 0; i < n; ++i) v[i] = rng.unit() - 0.5;
    auto deflate = [&](std::vector<double>& x) {
        double mean = 0;
        for (double t : x) mean += t;
        mean /= double(n);
        for (double& t : x) t -= mean;
    };
    auto normalize = [&](std::vector<double>& x) {
        double s = 0;
        for (double t : x) s += t * t;
        s = std::sqrt(s);
        for (double& t : x) t /= s;
    };
    deflate(v);
    normalize(v);
    PowerIterationResult res;
    for (int it = 0; it < max_iters; ++it) {
        for (u64 i = 0; i < n; ++i) {
            double acc = 0;
            const i64* row = &gram[i * n];
            for (u64 j = 0; j < n; ++j) acc += double(row[j]) * v[j];
            y[i] = acc;
        }
        deflate(y);
        double lambda = 0;
        for (u64 i = 0; i < n; ++i) lambda += y[i] * v[i];
        double rn = 0;
        for (u64 i = 0; i < n; ++i) {
            double d = y[i] - lambda * v[i];
            rn += d * d;
        }
        rn = std::sqrt(rn);
        res.lambda = lambda;
        res.iterations = it + 1;
        res.residual = rn / std::max(1.0, std::abs(lambda));
        normalize(y);
        std::swap(v, y);
        if (res.residual <= rel_residual_stop) break;
    }
    res.mu = std::sqrt(std::max(0.0, res.lambda));
    return res;
}

// ---- vertex sets and the mixing lemma ----

struct VertexSet {
    std::vector<u64> idx;      // sorted unique
    std::vector<u64> bits;     // membership over [0, n)

    static VertexSet from_indices(std::vector<u64> v, u64 n) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        VertexSet s;
        s.bits.assign((n + 63) / 64, 0);
        for (u64 i : v) s.bits[i >> 6] |= u64(1) << (i & 63);
        s.idx = std::move(v);
        return s;
    }
    bool contains(u64 i) const { return (bits[i >> 6] >> (i & 63)) & 1; }
    u64 size() const { return idx.size(); }
};

// vertex-set files: one packed triple index per line
inline void save_vertex_set(const VertexSet& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoFailure, "cannot open " + path);
    for (u64 i : s.idx) out << i << "\n";
    if (!out) fail(Errc::IoFailure, "write failed: " + path);
}

inline VertexSet load_vertex_set(const std::string& path, const DigraphOracle& O) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoFailure, "cannot open " + path);
    std::vector<u64> idx;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        u64 v = std::stoull(line);
        if (v >= O.n()) fail(Errc::ConfigInvalid, "vertex index out of range: " + line);
        idx.push_back(v);
    }
    return VertexSet::from_indices(std::move(idx), O.n());
}

inline VertexSet random_vertex_set(const DigraphOracle& O, u64 size, Rng& rng) {
    std::vector<u64> v;
    std::vector<u64> seen((O.n() + 63) / 64, 0);
    while (v.size() < size) {
        u64 i = rng.below(O.n());
        if (!((seen[i >> 6] >> (i & 63)) & 1)) {
            seen[i >> 6] |= u64(1) << (i & 63);
            v.push_back(i);
        }
    }
    return VertexSet::from_indices(std::move(v), O.n());
}

struct MixingReport {
    u64 edges = 0;
    double main_term = 0;
    double deviation = 0;
    double bound = 0;
    bool holds = false;  // exact integer comparison
};

// e(B,C) counted exactly; the inequality |e - (d/n)|B||C|| <= mu sqrt(|B||C|)
// is tested in integers as (e q^4 - |B||C|)^2 <= mu^2 |B||C| q^8.
inline MixingReport mixing_deviation(const VertexSet& B, const VertexSet& C,
                                     const DigraphOracle& O, u64 mu_squared) {
    if (B.size() == 0 || C.size() == 0) fail(Errc::EmptySet, "mixing needs nonempty vertex sets");
    int q = O.q();
    u64 edges = 0;
    for (u64 ui : B.idx) {
        Vertex u = vertex_from_index(ui, q);
        O.for_each_out_neighbor(
            u, [&](const Vertex& w) { edges += C.contains(vertex_index(w, q)); });
    }
    u64 q4 = m2_universe_size(q);
    u128 lhs_num = u128(edges) * q4;
    u128 rhs_num = u128(B.size()) * C.size();
    u128 dev = lhs_num >= rhs_num ? lhs_num - rhs_num : rhs_num - lhs_num;
    u128 bound_sq = u128(mu_squared) * B.size() * C.size() * q4 * q4;

    MixingReport r;
    r.edges = edges;
    r.main_term = double(rhs_num) / double(q4);
    r.deviation = double(dev) / double(q4);
    r.bound = std::sqrt(double(mu_squared)) * std::sqrt(double(B.size()) * double(C.size()));
    r.holds = dev * dev <= bound_sq;
    return r;
}

struct CountIReport {
    u128 count = 0;
    double main_term = 0;
    double deviation = 0;
    double bound = 0;
    bool holds = false;
};

// |I - prod/q^4| <= mu sqrt(prod), checked in integers via the
// U = A x E x C, W = B x F x D product-set embedding.
inline CountIReport count_I_spectral_check(const MatSet& A, const MatSet& B, const MatSet& C,
                                           const MatSet& D, const MatSet& E, const MatSet& Fs,
                                           const DigraphOracle& O, u64 mu_squared) {
    u128 I = count_I(A, B, C, D, E, Fs);
    u128 prod = u128(A.size()) * B.size() * C.size() * D.size() * E.size() * Fs.size();
    u64 q4 = m2_universe_size(O.q());
    u128 lhs = I * q4;
    u128 dev = lhs >= prod ? lhs - prod : prod - lhs;
    u128 bound_sq = u128(mu_squared) * prod * q4 * q4;

    CountIReport r;
    r.count = I;
    r.main_term = double(prod) / double(q4);
    r.deviation = double(dev) / double(q4);
    r.bound = std::sqrt(double(mu_squared)) * std::sqrt(double(prod));
    r.holds = dev * dev <= bound_sq;
    return r;
}

}  // namespace m2sp
