#pragma once

#include <array>
#include <string>
#include <vector>

#include "m2sp/gf.hpp"

namespace m2sp {

// 2x2 matrix over F_q; entries are encoded field values.
// e[0]=m11 e[1]=m12 e[2]=m21 e[3]=m22
struct Mat2 {
    std::array<u8, 4> e{0, 0, 0, 0};

    bool operator==(const Mat2&) const = default;
    bool is_zero() const { return e[0] == 0 && e[1] == 0 && e[2] == 0 && e[3] == 0; }
};

inline Mat2 m2_zero() { return {}; }
inline Mat2 m2_identity() { return Mat2{{1, 0, 0, 1}}; }
inline Mat2 m2_scalar(int v) { return Mat2{{u8(v), 0, 0, u8(v)}}; }

// canonical index: ((m11*q + m12)*q + m21)*q + m22, a bijection with [0, q^4)
inline u32 m2_index(const Mat2& m, int q) {
    return ((u32(m.e[0]) * q + m.e[1]) * q + m.e[2]) * q + m.e[3];
}

inline Mat2 m2_from_index(u32 idx, int q) {
    Mat2 m;
    m.e[3] = u8(idx % q);
    idx /= q;
    m.e[2] = u8(idx % q);
    idx /= q;
    m.e[1] = u8(idx % q);
    m.e[0] = u8(idx / q);
    return m;
}

inline u32 m2_universe_size(int q) { return u32(q) * q * q * q; }

inline Mat2 m2_add(const FieldSpec& F, const Mat2& a, const Mat2& b) {
    return Mat2{{u8(F.add(a.e[0], b.e[0])), u8(F.add(a.e[1], b.e[1])),
                 u8(F.add(a.e[2], b.e[2])), u8(F.add(a.e[3], b.e[3]))}};
}

inline Mat2 m2_sub(const FieldSpec& F, const Mat2& a, const Mat2& b) {
    return Mat2{{u8(F.sub(a.e[0], b.e[0])), u8(F.sub(a.e[1], b.e[1])),
                 u8(F.sub(a.e[2], b.e[2])), u8(F.sub(a.e[3], b.e[3]))}};
}

inline Mat2 m2_neg(const FieldSpec& F, const Mat2& a) {
    return Mat2{{u8(F.neg(a.e[0])), u8(F.neg(a.e[1])), u8(F.neg(a.e[2])), u8(F.neg(a.e[3]))}};
}

inline Mat2 m2_mul(const FieldSpec& F, const Mat2& a, const Mat2& b) {
    return Mat2{{u8(F.add(F.mul(a.e[0], b.e[0]), F.mul(a.e[1], b.e[2]))),
                 u8(F.add(F.mul(a.e[0], b.e[1]), F.mul(a.e[1], b.e[3]))),
                 u8(F.add(F.mul(a.e[2], b.e[0]), F.mul(a.e[3], b.e[2]))),
                 u8(F.add(F.mul(a.e[2], b.e[1]), F.mul(a.e[3], b.e[3])))}};
}

inline int m2_det(const FieldSpec& F, const Mat2& m) {
    return F.sub(F.mul(m.e[0], m.e[3]), F.mul(m.e[1], m.e[2]));
}

inline Mat2 m2_inverse(const FieldSpec& F, const Mat2& m) {
    int d = m2_det(F, m);
    if (d == 0) fail(Errc::Singular, "matrix has zero determinant");
    int di = F.inv(d);
    return Mat2{{u8(F.mul(di, m.e[3])), u8(F.mul(di, F.neg(m.e[1]))),
                 u8(F.mul(di, F.neg(m.e[2]))), u8(F.mul(di, m.e[0]))}};
}

inline int m2_rank(const FieldSpec& F, const Mat2& m) {
    if (m.is_zero()) return 0;
    return m2_det(F, m) != 0 ? 2 : 1;
}

// ---- small span helpers over F_q^2, used by the pair classifier ----

struct Vec2 {
    u8 x = 0, y = 0;
    bool operator==(const Vec2&) const = default;
    bool is_zero() const { return x == 0 && y == 0; }
};

// span of up to four 2-vectors: dimension plus a membership test
struct Span2 {
    int dim = 0;
    Vec2 basis;  // only meaningful for dim == 1

    bool contains(const FieldSpec& F, const Vec2& v) const {
        if (dim == 2) return true;
        if (dim == 0) return v.is_zero();
        if (v.is_zero()) return true;
        // v = lam * basis for the lam fixed by the anchor coordinate
        if (basis.x != 0) {
            int lam = F.mul(v.x, F.inv(basis.x));
            return F.mul(lam, basis.y) == v.y;
        }
        return v.x == 0;  // basis = (0, y), y != 0
    }
};

inline Span2 span_of(const FieldSpec& F, std::initializer_list<Vec2> vecs) {
    Span2 s;
    for (const Vec2& v : vecs) {
        if (v.is_zero()) continue;
        if (s.dim == 0) {
            s.dim = 1;
            s.basis = v;
        } else if (s.dim == 1 && !s.contains(F, v)) {
            s.dim = 2;
            break;
        }
    }
    return s;
}

inline Vec2 m2_row(const Mat2& m, int i) { return Vec2{m.e[2 * i], m.e[2 * i + 1]}; }
inline Vec2 m2_col(const Mat2& m, int j) { return Vec2{m.e[j], m.e[2 + j]}; }

inline Span2 row_span(const FieldSpec& F, const Mat2& a, const Mat2& e) {
    return span_of(F, {m2_row(a, 0), m2_row(a, 1), m2_row(e, 0), m2_row(e, 1)});
}

inline Span2 col_span(const FieldSpec& F, const Mat2& a, const Mat2& e) {
    return span_of(F, {m2_col(a, 0), m2_col(a, 1), m2_col(e, 0), m2_col(e, 1)});
}

// ---- the 2x4 block matrix t = (abar ebar) ----

struct Block2x4 {
    Mat2 left;   // abar
    Mat2 right;  // ebar

    std::array<u8, 4> row(int i) const {
        return {left.e[2 * i], left.e[2 * i + 1], right.e[2 * i], right.e[2 * i + 1]};
    }
};

// row rank by direct case analysis: zero / proportional rows / independent
inline int rank2x4(const FieldSpec& F, const Block2x4& t) {
    auto r0 = t.row(0);
    auto r1 = t.row(1);
    bool z0 = r0 == std::array<u8, 4>{0, 0, 0, 0};
    bool z1 = r1 == std::array<u8, 4>{0, 0, 0, 0};
    if (z0 && z1) return 0;
    if (z0 || z1) return 1;
    // both rows nonzero: rank 1 iff r1 = lam * r0
    int anchor = 0;
    while (r0[anchor] == 0) ++anchor;
    if (r1[anchor] == 0) return 2;
    int lam = F.mul(r1[anchor], F.inv(r0[anchor]));
    for (int j = 0; j < 4; ++j)
        if (F.mul(lam, r0[j]) != r1[j]) return 2;
    return 1;
}

enum class CompatibilityTag { SameFactor, Incompatible };

// For rank-1 t with rows (r, alpha*r) anchored on the lowest-index nonzero
// row: cbar is compatible when its rows carry the same factor structure
// (equivalently, both columns of cbar lie in the column span of t).
// cbar = 0 counts as SameFactor.
inline CompatibilityTag proportionality_class(const FieldSpec& F, const Block2x4& t,
                                              const Mat2& cbar) {
    if (rank2x4(F, t) != 1) fail(Errc::RankMismatch, "t must have rank 1");
    auto r0 = t.row(0);
    bool z0 = r0 == std::array<u8, 4>{0, 0, 0, 0};
    if (!z0) {
        auto r1 = t.row(1);
        int anchor = 0;
        while (r0[anchor] == 0) ++anchor;
        int alpha = F.mul(r1[anchor], F.inv(r0[anchor]));
        // rows of cbar must be (s, alpha*s)
        for (int j = 0; j < 2; ++j)
            if (F.mul(alpha, cbar.e[j]) != cbar.e[2 + j]) return CompatibilityTag::Incompatible;
        return CompatibilityTag::SameFactor;
    }
    // t rows are (0, r): cbar must have zero first row
    return (cbar.e[0] == 0 && cbar.e[1] == 0) ? CompatibilityTag::SameFactor
                                              : CompatibilityTag::Incompatible;
}

// ---- enumeration ----

inline std::vector<u32> all_m2_indices(const FieldSpec& F) {
    std::vector<u32> v(m2_universe_size(F.q()));
    for (u32 i = 0; i < v.size(); ++i) v[i] = i;
    return v;
}

inline std::vector<u32> gl2_indices(const FieldSpec& F) {
    std::vector<u32> v;
    u32 n = m2_universe_size(F.q());
    v.reserve(n);
    for (u32 i = 0; i < n; ++i)
        if (m2_det(F, m2_from_index(i, F.q())) != 0) v.push_back(i);
    return v;
}

// ---- text form: "m11,m12,m21,m22" ----

inline std::string m2_format(const Mat2& m) {
    return std::to_string(m.e[0]) + "," + std::to_string(m.e[1]) + "," + std::to_string(m.e[2]) +
           "," + std::to_string(m.e[3]);
}

inline Mat2 m2_parse(const std::string& line, int q) {
    Mat2 m;
    size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        size_t next = line.find(',', pos);
        std::string tok = line.substr(pos, next == std::string::npos ? next : next - pos);
        int v = std::stoi(tok);
        if (v < 0 || v >= q) fail(Errc::ConfigInvalid, "matrix entry out of field range: " + tok);
        m.e[i] = u8(v);
        if (i < 3) {
            if (next == std::string::npos) fail(Errc::ConfigInvalid, "expected four entries: " + line);
            pos = next + 1;
        }
    }
    return m;
}

}  // namespace m2sp
