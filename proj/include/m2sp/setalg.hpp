#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "m2sp/mat2.hpp"
#include "m2sp/transform.hpp"

namespace m2sp {

enum class Op { Add, Mul };

// Deduplicated subset of M_2(F_q) with O(1) membership on the canonical index.
class MatSet {
  public:
    MatSet() = default;

    static MatSet from_indices(Field f, std::vector<u32> idx) {
        MatSet s;
        s.field_ = std::move(f);
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        s.members_ = std::move(idx);
        u32 n = m2_universe_size(s.field_->q());
        if (!s.members_.empty() && s.members_.back() >= n)
            fail(Errc::ConfigInvalid, "matrix index out of range");
        s.bitmap_.assign((n + 63) / 64, 0);
        for (u32 i : s.members_) s.bitmap_[i >> 6] |= u64(1) << (i & 63);
        return s;
    }

    static MatSet from_matrices(Field f, const std::vector<Mat2>& mats) {
        std::vector<u32> idx;
        idx.reserve(mats.size());
        for (const Mat2& m : mats) idx.push_back(m2_index(m, f->q()));
        return from_indices(std::move(f), std::move(idx));
    }

    static MatSet full_m2(Field f) {
        auto idx = all_m2_indices(*f);
        return from_indices(std::move(f), std::move(idx));
    }

    static MatSet full_gl2(Field f) {
        auto idx = gl2_indices(*f);
        return from_indices(std::move(f), std::move(idx));
    }

    static MatSet empty(Field f) { return from_indices(std::move(f), {}); }

    const Field& field() const { return field_; }
    const std::vector<u32>& members() const { return members_; }
    u64 size() const { return members_.size(); }
    bool empty_set() const { return members_.empty(); }

    bool contains(u32 idx) const { return (bitmap_[idx >> 6] >> (idx & 63)) & 1; }
    bool contains(const Mat2& m) const { return contains(m2_index(m, field_->q())); }

    std::vector<Mat2> matrices() const {
        std::vector<Mat2> v;
        v.reserve(members_.size());
        for (u32 i : members_) v.push_back(m2_from_index(i, field_->q()));
        return v;
    }

    bool is_subset_of_gl2() const {
        for (u32 i : members_)
            if (m2_det(*field_, m2_from_index(i, field_->q())) == 0) return false;
        return true;
    }

    MatSet inverses() const {
        std::vector<u32> idx;
        idx.reserve(members_.size());
        for (u32 i : members_)
            idx.push_back(m2_index(m2_inverse(*field_, m2_from_index(i, field_->q())), field_->q()));
        return from_indices(field_, std::move(idx));
    }

    MatSet negated() const {
        std::vector<u32> idx;
        idx.reserve(members_.size());
        for (u32 i : members_)
            idx.push_back(m2_index(m2_neg(*field_, m2_from_index(i, field_->q())), field_->q()));
        return from_indices(field_, std::move(idx));
    }

    MatSet set_minus(const MatSet& other) const {
        std::vector<u32> idx;
        for (u32 i : members_)
            if (!other.contains(i)) idx.push_back(i);
        return from_indices(field_, std::move(idx));
    }

    MatSet set_union(const MatSet& other) const {
        std::vector<u32> idx = members_;
        idx.insert(idx.end(), other.members_.begin(), other.members_.end());
        return from_indices(field_, std::move(idx));
    }

    bool intersects(const MatSet& other) const {
        const MatSet& small = size() <= other.size() ? *this : other;
        const MatSet& big = size() <= other.size() ? other : *this;
        for (u32 i : small.members_)
            if (big.contains(i)) return true;
        return false;
    }

  private:
    Field field_;
    std::vector<u32> members_;
    std::vector<u64> bitmap_;
};

inline void check_same_field(const MatSet& a, const MatSet& b) {
    if (!a.field() || !b.field() || !a.field()->same_as(*b.field()))
        fail(Errc::FieldMismatch, "sets live over different fields");
}

// counts[lambda] = r(lambda); the sum over lambda of counts equals the
// number of generating pairs
struct FreqTable {
    Field field;
    std::vector<u64> counts;

    u128 total() const {
        u128 s = 0;
        for (u64 c : counts) s += c;
        return s;
    }
    u128 sum_squares() const {
        u128 s = 0;
        for (u64 c : counts) s += u128(c) * c;
        return s;
    }
    u64 support_size() const {
        u64 s = 0;
        for (u64 c : counts) s += c != 0;
        return s;
    }
    MatSet support_set() const {
        std::vector<u32> idx;
        for (u32 i = 0; i < counts.size(); ++i)
            if (counts[i]) idx.push_back(i);
        return MatSet::from_indices(field, std::move(idx));
    }
};

inline FreqTable rep_function(const MatSet& A, const MatSet& B, Op op) {
    check_same_field(A, B);
    const FieldSpec& F = *A.field();
    int q = F.q();
    FreqTable t{A.field(), std::vector<u64>(m2_universe_size(q), 0)};
    auto am = A.matrices();
    auto bm = B.matrices();
    for (const Mat2& a : am) {
        for (const Mat2& b : bm) {
            Mat2 r = op == Op::Add ? m2_add(F, a, b) : m2_mul(F, a, b);
            ++t.counts[m2_index(r, q)];
        }
    }
    return t;
}

inline MatSet set_sum(const MatSet& A, const MatSet& B) {
    check_same_field(A, B);
    const FieldSpec& F = *A.field();
    int q = F.q();
    std::vector<u64> seen((m2_universe_size(q) + 63) / 64, 0);
    auto am = A.matrices();
    auto bm = B.matrices();
    for (const Mat2& a : am)
        for (const Mat2& b : bm) {
            u32 i = m2_index(m2_add(F, a, b), q);
            seen[i >> 6] |= u64(1) << (i & 63);
        }
    std::vector<u32> idx;
    for (u32 i = 0; i < m2_universe_size(q); ++i)
        if ((seen[i >> 6] >> (i & 63)) & 1) idx.push_back(i);
    return MatSet::from_indices(A.field(), std::move(idx));
}

// order-sensitive: AB, not BA
inline MatSet set_prod(const MatSet& A, const MatSet& B) {
    check_same_field(A, B);
    const FieldSpec& F = *A.field();
    int q = F.q();
    std::vector<u64> seen((m2_universe_size(q) + 63) / 64, 0);
    auto am = A.matrices();
    auto bm = B.matrices();
    for (const Mat2& a : am)
        for (const Mat2& b : bm) {
            u32 i = m2_index(m2_mul(F, a, b), q);
            seen[i >> 6] |= u64(1) << (i & 63);
        }
    std::vector<u32> idx;
    for (u32 i = 0; i < m2_universe_size(q); ++i)
        if ((seen[i >> 6] >> (i & 63)) & 1) idx.push_back(i);
    return MatSet::from_indices(A.field(), std::move(idx));
}

// number of quadruples (a,a',b,b') with a∘b = a'∘b'
inline u128 energy(const MatSet& A, const MatSet& B, Op op) {
    if (A.empty_set() || B.empty_set()) return 0;
    return rep_function(A, B, op).sum_squares();
}

inline u128 energy(const MatSet& A, Op op) { return energy(A, A, op); }

// ---- additive convolution of frequency tables over (M_2(F_q), +) ----

// naive O(N^2) reference; also the dispatch target for q <= 4
inline std::vector<u64> convolve_tables_naive(const std::vector<u64>& a, const std::vector<u64>& b,
                                              const FieldSpec& F) {
    int q = F.q();
    u32 n = m2_universe_size(q);
    std::vector<u64> out(n, 0);
    for (u32 i = 0; i < n; ++i) {
        if (!a[i]) continue;
        Mat2 mi = m2_from_index(i, q);
        for (u32 j = 0; j < n; ++j) {
            if (!b[j]) continue;
            out[m2_index(m2_add(F, mi, m2_from_index(j, q)), q)] += a[i] * b[j];
        }
    }
    return out;
}

inline std::vector<u64> convolve_tables(const std::vector<u64>& a, const std::vector<u64>& b,
                                        const FieldSpec& F) {
    if (F.q() <= 4) return convolve_tables_naive(a, b, F);
    // the matrix index is the base-p digit string of the 4k coordinates, so
    // the group is (F_p)^{4k} in index order
    return xform::convolve_exact(a, b, F.p(), 4 * F.k());
}

// exact number of sextuples with ab + ef = c + d
inline u128 count_I(const MatSet& A, const MatSet& B, const MatSet& C, const MatSet& D,
                    const MatSet& E, const MatSet& Fs) {
    check_same_field(A, B);
    check_same_field(A, C);
    check_same_field(A, D);
    check_same_field(A, E);
    check_same_field(A, Fs);
    if (A.empty_set() || B.empty_set() || C.empty_set() || D.empty_set() || E.empty_set() ||
        Fs.empty_set())
        return 0;
    FreqTable rAB = rep_function(A, B, Op::Mul);
    FreqTable rEF = rep_function(E, Fs, Op::Mul);
    FreqTable rCD = rep_function(C, D, Op::Add);
    std::vector<u64> conv = convolve_tables(rAB.counts, rEF.counts, *A.field());
    u128 total = 0;
    for (size_t i = 0; i < conv.size(); ++i) total += u128(conv[i]) * rCD.counts[i];
    return total;
}

// reference path for small instances: enumerate (a,b,e,f,c), d determined
inline u128 count_I_direct(const MatSet& A, const MatSet& B, const MatSet& C, const MatSet& D,
                           const MatSet& E, const MatSet& Fs) {
    const FieldSpec& F = *A.field();
    u128 total = 0;
    for (const Mat2& a : A.matrices())
        for (const Mat2& b : B.matrices()) {
            Mat2 ab = m2_mul(F, a, b);
            for (const Mat2& e : E.matrices())
                for (const Mat2& f : Fs.matrices()) {
                    Mat2 lhs = m2_add(F, ab, m2_mul(F, e, f));
                    for (const Mat2& c : C.matrices()) {
                        Mat2 d = m2_sub(F, lhs, c);
                        if (D.contains(d)) ++total;
                    }
                }
        }
    return total;
}

// exact number of (a,b,c,d) in AxBxCxD with a + b = cd
inline u128 count_J(const MatSet& A, const MatSet& B, const MatSet& C, const MatSet& D) {
    check_same_field(A, B);
    check_same_field(A, C);
    check_same_field(A, D);
    if (A.empty_set() || B.empty_set() || C.empty_set() || D.empty_set()) return 0;
    FreqTable rAB = rep_function(A, B, Op::Add);
    FreqTable rCD = rep_function(C, D, Op::Mul);
    u128 total = 0;
    for (size_t i = 0; i < rAB.counts.size(); ++i) total += u128(rAB.counts[i]) * rCD.counts[i];
    return total;
}

// t(lambda) = |{(a,b,c): ab + c = lambda}|
inline FreqTable rep_AB_plus_C(const MatSet& A, const MatSet& B, const MatSet& C) {
    check_same_field(A, B);
    check_same_field(A, C);
    FreqTable rAB = rep_function(A, B, Op::Mul);
    std::vector<u64> ind(rAB.counts.size(), 0);
    for (u32 i : C.members()) ind[i] = 1;
    FreqTable out{A.field(), convolve_tables(rAB.counts, ind, *A.field())};
    return out;
}

// ---- set files: header "q=<p>^<k>", one matrix per line ----

inline void save_set(const MatSet& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoFailure, "cannot open " + path);
    out << "q=" << s.field()->order_string() << "\n";
    for (u32 i : s.members()) out << m2_format(m2_from_index(i, s.field()->q())) << "\n";
    if (!out) fail(Errc::IoFailure, "write failed: " + path);
}

inline MatSet load_set(const std::string& path, const Field& field) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoFailure, "cannot open " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("q=", 0) != 0)
        fail(Errc::ConfigInvalid, "set file must start with q=<p>^<k>: " + path);
    if (header.substr(2) != field->order_string())
        fail(Errc::FieldMismatch, "set file is over q=" + header.substr(2) + ", expected " +
                                      field->order_string());
    std::vector<u32> idx;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        idx.push_back(m2_index(m2_parse(line, field->q()), field->q()));
    }
    return MatSet::from_indices(field, std::move(idx));
}

inline void save_freq_table(const FreqTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoFailure, "cannot open " + path);
    for (u32 i = 0; i < t.counts.size(); ++i)
        if (t.counts[i]) out << i << "," << t.counts[i] << "\n";
    if (!out) fail(Errc::IoFailure, "write failed: " + path);
}

}  // namespace m2sp
