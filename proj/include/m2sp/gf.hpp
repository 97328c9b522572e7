#pragma once

#include <memory>
#include <string>
#include <vector>

#include "m2sp/common.hpp"

namespace m2sp {

constexpr int kMaxOrder = 27;

// F_q, q = p^k <= 27, elements encoded as integers in [0, q): the base-p
// digits of the value are the coefficients on the polynomial basis
// 1, x, ..., x^{k-1} (for k = 1 the value is the residue itself).
// All arithmetic goes through tables built once at construction.
class FieldSpec {
  public:
    int p() const { return p_; }
    int k() const { return k_; }
    int q() const { return q_; }
    // modulus coefficients, index i = coefficient of x^i, length k+1, monic
    const std::vector<int>& modulus() const { return modulus_; }

    int add(int a, int b) const { return add_[a * q_ + b]; }
    int sub(int a, int b) const { return add_[a * q_ + neg_[b]]; }
    int mul(int a, int b) const { return mul_[a * q_ + b]; }
    int neg(int a) const { return neg_[a]; }

    int inv(int a) const {
        if (a == 0) fail(Errc::ZeroInverse, "inverse of zero");
        return inv_[a];
    }

    bool same_as(const FieldSpec& o) const {
        return p_ == o.p_ && k_ == o.k_ && modulus_ == o.modulus_;
    }

    std::string order_string() const {
        return std::to_string(p_) + "^" + std::to_string(k_);
    }

    // raw table access for hot loops
    const u8* mul_table() const { return mul_.data(); }
    const u8* add_table() const { return add_.data(); }
    const u8* neg_table() const { return neg_.data(); }

  private:
    friend std::shared_ptr<const FieldSpec> make_field(int, int, const std::vector<int>*);

    FieldSpec() = default;

    int p_ = 0, k_ = 0, q_ = 0;
    std::vector<int> modulus_;
    std::vector<u8> add_, mul_, neg_, inv_;
};

using Field = std::shared_ptr<const FieldSpec>;

namespace gfdetail {

inline bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<int> digits(int v, int p, int k) {
    std::vector<int> d(k);
    for (int i = 0; i < k; ++i) {
        d[i] = v % p;
        v /= p;
    }
    return d;
}

inline int undigits(const std::vector<int>& d, int p) {
    int v = 0;
    for (int i = int(d.size()) - 1; i >= 0; --i) v = v * p + d[i];
    return v;
}

// remainder of num / den over F_p, polynomials as ascending coefficient vectors
inline std::vector<int> poly_rem(std::vector<int> num, const std::vector<int>& den, int p) {
    int dd = int(den.size()) - 1;
    for (int i = int(num.size()) - 1; i >= dd; --i) {
        int c = num[i];
        if (c == 0) continue;
        // den is monic
        for (int j = 0; j <= dd; ++j) {
            int& t = num[i - dd + j];
            t = (t - c * den[j]) % p;
            if (t < 0) t += p;
        }
    }
    num.resize(dd);
    return num;
}

// exhaustive trial division by every monic divisor of degree 1..k/2
inline bool is_irreducible(const std::vector<int>& mod, int p) {
    int k = int(mod.size()) - 1;
    for (int d = 1; d <= k / 2; ++d) {
        int count = 1;
        for (int i = 0; i < d; ++i) count *= p;
        for (int v = 0; v < count; ++v) {
            std::vector<int> den = digits(v, p, d);
            den.push_back(1);
            std::vector<int> r = poly_rem(mod, den, p);
            bool zero = true;
            for (int c : r) zero = zero && c == 0;
            if (zero) return false;
        }
    }
    return true;
}

}  // namespace gfdetail

// Builds the field, validating p, q <= 27 and the modulus. When the modulus
// is omitted for k > 1, picks the first irreducible in the value order of the
// lower-coefficient vector (the usual "lexicographically smallest" choice:
// x^2+x+1 for F_4, x^3+x+1 for F_8, x^2+1 for F_9, ...).
inline Field make_field(int p, int k, const std::vector<int>* modulus = nullptr) {
    using namespace gfdetail;
    if (!is_prime(p)) fail(Errc::NotPrime, "p = " + std::to_string(p));
    if (k < 1) fail(Errc::DegreeMismatch, "k must be >= 1");
    i64 q = 1;
    for (int i = 0; i < k; ++i) {
        q *= p;
        if (q > kMaxOrder) fail(Errc::OrderTooLarge, "p^k exceeds " + std::to_string(kMaxOrder));
    }

    auto f = std::shared_ptr<FieldSpec>(new FieldSpec());
    f->p_ = p;
    f->k_ = k;
    f->q_ = int(q);

    if (k == 1) {
        f->modulus_ = {0, 1};  // unused
    } else if (modulus != nullptr) {
        if (int(modulus->size()) != k + 1 || modulus->back() != 1)
            fail(Errc::DegreeMismatch, "modulus must be monic of degree k");
        for (int c : *modulus)
            if (c < 0 || c >= p) fail(Errc::DegreeMismatch, "modulus coefficient out of [0,p)");
        if (!is_irreducible(*modulus, p)) fail(Errc::ReducibleModulus, "supplied modulus factors over F_p");
        f->modulus_ = *modulus;
    } else {
        for (int v = 0; v < f->q_; ++v) {
            std::vector<int> cand = digits(v, p, k);
            cand.push_back(1);
            if (is_irreducible(cand, p)) {
                f->modulus_ = cand;
                break;
            }
        }
    }

    int Q = f->q_;
    f->add_.resize(Q * Q);
    f->mul_.resize(Q * Q);
    f->neg_.resize(Q);
    f->inv_.assign(Q, 0);

    auto poly_of = [&](int v) { return digits(v, p, k); };
    for (int a = 0; a < Q; ++a) {
        auto da = poly_of(a);
        std::vector<int> dn(k);
        for (int i = 0; i < k; ++i) dn[i] = (p - da[i]) % p;
        f->neg_[a] = u8(undigits(dn, p));
        for (int b = 0; b < Q; ++b) {
            auto db = poly_of(b);
            std::vector<int> ds(k);
            for (int i = 0; i < k; ++i) ds[i] = (da[i] + db[i]) % p;
            f->add_[a * Q + b] = u8(undigits(ds, p));

            std::vector<int> prod(2 * k - 1, 0);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            if (k > 1) prod = poly_rem(std::move(prod), f->modulus_, p);
            prod.resize(k);
            f->mul_[a * Q + b] = u8(undigits(prod, p));
        }
    }
    for (int a = 1; a < Q; ++a)
        for (int b = 1; b < Q; ++b)
            if (f->mul_[a * Q + b] == 1) f->inv_[a] = u8(b);

    return f;
}

inline Field make_field(int p, int k, const std::vector<int>& modulus) {
    return make_field(p, k, &modulus);
}

}  // namespace m2sp
