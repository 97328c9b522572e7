#pragma once

#include <vector>

#include "m2sp/common.hpp"

namespace m2sp {
namespace xform {

// ---------------- modular helpers ----------------

inline u64 mulmod(u64 a, u64 b, u64 m) { return u64(u128(a) * b % m); }

inline u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

// deterministic Miller-Rabin, valid for all 64-bit inputs
inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// largest prime P < 2^62 with P ≡ 1 (mod p), skipping `skip` hits
inline u64 find_ntt_prime(int p, int skip = 0) {
    u64 m = ((u64(1) << 62) - 2) / p;
    for (; m > 0; --m) {
        u64 cand = u64(p) * m + 1;
        if (is_prime_u64(cand)) {
            if (skip == 0) return cand;
            --skip;
        }
    }
    fail(Errc::BadParameters, "no NTT prime found");
}

// a primitive p-th root of unity mod P (requires p | P-1)
inline u64 find_root(int p, u64 P) {
    for (u64 a = 2;; ++a) {
        u64 r = powmod(a, (P - 1) / u64(p), P);
        if (r != 1) return r;  // order divides prime p and is not 1, hence exactly p
    }
}

// ---------------- transforms over (F_p)^m ----------------

// In-place Walsh-Hadamard transform, group (F_2)^m, n = 2^m entries.
template <typename Int>
inline void wht(std::vector<Int>& a, int m) {
    size_t n = size_t(1) << m;
    for (int ax = 0; ax < m; ++ax) {
        size_t s = size_t(1) << ax;
        for (size_t base = 0; base < n; base += 2 * s) {
            for (size_t off = 0; off < s; ++off) {
                Int x = a[base + off];
                Int y = a[base + off + s];
                a[base + off] = x + y;
                a[base + off + s] = x - y;
            }
        }
    }
}

// In-place DFT along every axis of the group (F_p)^m, mod prime P,
// with the given primitive p-th root (pass its inverse for the inverse
// transform). Index digit i (base p, least significant first) is axis i.
inline void ntt(std::vector<u64>& a, int p, int m, u64 P, u64 root) {
    // root power table r^{j*t}
    std::vector<u64> pw(size_t(p) * p);
    std::vector<u64> rp(p);
    rp[0] = 1;
    for (int i = 1; i < p; ++i) rp[i] = mulmod(rp[i - 1], root, P);
    for (int j = 0; j < p; ++j)
        for (int t = 0; t < p; ++t) pw[size_t(j) * p + t] = rp[(j * t) % p];

    size_t n = a.size();
    std::vector<u64> buf(p);
    size_t s = 1;
    for (int ax = 0; ax < m; ++ax, s *= p) {
        for (size_t base = 0; base < n; base += s * p) {
            for (size_t off = 0; off < s; ++off) {
                for (int t = 0; t < p; ++t) buf[t] = a[base + off + size_t(t) * s];
                for (int j = 0; j < p; ++j) {
                    u128 acc = 0;
                    const u64* row = &pw[size_t(j) * p];
                    for (int t = 0; t < p; ++t) acc += u128(row[t]) * buf[t];
                    a[base + off + size_t(j) * s] = u64(acc % P);
                }
            }
        }
    }
}

// ---------------- exact additive convolution ----------------

// c[z] = sum_{x+y=z} a[x] b[y] over (F_p)^m; inputs are nonnegative counts.
// Exactness cap: every output must be < 2^64 (callers' counts are bounded by
// q^12 <= 27^12). Via WHT with 128-bit intermediates for p = 2, else via NTT
// modulo two 62-bit primes and CRT recombination.
inline std::vector<u64> convolve_exact(const std::vector<u64>& a, const std::vector<u64>& b,
                                       int p, int m) {
    size_t n = a.size();
    std::vector<u64> out(n);
    if (p == 2) {
        std::vector<i128> fa(n), fb(n);
        for (size_t i = 0; i < n; ++i) fa[i] = i128(a[i]);
        for (size_t i = 0; i < n; ++i) fb[i] = i128(b[i]);
        wht(fa, m);
        wht(fb, m);
        for (size_t i = 0; i < n; ++i) fa[i] *= fb[i];
        wht(fa, m);  // WHT is self-inverse up to 1/n
        for (size_t i = 0; i < n; ++i) {
            i128 v = fa[i] / i128(n);
            if (v < 0 || u128(v) > u128(~u64(0)))
                fail(Errc::BadParameters, "convolution value exceeds 64 bits");
            out[i] = u64(u128(v));
        }
        return out;
    }

    u64 P1 = find_ntt_prime(p, 0);
    u64 P2 = find_ntt_prime(p, 1);
    std::vector<u64> r1(n), r2(n);
    for (int which = 0; which < 2; ++which) {
        u64 P = which == 0 ? P1 : P2;
        u64 root = find_root(p, P);
        u64 iroot = powmod(root, P - 2, P);
        std::vector<u64> fa(n), fb(n);
        for (size_t i = 0; i < n; ++i) fa[i] = a[i] % P;
        for (size_t i = 0; i < n; ++i) fb[i] = b[i] % P;
        ntt(fa, p, m, P, root);
        ntt(fb, p, m, P, root);
        for (size_t i = 0; i < n; ++i) fa[i] = mulmod(fa[i], fb[i], P);
        ntt(fa, p, m, P, iroot);
        u64 ninv = powmod(n % P, P - 2, P);
        for (size_t i = 0; i < n; ++i) fa[i] = mulmod(fa[i], ninv, P);
        (which == 0 ? r1 : r2) = std::move(fa);
    }
    u64 p1inv = powmod(P1 % P2, P2 - 2, P2);
    for (size_t i = 0; i < n; ++i) {
        u64 d = r2[i] >= r1[i] % P2 ? r2[i] - r1[i] % P2 : r2[i] + P2 - r1[i] % P2;
        u128 v = u128(r1[i]) + u128(P1) * mulmod(d, p1inv, P2);
        if (v > u128(~u64(0))) fail(Errc::BadParameters, "convolution value exceeds 64 bits");
        out[i] = u64(v);
    }
    return out;
}

// ---------------- exact Cayley spectrum ----------------

// Eigenvalues of the |G| x |G| matrix M[x][y] = w(y - x) over G = (F_p)^m:
// the character sums of w. Returned in character order (same indexing as G).
// Values are exact signed integers; |lambda| <= sum|w| must fit well under
// 2^61 (the digraph Gram weights sum to q^16 <= 2^32 for q <= 4).
inline std::vector<i64> cayley_eigenvalues(const std::vector<i64>& w, int p, int m) {
    size_t n = w.size();
    if (p == 2) {
        std::vector<i64> a = w;
        wht(a, m);
        return a;
    }
    u64 P = find_ntt_prime(p, 0);
    u64 root = find_root(p, P);
    std::vector<u64> a(n);
    for (size_t i = 0; i < n; ++i) {
        i64 v = w[i];
        a[i] = v >= 0 ? u64(v) % P : P - (u64(-v) % P);
    }
    ntt(a, p, m, P, root);
    std::vector<i64> out(n);
    for (size_t i = 0; i < n; ++i) {
        u64 v = a[i];
        out[i] = v <= P / 2 ? i64(v) : -i64(P - v);  // symmetric lift
    }
    return out;
}

}  // namespace xform
}  // namespace m2sp
