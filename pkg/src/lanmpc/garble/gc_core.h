/* Half-gates garbling kernels on AES-NI.
 *
 * Blocks are 16 bytes, read as a little-endian 128-bit integer.  The hash is
 * H(X, i) = AES_0(K) ^ K with K = rotl1(X) ^ i and AES_0 the AES-128
 * permutation under the all-zero key.
 */
#ifndef LANMPC_GC_CORE_H
#define LANMPC_GC_CORE_H

#include <stdint.h>
#include <string.h>
#include <immintrin.h>

#define GC_KIND_XOR 0
#define GC_KIND_AND 1
#define GC_KIND_INV 2

#define GC_TARGET __attribute__((target("aes,sse4.1")))

static __m128i gc_round_keys[11];
static int gc_keys_ready = 0;

static int gc_cpu_has_aesni(void)
{
    __builtin_cpu_init();
    return __builtin_cpu_supports("aes") && __builtin_cpu_supports("sse4.1");
}

GC_TARGET static inline __m128i gc_expand_step(__m128i key, __m128i assist)
{
    assist = _mm_shuffle_epi32(assist, 0xff);
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    return _mm_xor_si128(key, assist);
}

GC_TARGET static void gc_init_keys(void)
{
    __m128i k = _mm_setzero_si128();
    gc_round_keys[0] = k;
#define GC_STEP(i, rcon) \
    k = gc_expand_step(k, _mm_aeskeygenassist_si128(k, rcon)); \
    gc_round_keys[i] = k;
    GC_STEP(1, 0x01) GC_STEP(2, 0x02) GC_STEP(3, 0x04) GC_STEP(4, 0x08)
    GC_STEP(5, 0x10) GC_STEP(6, 0x20) GC_STEP(7, 0x40) GC_STEP(8, 0x80)
    GC_STEP(9, 0x1b) GC_STEP(10, 0x36)
#undef GC_STEP
    gc_keys_ready = 1;
}

GC_TARGET static inline __m128i gc_tweak_key(__m128i x, uint64_t tweak)
{
    __m128i shifted = _mm_slli_epi64(x, 1);
    __m128i carry = _mm_shuffle_epi32(_mm_srli_epi64(x, 63), 0x4e);
    __m128i k = _mm_or_si128(shifted, carry);
    return _mm_xor_si128(k, _mm_set_epi64x(0, (long long)tweak));
}

/* n independent hashes, interleaved so the AES pipeline stays full. */
GC_TARGET static inline void gc_hash_n(__m128i *blk, const uint64_t *tweak, int n)
{
    __m128i k[4], s[4];
    int j, r;
    for (j = 0; j < n; j++) {
        k[j] = gc_tweak_key(blk[j], tweak[j]);
        s[j] = _mm_xor_si128(k[j], gc_round_keys[0]);
    }
    for (r = 1; r < 10; r++)
        for (j = 0; j < n; j++)
            s[j] = _mm_aesenc_si128(s[j], gc_round_keys[r]);
    for (j = 0; j < n; j++)
        blk[j] = _mm_xor_si128(_mm_aesenclast_si128(s[j], gc_round_keys[10]), k[j]);
}

static inline int gc_lsb(__m128i x)
{
    return _mm_cvtsi128_si32(x) & 1;
}

static inline __m128i gc_select(int bit, __m128i x)
{
    return bit ? x : _mm_setzero_si128();
}

GC_TARGET static void gc_hash_batch(const uint8_t *in, const uint64_t *tweaks,
                                    uint8_t *out, int64_t n)
{
    int64_t i;
    int j, m;
    __m128i blk[4];
    if (!gc_keys_ready)
        gc_init_keys();
    for (i = 0; i < n; i += 4) {
        m = (n - i) < 4 ? (int)(n - i) : 4;
        for (j = 0; j < m; j++)
            blk[j] = _mm_loadu_si128((const __m128i *)(in + 16 * (i + j)));
        gc_hash_n(blk, tweaks + i, m);
        for (j = 0; j < m; j++)
            _mm_storeu_si128((__m128i *)(out + 16 * (i + j)), blk[j]);
    }
}

GC_TARGET static inline __m128i gc_garble_and(__m128i a0, __m128i b0, __m128i delta,
                                              uint64_t gate_index, uint8_t *table)
{
    __m128i h[4], tg, te, wg, we;
    uint64_t tw[4];
    int pa = gc_lsb(a0), pb = gc_lsb(b0);
    h[0] = a0;
    h[1] = _mm_xor_si128(a0, delta);
    h[2] = b0;
    h[3] = _mm_xor_si128(b0, delta);
    tw[0] = tw[1] = 2 * gate_index;
    tw[2] = tw[3] = 2 * gate_index + 1;
    gc_hash_n(h, tw, 4);
    tg = _mm_xor_si128(_mm_xor_si128(h[0], h[1]), gc_select(pb, delta));
    wg = _mm_xor_si128(h[0], gc_select(pa, tg));
    te = _mm_xor_si128(_mm_xor_si128(h[2], h[3]), a0);
    we = _mm_xor_si128(h[2], gc_select(pb, _mm_xor_si128(te, a0)));
    _mm_storeu_si128((__m128i *)table, tg);
    _mm_storeu_si128((__m128i *)(table + 16), te);
    return _mm_xor_si128(wg, we);
}

GC_TARGET static inline __m128i gc_eval_and(__m128i a, __m128i b, const uint8_t *table,
                                            uint64_t gate_index)
{
    __m128i h[2], tg, te;
    uint64_t tw[2];
    int sa = gc_lsb(a), sb = gc_lsb(b);
    tg = _mm_loadu_si128((const __m128i *)table);
    te = _mm_loadu_si128((const __m128i *)(table + 16));
    h[0] = a;
    h[1] = b;
    tw[0] = 2 * gate_index;
    tw[1] = 2 * gate_index + 1;
    gc_hash_n(h, tw, 2);
    return _mm_xor_si128(_mm_xor_si128(h[0], gc_select(sa, tg)),
                         _mm_xor_si128(h[1], gc_select(sb, _mm_xor_si128(te, a))));
}

GC_TARGET static void gc_garble_and_batch(const uint8_t *a0, const uint8_t *b0,
                                          const uint8_t *delta, uint64_t first_index,
                                          int64_t n, uint8_t *tables, uint8_t *c0)
{
    int64_t i;
    __m128i d = _mm_loadu_si128((const __m128i *)delta);
    if (!gc_keys_ready)
        gc_init_keys();
    for (i = 0; i < n; i++) {
        __m128i a = _mm_loadu_si128((const __m128i *)(a0 + 16 * i));
        __m128i b = _mm_loadu_si128((const __m128i *)(b0 + 16 * i));
        __m128i c = gc_garble_and(a, b, d, first_index + i, tables + 32 * i);
        _mm_storeu_si128((__m128i *)(c0 + 16 * i), c);
    }
}

GC_TARGET static void gc_eval_and_batch(const uint8_t *a, const uint8_t *b,
                                        const uint8_t *tables, uint64_t first_index,
                                        int64_t n, uint8_t *c)
{
    int64_t i;
    if (!gc_keys_ready)
        gc_init_keys();
    for (i = 0; i < n; i++) {
        __m128i x = _mm_loadu_si128((const __m128i *)(a + 16 * i));
        __m128i y = _mm_loadu_si128((const __m128i *)(b + 16 * i));
        _mm_storeu_si128((__m128i *)(c + 16 * i),
                         gc_eval_and(x, y, tables + 32 * i, first_index + i));
    }
}

/* Gates run strictly in list order, so slots may be reused between gates.
 * Returns the number of AND tables written. */
GC_TARGET static int64_t gc_garble_gates(int64_t n, const uint8_t *kind,
                                         const int64_t *in0, const int64_t *in1,
                                         const int64_t *out, uint8_t *labels,
                                         const uint8_t *delta, uint64_t first_index,
                                         uint8_t *tables)
{
    int64_t i, ands = 0;
    __m128i d = _mm_loadu_si128((const __m128i *)delta);
    __m128i *lab = (__m128i *)labels;
    if (!gc_keys_ready)
        gc_init_keys();
    for (i = 0; i < n; i++) {
        __m128i a = _mm_loadu_si128(lab + in0[i]);
        __m128i r;
        switch (kind[i]) {
        case GC_KIND_XOR:
            r = _mm_xor_si128(a, _mm_loadu_si128(lab + in1[i]));
            break;
        case GC_KIND_AND:
            r = gc_garble_and(a, _mm_loadu_si128(lab + in1[i]), d,
                              first_index + ands, tables + 32 * ands);
            ands++;
            break;
        default:
            r = _mm_xor_si128(a, d);
            break;
        }
        _mm_storeu_si128(lab + out[i], r);
    }
    return ands;
}

GC_TARGET static int64_t gc_eval_gates(int64_t n, const uint8_t *kind,
                                       const int64_t *in0, const int64_t *in1,
                                       const int64_t *out, uint8_t *labels,
                                       uint64_t first_index, const uint8_t *tables)
{
    int64_t i, ands = 0;
    __m128i *lab = (__m128i *)labels;
    if (!gc_keys_ready)
        gc_init_keys();
    for (i = 0; i < n; i++) {
        __m128i a = _mm_loadu_si128(lab + in0[i]);
        __m128i r;
        switch (kind[i]) {
        case GC_KIND_XOR:
            r = _mm_xor_si128(a, _mm_loadu_si128(lab + in1[i]));
            break;
        case GC_KIND_AND:
            r = gc_eval_and(a, _mm_loadu_si128(lab + in1[i]), tables + 32 * ands,
                            first_index + ands);
            ands++;
            break;
        default:
            r = a;
            break;
        }
        _mm_storeu_si128(lab + out[i], r);
    }
    return ands;
}

static void gc_plain_gates(int64_t n, const uint8_t *kind, const int64_t *in0,
                           const int64_t *in1, const int64_t *out, uint8_t *bits)
{
    int64_t i;
    for (i = 0; i < n; i++) {
        uint8_t a = bits[in0[i]];
        switch (kind[i]) {
        case GC_KIND_XOR:
            bits[out[i]] = a ^ bits[in1[i]];
            break;
        case GC_KIND_AND:
            bits[out[i]] = a & bits[in1[i]];
            break;
        default:
            bits[out[i]] = a ^ 1;
            break;
        }
    }
}

/* Longest AND chain ending at each written slot; depth holds the incoming
 * per-slot depths and is updated in place.  Returns the max depth seen. */
static int64_t gc_and_depth(int64_t n, const uint8_t *kind, const int64_t *in0,
                            const int64_t *in1, const int64_t *out, int64_t *depth)
{
    int64_t i, best = 0;
    for (i = 0; i < n; i++) {
        int64_t d = depth[in0[i]];
        if (kind[i] != GC_KIND_INV && depth[in1[i]] > d)
            d = depth[in1[i]];
        if (kind[i] == GC_KIND_AND)
            d++;
        depth[out[i]] = d;
        if (d > best)
            best = d;
    }
    return best;
}

#endif
