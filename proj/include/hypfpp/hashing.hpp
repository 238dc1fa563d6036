#pragma once

#include <cstdint>
#include <cstddef>
#include <cstring>
#include <string>

namespace hypfpp {

// 64-bit finalizer (MurmurHash3 fmix64): bijective avalanche mixer.
inline uint64_t fmix64(uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

// MurmurHash64A over a byte buffer. Used to digest canonical edge bytes into
// a seed-independent base value; the environment then mixes its seed in.
inline uint64_t murmur64(const void* data, size_t len, uint64_t key) {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    const int r = 47;
    uint64_t h = key ^ (len * m);
    const unsigned char* p = static_cast<const unsigned char*>(data);
    const unsigned char* end = p + (len & ~size_t(7));
    while (p != end) {
        uint64_t k;
        std::memcpy(&k, p, 8);
        p += 8;
        k *= m;
        k ^= k >> r;
        k *= m;
        h ^= k;
        h *= m;
    }
    uint64_t tail = 0;
    switch (len & 7) {
        case 7: tail ^= uint64_t(p[6]) << 48; [[fallthrough]];
        case 6: tail ^= uint64_t(p[5]) << 40; [[fallthrough]];
        case 5: tail ^= uint64_t(p[4]) << 32; [[fallthrough]];
        case 4: tail ^= uint64_t(p[3]) << 24; [[fallthrough]];
        case 3: tail ^= uint64_t(p[2]) << 16; [[fallthrough]];
        case 2: tail ^= uint64_t(p[1]) << 8;  [[fallthrough]];
        case 1: tail ^= uint64_t(p[0]);
                h ^= tail;
                h *= m;
                break;
        default: break;
    }
    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

// SplitMix64 stream: the utility RNG for sampling tasks that are keyed by a
// single seed (ray sampling, bootstrap, fuzzers). Not used for edge weights.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        return fmix64(state);
    }
    // Uniform draw in the open interval (0,1): never 0, never 1, so inverse
    // CDFs stay finite and weights stay strictly positive.
    double next_u01() {
        return (double((next() >> 11)) + 0.5) * 0x1p-53;
    }
};

// Derives an independent stream key, e.g. per replication index.
inline uint64_t mix_seed(uint64_t master, uint64_t index) {
    return fmix64(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

inline double u01_from_bits(uint64_t h) {
    return (double((h >> 11)) + 0.5) * 0x1p-53;
}

// FNV-1a for short config strings (config hash in manifests).
inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace hypfpp
