#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lanercnn {

// Input data is wrong (bad file, bad schema, bad flag value). CLI exit code 2.
class InvalidInputError : public std::runtime_error {
public:
    explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

class SchemaError : public InvalidInputError {
public:
    explicit SchemaError(const std::string& msg) : InvalidInputError(msg) {}
};

class ChecksumError : public InvalidInputError {
public:
    explicit ChecksumError(const std::string& msg) : InvalidInputError(msg) {}
};

class ConfigMismatchError : public InvalidInputError {
public:
    explicit ConfigMismatchError(const std::string& msg) : InvalidInputError(msg) {}
};

// Internal failure (non-finite loss, broken invariant). CLI exit code 1.
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG used everywhere randomness is needed. splitmix64 keeps
// streams identical across compilers and standard libraries, which the
// reproducibility contract (identical checkpoints per seed) depends on.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) {
        // 128-bit multiply trick; bias is < 2^-64, irrelevant and deterministic
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Derive an independent stream, e.g. per (seed, scene, epoch).
    Rng fork(uint64_t salt) const {
        uint64_t s = state_;
        uint64_t a = splitmix64(s);
        s = a ^ (salt * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
        return Rng(splitmix64(s));
    }

private:
    uint64_t state_;
};

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t hash_string(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

}  // namespace lanercnn
