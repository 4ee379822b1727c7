#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

/// Base class for all forge errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoFailure : public Error {
  public:
    explicit IoFailure(const std::string& what) : Error(what) {}
};

class ConfigInvalid : public Error {
  public:
    explicit ConfigInvalid(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Deterministic hashing. std::hash is platform-dependent, so everything that
// must be reproducible across runs and machines (signatures, stubs, shard
// checksums, LSH buckets) goes through these.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

/// Finalizer from the splitmix64 generator; good avalanche, cheap.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Maps a 64-bit hash to the unit interval [0,1).
inline double hash_to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::string to_hex(std::uint64_t value);

}  // namespace forge
