#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace condense {

// Seedable random stream. The (seed, stream_id) pair fully determines the
// sequence; streams with different ids are seeded through std::seed_seq so
// they share no prefix. Not safe to share between threads.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Uniform on the open interval (0, 1), 53 bits of resolution.
    double uniform();
    double normal();
    std::uint64_t next_u64() { return engine_(); }

    // Derive an independent child stream (for replicates and sub-tasks).
    RngStream split(std::uint64_t child_id) const;

    // Exact text round trip of the generator position, for checkpoints.
    std::string serialize() const;
    static RngStream deserialize(const std::string& text);

    bool operator==(const RngStream& other) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Mix two 64-bit values into a seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace condense
