#include "condense/rng.hpp"

#include "condense/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace condense {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
        0x636f6e64u};
    return std::mt19937_64(seq);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1
    const std::uint64_t k = engine_() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

RngStream RngStream::split(std::uint64_t child_id) const {
    return RngStream(mix_seed(seed_, stream_id_), mix_seed(stream_id_, child_id));
}

std::string RngStream::serialize() const {
    std::ostringstream os;
    char spare[64];
    std::snprintf(spare, sizeof spare, "%a", spare_);
    os << seed_ << ' ' << stream_id_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << spare << ' '
       << engine_;
    return os.str();
}

RngStream RngStream::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::uint64_t seed = 0, stream = 0;
    int has_spare = 0;
    std::string spare;
    is >> seed >> stream >> has_spare >> spare;
    if (!is) throw ParseError("malformed rng state");
    RngStream rng(seed, stream);
    rng.has_spare_ = has_spare != 0;
    rng.spare_ = std::strtod(spare.c_str(), nullptr);
    is >> rng.engine_;
    if (!is) throw ParseError("malformed rng engine state");
    return rng;
}

bool RngStream::operator==(const RngStream& other) const {
    return seed_ == other.seed_ && stream_id_ == other.stream_id_ &&
           engine_ == other.engine_ && has_spare_ == other.has_spare_ &&
           (!has_spare_ || spare_ == other.spare_);
}

} // namespace condense
