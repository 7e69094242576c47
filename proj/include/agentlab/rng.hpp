#pragma once
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>

namespace agentlab {

// splitmix64, used for seed derivation and stream splitting.
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Combine a base seed with a list of stream tags into a new seed.
// Used everywhere a derived, isolated RNG stream is needed (per episode,
// per seed index, per noise site) so streams never alias.
inline uint64_t hash_tags(uint64_t base, std::initializer_list<uint64_t> tags) {
    uint64_t s = base ^ 0x51e03bd787bc1e6dULL;
    uint64_t h = splitmix64(s);
    for (uint64_t t : tags) {
        s ^= t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= splitmix64(s);
    }
    return h;
}

// xoshiro256** with explicitly written distributions, so that a fixed seed
// produces the same stream on every platform (std::normal_distribution is
// implementation-defined; we avoid it).
class Rng {
public:
    explicit Rng(uint64_t seed) { reseed(seed); }
    Rng() : Rng(0) {}

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        has_spare_ = false;
        spare_ = 0.0;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // Box-Muller with cached spare; deterministic across platforms.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mu, double sd) { return mu + sd * normal(); }

    Rng fork(std::initializer_list<uint64_t> tags) const {
        uint64_t base = s_[0] ^ rotl(s_[2], 13);
        Rng r(0);
        r.reseed(hash_tags(base, tags));
        return r;
    }

    std::string state_string() const;
    void set_state(const std::string& st);

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace agentlab
