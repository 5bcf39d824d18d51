#ifndef NNPNN_RNG_HPP
#define NNPNN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace nnpnn {

// Deterministic splittable generator (splitmix64 core). The full generator
// state is a single u64, which makes checkpointing and substream derivation
// trivial. Normal deviates use the Box-Muller cosine branch, two u64 draws
// per sample, no cached spare; this is the fixed, documented algorithm that
// the bitwise-reproducibility guarantees rely on.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + next_unit() * (hi - lo);
    }

    // Inclusive range; multiply-shift mapping of one u64 draw.
    int uniform_int(int lo, int hi) {
        auto span = static_cast<uint64_t>(hi - lo + 1);
        auto scaled = static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * span) >> 64);
        return lo + static_cast<int>(scaled);
    }

    double normal(double mean, double stddev) {
        double u1 = 1.0 - next_unit();  // (0, 1]
        double u2 = next_unit();
        double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
        return mean + stddev * z;
    }

    // Derives an independent generator; advances this stream by one draw.
    Rng split() { return Rng(next_u64()); }

    uint64_t state() const { return state_; }
    void set_state(uint64_t s) { state_ = s; }

  private:
    uint64_t state_;
};

// Independent stream keyed by (seed, stream). Used for evaluation so that
// periodic evaluations never perturb the training stream.
inline Rng substream(uint64_t seed, uint64_t stream) {
    Rng mix(seed ^ (stream * 0x9E3779B97F4A7C15ull) ^ 0xD1B54A32D192ED03ull);
    return Rng(mix.next_u64());
}

}  // namespace nnpnn

#endif
