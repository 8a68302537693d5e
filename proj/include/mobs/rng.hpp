#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace mobs {

// splitmix64 finalizer.  Used to turn user-facing seeds (often small
// integers) into well-mixed engine seeds, and to derive independent
// substreams from a master seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Wrapper around std::mt19937_64 with the distributions the samplers need.
// Distribution objects are constructed fresh on every call so the stream of
// engine draws is a pure function of the call sequence; no state is cached
// between calls.  This is what makes chain output reproducible byte-for-byte
// for a fixed seed and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    // Stream `stream` derived from `master`.  Streams with distinct indices
    // are decorrelated by the splitmix64 mixing; stream derivation is pure,
    // so workers can construct their own substreams independently.
    static Rng substream(std::uint64_t master, std::uint64_t stream);

    double uniform();                           // U[0, 1)
    double uniform(double lo, double hi);       // U[lo, hi)
    double normal(double mean, double sd);
    double gamma(double shape, double scale);   // mean = shape * scale

    // sigma2 ~ InverseGamma(shape, rate) drawn as 1 / Gamma(shape, 1/rate),
    // floored at 1e-300 so downstream divisions stay finite.
    double inverse_gamma(double shape, double rate);

    // Fills `out` (same size as `conc`) with a Dirichlet(conc) draw:
    // normalized Gamma(conc_h, 1) variables.  Degenerate all-zero draws are
    // replaced by the uniform simplex point.
    void dirichlet(const Eigen::Ref<const Eigen::VectorXd>& conc,
                   Eigen::Ref<Eigen::VectorXd> out);

    // Index in [0, probs.size()) drawn proportionally to probs (need not be
    // normalized; must be non-negative with a positive sum).
    Eigen::Index categorical(const Eigen::Ref<const Eigen::VectorXd>& probs);

    // Uniform index in [0, size).
    Eigen::Index uniform_index(Eigen::Index size);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace mobs
