#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dsdivn
{
    /// Deterministic random stream keyed by (seed, label).
    ///
    /// Draws are built from raw 64-bit mt19937_64 output with our own mapping to
    /// floating point, so sequences match across standard libraries.
    class RandomStream
    {
    public:
        RandomStream(std::uint64_t seed, std::string_view label);

        std::uint64_t next_u64() { return m_engine(); }

        /// Uniform in [0, 1) with 53 bits of precision.
        double uniform01();

        /// Uniform in [lo, hi].
        double uniform(double lo, double hi);

        /// Uniform index in [0, n). n must be positive.
        std::size_t index(std::size_t n);

        bool bernoulli(double p) { return uniform01() < p; }

    private:
        std::mt19937_64 m_engine;
    };

    /// Label-mixed seed; exposed for tests of stream independence.
    std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label);

    /// Convenience mirroring the sim-core contract.
    inline RandomStream seeded_stream(std::uint64_t seed, std::string_view label)
    {
        return RandomStream(seed, label);
    }
} // namespace dsdivn
