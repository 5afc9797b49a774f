#include "dsdivn/random.hpp"

#include <stdexcept>

namespace dsdivn
{
    namespace
    {
        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9E3779B97F4A7C15ULL;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
            return x ^ (x >> 31);
        }

        std::uint64_t fnv1a(std::string_view s)
        {
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (unsigned char c : s)
            {
                h ^= c;
                h *= 0x100000001B3ULL;
            }
            return h;
        }
    } // namespace

    std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label)
    {
        return splitmix64(splitmix64(seed) ^ fnv1a(label));
    }

    RandomStream::RandomStream(std::uint64_t seed, std::string_view label)
        : m_engine(derive_stream_seed(seed, label))
    {
    }

    double RandomStream::uniform01()
    {
        return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
    }

    double RandomStream::uniform(double lo, double hi)
    {
        if (hi < lo)
        {
            throw std::invalid_argument("uniform: hi < lo");
        }
        // u in [0,1) maps into [lo, hi); hi is reachable only when lo == hi
        return lo + (hi - lo) * uniform01();
    }

    std::size_t RandomStream::index(std::size_t n)
    {
        if (n == 0)
        {
            throw std::invalid_argument("index: empty range");
        }
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    }
} // namespace dsdivn
