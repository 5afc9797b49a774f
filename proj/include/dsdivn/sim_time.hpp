#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace dsdivn
{
    /// Simulation timestamp stored as integer microsecond ticks.
    ///
    /// Seconds are only used at the API surface; all ordering happens on ticks so
    /// that event order never depends on floating-point rounding.
    class SimTime
    {
    public:
        static constexpr std::int64_t kTicksPerSecond = 1'000'000;

        constexpr SimTime() = default;

        static constexpr SimTime from_ticks(std::int64_t ticks)
        {
            return SimTime(ticks);
        }

        static SimTime from_seconds(double s)
        {
            if (!(s >= 0.0) || !std::isfinite(s))
            {
                throw std::invalid_argument("SimTime must be finite and non-negative");
            }
            return SimTime(static_cast<std::int64_t>(std::llround(s * kTicksPerSecond)));
        }

        static constexpr SimTime max()
        {
            return SimTime(std::numeric_limits<std::int64_t>::max());
        }

        constexpr std::int64_t ticks() const { return m_ticks; }
        constexpr double seconds() const { return static_cast<double>(m_ticks) / kTicksPerSecond; }

        constexpr auto operator<=>(const SimTime &) const = default;

        /// Offset by a duration in seconds (rounded to the nearest tick).
        SimTime after(double seconds_ahead) const
        {
            return SimTime(m_ticks + static_cast<std::int64_t>(std::llround(seconds_ahead * kTicksPerSecond)));
        }

        constexpr double seconds_since(SimTime earlier) const
        {
            return static_cast<double>(m_ticks - earlier.m_ticks) / kTicksPerSecond;
        }

    private:
        constexpr explicit SimTime(std::int64_t ticks) : m_ticks(ticks) {}

        std::int64_t m_ticks = 0;
    };
} // namespace dsdivn
