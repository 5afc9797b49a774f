#pragma once

#include "dsdivn/sim_time.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace dsdivn
{
    struct Event
    {
        SimTime fire_at;
        std::uint64_t seq = 0;
        std::function<void()> action;
    };

    struct RunStats
    {
        SimTime clock;
        std::uint64_t processed = 0;
        std::size_t remaining = 0;
    };

    /// Single-threaded discrete-event queue ordered by (fire_at, seq).
    class Scheduler
    {
    public:
        SimTime now() const { return m_now; }

        /// Enqueue an action. Throws std::logic_error if `at` is in the past.
        std::uint64_t schedule(SimTime at, std::function<void()> action);

        std::uint64_t schedule_in(double seconds_ahead, std::function<void()> action)
        {
            return schedule(m_now.after(seconds_ahead), std::move(action));
        }

        /// Process every event with fire_at <= t_end, then set the clock to t_end.
        RunStats run_until(SimTime t_end);

        std::size_t pending() const { return m_queue.size(); }
        std::uint64_t scheduled_total() const { return m_next_seq; }
        std::uint64_t processed_total() const { return m_processed; }

        /// Observer called with each event's (fire_at, seq) just before it runs.
        void set_dequeue_hook(std::function<void(SimTime, std::uint64_t)> hook) { m_hook = std::move(hook); }

    private:
        struct Later
        {
            bool operator()(const Event &a, const Event &b) const
            {
                if (a.fire_at != b.fire_at)
                {
                    return a.fire_at > b.fire_at;
                }
                return a.seq > b.seq;
            }
        };

        SimTime m_now;
        std::uint64_t m_next_seq = 0;
        std::uint64_t m_processed = 0;
        std::priority_queue<Event, std::vector<Event>, Later> m_queue;
        std::function<void(SimTime, std::uint64_t)> m_hook;
    };
} // namespace dsdivn
