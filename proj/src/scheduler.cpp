#include "dsdivn/scheduler.hpp"

#include <stdexcept>
#include <string>

namespace dsdivn
{
    std::uint64_t Scheduler::schedule(SimTime at, std::function<void()> action)
    {
        if (at < m_now)
        {
            throw std::logic_error("schedule in the past: t=" + std::to_string(at.seconds()) +
                                   " < clock=" + std::to_string(m_now.seconds()));
        }
        const auto seq = m_next_seq++;
        m_queue.push(Event{at, seq, std::move(action)});
        return seq;
    }

    RunStats Scheduler::run_until(SimTime t_end)
    {
        std::uint64_t processed = 0;
        while (!m_queue.empty() && m_queue.top().fire_at <= t_end)
        {
            // priority_queue::top is const; the action is moved out before pop
            Event ev = std::move(const_cast<Event &>(m_queue.top()));
            m_queue.pop();
            m_now = ev.fire_at;
            if (m_hook)
            {
                m_hook(ev.fire_at, ev.seq);
            }
            ++processed;
            ++m_processed;
            if (ev.action)
            {
                ev.action();
            }
        }
        if (t_end > m_now)
        {
            m_now = t_end;
        }
        return RunStats{m_now, processed, m_queue.size()};
    }
} // namespace dsdivn
