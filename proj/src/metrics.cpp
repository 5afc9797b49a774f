#include "dsdivn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dsdivn
{
    PdrRecorder::PdrRecorder(double window_s, double duration_s) : m_window(window_s), m_duration(duration_s)
    {
        if (!(window_s > 0))
        {
            throw std::invalid_argument("PDR window must be positive");
        }
        const auto n = static_cast<std::size_t>(std::ceil(duration_s / window_s - 1e-9));
        m_sent.assign(n, 0);
        m_received.assign(n, 0);
    }

    std::size_t PdrRecorder::index(SimTime t) const
    {
        const auto i = static_cast<std::size_t>(std::floor(t.seconds() / m_window + 1e-12));
        return i;
    }

    void PdrRecorder::on_send(SimTime sent_at)
    {
        const auto i = index(sent_at);
        if (i < m_sent.size())
        {
            ++m_sent[i];
        }
    }

    void PdrRecorder::on_delivered(SimTime sent_at)
    {
        const auto i = index(sent_at);
        if (i < m_received.size())
        {
            ++m_received[i];
        }
    }

    std::vector<PdrWindow> PdrRecorder::series() const
    {
        std::vector<PdrWindow> out;
        out.reserve(m_sent.size());
        for (std::size_t i = 0; i < m_sent.size(); ++i)
        {
            PdrWindow w;
            w.t_start = static_cast<double>(i) * m_window;
            w.t_end = std::min(static_cast<double>(i + 1) * m_window, m_duration);
            w.sent = m_sent[i];
            w.received = m_received[i];
            if (w.sent > 0)
            {
                w.pdr = static_cast<double>(w.received) / static_cast<double>(w.sent);
            }
            out.push_back(w);
        }
        return out;
    }

    std::vector<PdrWindow> record_traffic(std::span<const PacketOutcome> packets, double window_s, double duration_s)
    {
        PdrRecorder rec(window_s, duration_s);
        for (const auto &p : packets)
        {
            const auto t = SimTime::from_seconds(p.sent_at_s);
            rec.on_send(t);
            if (p.delivered)
            {
                rec.on_delivered(t);
            }
        }
        return rec.series();
    }

    std::optional<double> mean_pdr(std::span<const PdrWindow> series, double t0, double t1)
    {
        double sum = 0.0;
        int n = 0;
        for (const auto &w : series)
        {
            if (w.t_start >= t0 && w.t_start < t1 && w.pdr)
            {
                sum += *w.pdr;
                ++n;
            }
        }
        if (n == 0)
        {
            return std::nullopt;
        }
        return sum / n;
    }
} // namespace dsdivn
