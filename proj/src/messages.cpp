#include "dsdivn/messages.hpp"

namespace dsdivn
{
    std::uint32_t KnowledgeBase::encoded_size_B() const
    {
        std::size_t records = view.size() + candidates.size();
        for (const auto &n : neighbors)
        {
            records += n.members.size();
        }
        return sizes::kKbHeader + sizes::kKbPerMember * static_cast<std::uint32_t>(records);
    }

    namespace
    {
        template <class... Ts>
        struct overloaded : Ts...
        {
            using Ts::operator()...;
        };
        template <class... Ts>
        overloaded(Ts...) -> overloaded<Ts...>;
    } // namespace

    std::string_view message_type(const ControlMessage &m)
    {
        return std::visit(overloaded{
                              [](const FlowRequest &) { return std::string_view("FlowRequest"); },
                              [](const FlowInstall &) { return std::string_view("FlowInstall"); },
                              [](const FlowReject &) { return std::string_view("FlowReject"); },
                              [](const Heartbeat &) { return std::string_view("Heartbeat"); },
                              [](const CandidateAdvert &) { return std::string_view("CandidateAdvert"); },
                              [](const KbSync &) { return std::string_view("KbSync"); },
                              [](const ViewExchange &) { return std::string_view("ViewExchange"); },
                              [](const MonitorReport &) { return std::string_view("MonitorReport"); },
                              [](const Handover &) { return std::string_view("Handover"); },
                              [](const ElectionCall &) { return std::string_view("ElectionCall"); },
                              [](const ElectionBid &) { return std::string_view("ElectionBid"); },
                          },
                          m);
    }

    std::uint32_t message_size_B(const ControlMessage &m)
    {
        return std::visit(overloaded{
                              [](const FlowRequest &r) { return r.size_B; },
                              [](const FlowInstall &) { return sizes::kFlowInstall; },
                              [](const FlowReject &) { return sizes::kFlowReject; },
                              [](const Heartbeat &) { return sizes::kHeartbeat; },
                              [](const CandidateAdvert &) { return sizes::kCandidateAdvert; },
                              [](const KbSync &s) { return s.kb.encoded_size_B(); },
                              [](const ViewExchange &v) {
                                  return sizes::kViewHeader +
                                         sizes::kViewPerMember * static_cast<std::uint32_t>(v.view.members.size());
                              },
                              [](const MonitorReport &) { return sizes::kMonitorReport; },
                              [](const Handover &h) { return h.kb.encoded_size_B(); },
                              [](const ElectionCall &) { return sizes::kElection; },
                              [](const ElectionBid &) { return sizes::kElection; },
                          },
                          m);
    }
} // namespace dsdivn
