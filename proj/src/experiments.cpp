#include "dsdivn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace dsdivn
{
    std::string format_number(double v)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    ScenarioRun run_scenario(const ScenarioConfig &cfg, bool trace)
    {
        NetworkOptions opts;
        opts.trace = trace;
        Network net(cfg, opts);
        ScenarioRun out;
        out.report = net.run();
        if (trace)
        {
            out.trace = net.radio().trace();
        }
        return out;
    }

    std::vector<PdrWindow> mean_series(std::span<const RunReport> runs)
    {
        std::vector<PdrWindow> out;
        if (runs.empty())
        {
            return out;
        }
        out = runs.front().pdr;
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            double sum = 0.0;
            int n = 0;
            out[i].sent = 0;
            out[i].received = 0;
            for (const auto &r : runs)
            {
                const auto &w = r.pdr.at(i);
                out[i].sent += w.sent;
                out[i].received += w.received;
                if (w.pdr)
                {
                    sum += *w.pdr;
                    ++n;
                }
            }
            out[i].pdr = n > 0 ? std::optional<double>(sum / n) : std::nullopt;
        }
        return out;
    }

    FailureExperiment run_failure_experiment(const ScenarioConfig &cfg, int seeds, unsigned threads)
    {
        if (seeds <= 0)
        {
            throw ConfigError("seed count must be positive");
        }
        const std::vector<Mode> modes{Mode::dsdivn, Mode::self_organized, Mode::no_fallback};
        struct Job
        {
            ScenarioConfig cfg;
            RunReport report;
        };
        std::vector<Job> jobs;
        for (auto m : modes)
        {
            for (int s = 0; s < seeds; ++s)
            {
                Job j{cfg, {}};
                j.cfg.mode = m;
                j.cfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
                jobs.push_back(std::move(j));
            }
        }

        if (threads == 0)
        {
            threads = std::max(1u, std::thread::hardware_concurrency());
        }
        threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        auto worker = [&] {
            for (std::size_t i = next++; i < jobs.size(); i = next++)
            {
                try
                {
                    jobs[i].report = run_scenario(jobs[i].cfg).report;
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mu);
                    if (!failure)
                    {
                        failure = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
        {
            pool.emplace_back(worker);
        }
        for (auto &t : pool)
        {
            t.join();
        }
        if (failure)
        {
            std::rethrow_exception(failure);
        }

        FailureExperiment out;
        for (auto &j : jobs)
        {
            out.runs[j.cfg.mode].push_back(std::move(j.report));
        }
        for (const auto &[m, runs] : out.runs)
        {
            out.mean[m] = mean_series(runs);
        }
        return out;
    }

    namespace
    {
        class StaticNodes final : public NodeDirectory
        {
        public:
            explicit StaticNodes(std::vector<NodePosition> nodes) : m_nodes(std::move(nodes)) {}

            std::optional<Position> position_of(VehicleId id) const override
            {
                if (id >= m_nodes.size())
                {
                    return std::nullopt;
                }
                return m_nodes[id].pos;
            }
            std::vector<NodePosition> snapshot() const override { return m_nodes; }

        private:
            std::vector<NodePosition> m_nodes;
        };
    } // namespace

    double measure_install(double distance_m, std::uint32_t size_B, const LinkModelParams &link, double range_m,
                           std::uint64_t seed)
    {
        if (distance_m < 0 || range_m <= 0)
        {
            throw ConfigError("sweep distance must be >= 0 and range > 0");
        }
        // id 0 requester, 1..k relays, k+1 controller
        std::vector<NodePosition> nodes{{0, {0.0, 0.0}}};
        const double spacing = range_m / 2;
        for (double x = spacing; x < distance_m; x += spacing)
        {
            nodes.push_back({static_cast<VehicleId>(nodes.size()), {x, 0.0}});
        }
        const auto ctrl_id = static_cast<VehicleId>(nodes.size());
        nodes.push_back({ctrl_id, {distance_m, 0.0}});
        StaticNodes dir(nodes);

        ControllerState ctrl;
        ctrl.host = ctrl_id;
        ctrl.status = ControllerStatus::active;
        ctrl.domain = DomainKey{SegmentId{0}, +1};
        ctrl.term = 1;
        for (const auto &n : nodes)
        {
            ctrl.local_view[n.id] = MemberRecord{n.id, n.pos.x, 0.0, +1, SimTime{}};
        }
        RouteParams params;
        params.range_m = range_m;

        Scheduler sched;
        Radio radio(sched, dir, link, range_m, RandomStream(seed, "sweep"));
        std::optional<SimTime> installed;
        radio.on_receive([&](VehicleId at, const Frame &f) {
            const auto &msg = std::get<ControlMessage>(f.payload);
            if (const auto *req = std::get_if<FlowRequest>(&msg); req && at == ctrl_id)
            {
                const auto res = compute_route(ctrl, *req, sched.now(), distance_m, params);
                if (const auto *entry = std::get_if<FlowEntry>(&res))
                {
                    radio.transmit(Frame{ctrl_id, req->requester, sizes::kFlowInstall, Channel::control,
                                         Payload{ControlMessage{FlowInstall{*entry, ctrl.term}}}});
                }
            }
            else if (std::holds_alternative<FlowInstall>(msg) && at == 0)
            {
                installed = sched.now();
            }
        });

        FlowRequest req;
        req.requester = 0;
        req.dst = ctrl_id;
        req.size_B = size_B;
        req.requester_x_m = 0.0;
        req.domain = ctrl.domain;
        radio.transmit(Frame{0, ctrl_id, size_B, Channel::control, Payload{ControlMessage{req}}});
        sched.run_until(SimTime::from_seconds(60.0));
        if (!installed)
        {
            return std::numeric_limits<double>::infinity();
        }
        return installed->seconds();
    }

    std::vector<SweepCell> run_distance_sweep(std::span<const double> distances, std::span<const std::uint32_t> sizes,
                                              int reps, const LinkModelParams &link, double range_m)
    {
        if (reps <= 0)
        {
            throw ConfigError("reps must be positive");
        }
        std::vector<SweepCell> cells;
        for (double d : distances)
        {
            for (auto s : sizes)
            {
                double sum = 0.0;
                for (int r = 0; r < reps; ++r)
                {
                    sum += measure_install(d, s, link, range_m, static_cast<std::uint64_t>(r));
                }
                cells.push_back(SweepCell{d, s, reps, sum / reps});
            }
        }
        return cells;
    }

    namespace
    {
        std::ofstream open_out(const std::filesystem::path &path)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
            {
                throw IoError("cannot write " + path.string());
            }
            return out;
        }

        void finish(std::ofstream &out, const std::filesystem::path &path)
        {
            out.flush();
            if (!out)
            {
                throw IoError("write failed: " + path.string());
            }
        }

        std::string opt_number(const std::optional<double> &v)
        {
            return v ? format_number(*v) : std::string();
        }
    } // namespace

    void write_pdr_csv(const std::filesystem::path &path, const std::map<Mode, std::vector<RunReport>> &runs)
    {
        auto out = open_out(path);
        out << "mode,seed,t_start,t_end,sent,received,pdr\n";
        for (const auto &[mode, reports] : runs)
        {
            std::vector<const RunReport *> sorted;
            for (const auto &r : reports)
            {
                sorted.push_back(&r);
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const RunReport *a, const RunReport *b) { return a->config.seed < b->config.seed; });
            for (const auto *r : sorted)
            {
                for (const auto &w : r->pdr)
                {
                    out << to_string(mode) << ',' << r->config.seed << ',' << format_number(w.t_start) << ','
                        << format_number(w.t_end) << ',' << w.sent << ',' << w.received << ','
                        << opt_number(w.pdr) << '\n';
                }
            }
        }
        finish(out, path);
    }

    void write_mean_pdr_csv(const std::filesystem::path &path, const std::map<Mode, std::vector<PdrWindow>> &mean)
    {
        auto out = open_out(path);
        out << "mode,t_start,t_end,sent,received,pdr\n";
        for (const auto &[mode, series] : mean)
        {
            for (const auto &w : series)
            {
                out << to_string(mode) << ',' << format_number(w.t_start) << ','
                    << format_number(w.t_end) << ',' << w.sent << ',' << w.received << ','
                    << opt_number(w.pdr) << '\n';
            }
        }
        finish(out, path);
    }

    void write_install_csv(const std::filesystem::path &path, std::span<const InstallSample> samples)
    {
        auto out = open_out(path);
        out << "distance_m,size_B,elapsed_s\n";
        for (const auto &s : samples)
        {
            out << format_number(s.dist_m) << ',' << s.size_B << ',' << format_number(s.elapsed_s) << '\n';
        }
        finish(out, path);
    }

    void write_sweep_csv(const std::filesystem::path &path, std::span<const SweepCell> cells)
    {
        auto out = open_out(path);
        out << "distance_m,size_B,elapsed_s\n";
        for (const auto &c : cells)
        {
            out << format_number(c.distance_m) << ',' << c.size_B << ',' << format_number(c.mean_elapsed_s) << '\n';
        }
        finish(out, path);
    }

    void write_counters_csv(const std::filesystem::path &path, const std::map<std::string, std::uint64_t> &counters)
    {
        auto out = open_out(path);
        out << "name,value\n";
        for (const auto &[name, value] : counters)
        {
            out << name << ',' << value << '\n';
        }
        finish(out, path);
    }

    void write_trace(const std::filesystem::path &path, std::span<const TraceLine> trace)
    {
        auto out = open_out(path);
        for (const auto &t : trace)
        {
            out << format_number(t.time.seconds()) << '\t' << t.type << '\t' << t.src << '\t';
            if (t.dst)
            {
                out << *t.dst;
            }
            else
            {
                out << '*';
            }
            out << '\t' << t.size_B << '\t' << to_string(t.channel) << '\n';
        }
        finish(out, path);
    }

    void export_csv(const RunReport &report, const std::filesystem::path &dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
        {
            throw IoError("cannot create " + dir.string() + ": " + ec.message());
        }
        std::map<Mode, std::vector<RunReport>> one;
        one[report.config.mode].push_back(report);
        write_pdr_csv(dir / "pdr.csv", one);
        write_install_csv(dir / "install.csv", report.installs);
        auto counters = report.counters;
        counters["invariants.checks"] = report.invariants.checks;
        counters["invariants.violations"] = report.invariants.total();
        write_counters_csv(dir / "counters.csv", counters);
    }
} // namespace dsdivn
