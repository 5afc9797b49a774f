#include "dsdivn/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dsdivn
{
    using nlohmann::json;

    std::string_view to_string(Mode m)
    {
        switch (m)
        {
        case Mode::dsdivn:
            return "dsdivn";
        case Mode::self_organized:
            return "self-organized";
        case Mode::no_fallback:
            return "no-fallback";
        }
        return "?";
    }

    Mode parse_mode(std::string_view s)
    {
        if (s == "dsdivn")
        {
            return Mode::dsdivn;
        }
        if (s == "self-organized")
        {
            return Mode::self_organized;
        }
        if (s == "no-fallback")
        {
            return Mode::no_fallback;
        }
        throw ConfigError("unknown mode '" + std::string(s) + "'");
    }

    int ScenarioConfig::segment_count() const
    {
        return static_cast<int>(std::ceil(area_m / segment_len_m));
    }

    void ScenarioConfig::validate() const
    {
        auto require = [](bool ok, const char *what) {
            if (!ok)
            {
                throw ConfigError(what);
            }
        };
        require(area_m > 0, "area_m must be positive");
        require(segment_len_m > 0, "segment_len_m must be positive");
        require(n_vehicles > 0, "n_vehicles must be positive");
        require(v_min_mps > 0 && v_min_mps <= v_max_mps, "require 0 < v_min_mps <= v_max_mps");
        require(tx_range_m > 0, "tx_range_m must be positive");
        require(segment_len_m <= tx_range_m / 2, "segment_len_m must not exceed tx_range_m / 2");
        require(pkt_rate_hz > 0, "pkt_rate_hz must be positive");
        require(sim_duration_s > 0, "sim_duration_s must be positive");
        require(link.bitrate_bps > 0, "link.bitrate_bps must be positive");
        require(link.per_hop_proc_s >= 0, "link.per_hop_proc_s must be non-negative");
        require(link.prop_speed_mps > 0, "link.prop_speed_mps must be positive");
        require(link.loss_prob >= 0 && link.loss_prob < 1, "link.loss_prob must be in [0, 1)");

        const auto &t = timers;
        require(t.hb_period_s > 0 && t.detect_timeout_s > 0 && t.advert_period_s > 0 && t.sync_period_s > 0 &&
                    t.view_period_s > 0 && t.monitor_period_s > 0 && t.maintenance_period_s > 0 &&
                    t.retry_period_s > 0 && t.idle_timeout_s > 0 && t.hard_timeout_s > 0 &&
                    t.election_window_s > 0 && t.mobility_step_s > 0 && t.pdr_window_s > 0 &&
                    t.flow_duration_s > 0,
                "all timer periods must be positive");
        require(t.max_retries >= 0, "timers.max_retries must be non-negative");
        require(t.buffer_per_key > 0, "timers.buffer_per_key must be positive");

        if (failure)
        {
            require(failure->start_s >= 0 && failure->duration_s >= 0, "failure times must be non-negative");
            require(failure->start_s + failure->duration_s <= sim_duration_s,
                    "failure must end within sim_duration_s");
            require(failure->target_segment >= 0 && failure->target_segment < segment_count(),
                    "failure.target_segment out of range");
            require(failure->target_dir == 1 || failure->target_dir == -1, "failure.target_dir must be +1 or -1");
        }
    }

    namespace
    {
        void reject_unknown(const json &obj, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!obj.is_object())
            {
                throw ConfigError(where + " must be a JSON object");
            }
            for (const auto &[key, _] : obj.items())
            {
                if (!allowed.count(key))
                {
                    throw ConfigError("unknown key '" + key + "' in " + where);
                }
            }
        }

        template <typename T>
        void read_opt(const json &obj, const char *key, T &out)
        {
            if (obj.contains(key))
            {
                out = obj.at(key).get<T>();
            }
        }

        ProtocolTimers parse_timers(const json &j)
        {
            reject_unknown(j,
                           {"hb_period_s", "detect_timeout_s", "advert_period_s", "sync_period_s", "view_period_s",
                            "monitor_period_s", "maintenance_period_s", "retry_period_s", "max_retries",
                            "idle_timeout_s", "hard_timeout_s", "election_window_s", "mobility_step_s",
                            "pdr_window_s", "flow_duration_s", "buffer_per_key", "advert_enabled",
                            "piggyback_recovery_id"},
                           "timers");
            ProtocolTimers t;
            read_opt(j, "hb_period_s", t.hb_period_s);
            read_opt(j, "detect_timeout_s", t.detect_timeout_s);
            read_opt(j, "advert_period_s", t.advert_period_s);
            read_opt(j, "sync_period_s", t.sync_period_s);
            read_opt(j, "view_period_s", t.view_period_s);
            read_opt(j, "monitor_period_s", t.monitor_period_s);
            read_opt(j, "maintenance_period_s", t.maintenance_period_s);
            read_opt(j, "retry_period_s", t.retry_period_s);
            read_opt(j, "max_retries", t.max_retries);
            read_opt(j, "idle_timeout_s", t.idle_timeout_s);
            read_opt(j, "hard_timeout_s", t.hard_timeout_s);
            read_opt(j, "election_window_s", t.election_window_s);
            read_opt(j, "mobility_step_s", t.mobility_step_s);
            read_opt(j, "pdr_window_s", t.pdr_window_s);
            read_opt(j, "flow_duration_s", t.flow_duration_s);
            read_opt(j, "buffer_per_key", t.buffer_per_key);
            read_opt(j, "advert_enabled", t.advert_enabled);
            read_opt(j, "piggyback_recovery_id", t.piggyback_recovery_id);
            return t;
        }

        LinkModelParams parse_link(const json &j)
        {
            reject_unknown(j, {"bitrate_bps", "per_hop_proc_s", "prop_speed_mps", "loss_prob"}, "link");
            LinkModelParams p;
            read_opt(j, "bitrate_bps", p.bitrate_bps);
            read_opt(j, "per_hop_proc_s", p.per_hop_proc_s);
            read_opt(j, "prop_speed_mps", p.prop_speed_mps);
            read_opt(j, "loss_prob", p.loss_prob);
            return p;
        }

        FailureSpec parse_failure(const json &j)
        {
            reject_unknown(j, {"target_segment", "target_dir", "start_s", "duration_s"}, "failure");
            FailureSpec f;
            f.target_segment = j.at("target_segment").get<int>();
            f.start_s = j.at("start_s").get<double>();
            f.duration_s = j.at("duration_s").get<double>();
            read_opt(j, "target_dir", f.target_dir);
            return f;
        }
    } // namespace

    ScenarioConfig parse_scenario(std::string_view json_text)
    {
        json j;
        try
        {
            j = json::parse(json_text);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
        }

        static const std::set<std::string> kTopLevel = {
            "area_m", "segment_len_m", "n_vehicles", "v_min_mps", "v_max_mps", "tx_range_m", "pkt_rate_hz",
            "sim_duration_s", "mode", "timers", "failure", "link", "seed"};
        reject_unknown(j, kTopLevel, "scenario");
        for (const auto &key : kTopLevel)
        {
            if (!j.contains(key))
            {
                throw ConfigError("missing key '" + key + "' in scenario");
            }
        }

        ScenarioConfig cfg;
        try
        {
            cfg.area_m = j.at("area_m").get<double>();
            cfg.segment_len_m = j.at("segment_len_m").get<double>();
            cfg.n_vehicles = j.at("n_vehicles").get<int>();
            cfg.v_min_mps = j.at("v_min_mps").get<double>();
            cfg.v_max_mps = j.at("v_max_mps").get<double>();
            cfg.tx_range_m = j.at("tx_range_m").get<double>();
            cfg.pkt_rate_hz = j.at("pkt_rate_hz").get<double>();
            cfg.sim_duration_s = j.at("sim_duration_s").get<double>();
            cfg.mode = parse_mode(j.at("mode").get<std::string>());
            cfg.timers = parse_timers(j.at("timers"));
            if (!j.at("failure").is_null())
            {
                cfg.failure = parse_failure(j.at("failure"));
            }
            cfg.link = parse_link(j.at("link"));
            cfg.seed = j.at("seed").get<std::uint64_t>();
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("bad scenario field: ") + e.what());
        }
        cfg.validate();
        return cfg;
    }

    ScenarioConfig load_scenario(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("cannot open scenario file " + path.string());
        }
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_scenario(ss.str());
    }

    std::string scenario_to_json(const ScenarioConfig &cfg)
    {
        const auto &t = cfg.timers;
        json j = {
            {"area_m", cfg.area_m},
            {"segment_len_m", cfg.segment_len_m},
            {"n_vehicles", cfg.n_vehicles},
            {"v_min_mps", cfg.v_min_mps},
            {"v_max_mps", cfg.v_max_mps},
            {"tx_range_m", cfg.tx_range_m},
            {"pkt_rate_hz", cfg.pkt_rate_hz},
            {"sim_duration_s", cfg.sim_duration_s},
            {"mode", std::string(to_string(cfg.mode))},
            {"timers",
             {{"hb_period_s", t.hb_period_s},
              {"detect_timeout_s", t.detect_timeout_s},
              {"advert_period_s", t.advert_period_s},
              {"sync_period_s", t.sync_period_s},
              {"view_period_s", t.view_period_s},
              {"monitor_period_s", t.monitor_period_s},
              {"maintenance_period_s", t.maintenance_period_s},
              {"retry_period_s", t.retry_period_s},
              {"max_retries", t.max_retries},
              {"idle_timeout_s", t.idle_timeout_s},
              {"hard_timeout_s", t.hard_timeout_s},
              {"election_window_s", t.election_window_s},
              {"mobility_step_s", t.mobility_step_s},
              {"pdr_window_s", t.pdr_window_s},
              {"flow_duration_s", t.flow_duration_s},
              {"buffer_per_key", t.buffer_per_key},
              {"advert_enabled", t.advert_enabled},
              {"piggyback_recovery_id", t.piggyback_recovery_id}}},
            {"failure", nullptr},
            {"link",
             {{"bitrate_bps", cfg.link.bitrate_bps},
              {"per_hop_proc_s", cfg.link.per_hop_proc_s},
              {"prop_speed_mps", cfg.link.prop_speed_mps},
              {"loss_prob", cfg.link.loss_prob}}},
            {"seed", cfg.seed},
        };
        if (cfg.failure)
        {
            j["failure"] = {{"target_segment", cfg.failure->target_segment},
                            {"target_dir", cfg.failure->target_dir},
                            {"start_s", cfg.failure->start_s},
                            {"duration_s", cfg.failure->duration_s}};
        }
        return j.dump(2);
    }
} // namespace dsdivn
