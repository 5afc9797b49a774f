#include "dsdivn/experiments.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

namespace py = pybind11;
using namespace dsdivn;

namespace
{
    // (id, x_m, v_mps, dir)
    using Car = std::tuple<VehicleId, double, double, int>;

    std::vector<VehicleState> to_states(const std::vector<Car> &cars)
    {
        std::vector<VehicleState> out;
        out.reserve(cars.size());
        for (const auto &[id, x, v, dir] : cars)
        {
            if (dir != 1 && dir != -1)
            {
                throw py::value_error("dir must be +1 or -1");
            }
            VehicleState s;
            s.id = id;
            s.x_m = x;
            s.v_mps = v;
            s.dir = dir;
            out.push_back(s);
        }
        return out;
    }

    py::dict to_dict(const RunReport &r)
    {
        py::list pdr;
        for (const auto &w : r.pdr)
        {
            py::dict d;
            d["t_start"] = w.t_start;
            d["t_end"] = w.t_end;
            d["sent"] = w.sent;
            d["received"] = w.received;
            d["pdr"] = w.pdr ? py::object(py::float_(*w.pdr)) : py::none();
            pdr.append(d);
        }
        py::list installs;
        for (const auto &s : r.installs)
        {
            installs.append(py::make_tuple(s.dist_m, s.size_B, s.elapsed_s));
        }
        py::dict out;
        out["mode"] = std::string(to_string(r.config.mode));
        out["seed"] = r.config.seed;
        out["sent"] = r.sent;
        out["received"] = r.received;
        out["dropped"] = r.dropped;
        out["in_flight"] = r.in_flight;
        out["pdr"] = pdr;
        out["installs"] = installs;
        out["counters"] = r.counters;
        out["invariant_checks"] = r.invariants.checks;
        out["invariant_violations"] = r.invariants.total();
        return out;
    }

    RunReport simulate(const std::string &scenario_json, std::optional<std::uint64_t> seed,
                       std::optional<std::string> mode, std::optional<std::string> out_dir)
    {
        auto cfg = parse_scenario(scenario_json);
        if (seed)
        {
            cfg.seed = *seed;
        }
        if (mode)
        {
            cfg.mode = parse_mode(*mode);
        }
        RunReport r;
        {
            py::gil_scoped_release release;
            r = run_scenario(cfg).report;
        }
        if (out_dir)
        {
            export_csv(r, *out_dir);
        }
        return r;
    }
} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Compiled core of the dsdivn simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "segment_of", [](double x, double seg_len) { return segment_of(x, seg_len).index; }, py::arg("x_m"),
        py::arg("segment_len_m"));

    m.def(
        "residual_time",
        [](double x, double v, int dir, double seg_len) { return residual_time(to_states({{0, x, v, dir}})[0], seg_len); },
        py::arg("x_m"), py::arg("v_mps"), py::arg("dir"), py::arg("segment_len_m"));

    m.def(
        "link_delay",
        [](double dist, std::uint32_t size, double range, double bitrate, double proc) {
            LinkModelParams p;
            p.bitrate_bps = bitrate;
            p.per_hop_proc_s = proc;
            return link_delay(dist, size, p, range);
        },
        py::arg("dist_m"), py::arg("size_B"), py::arg("range_m") = 300.0, py::arg("bitrate_bps") = 6e6,
        py::arg("per_hop_proc_s") = 1e-3);

    m.def(
        "elect_head", [](const std::vector<Car> &cars, double seg_len) { return elect_head(to_states(cars), seg_len); },
        py::arg("members"), py::arg("segment_len_m"), "members are (id, x_m, v_mps, dir) tuples");

    m.def(
        "rank_candidates",
        [](const std::vector<Car> &cars, std::optional<VehicleId> head, double seg_len) {
            return rank_candidates(to_states(cars), head, seg_len);
        },
        py::arg("members"), py::arg("head"), py::arg("segment_len_m"));

    m.def("scenario_from_file", [](const std::string &path) { return scenario_to_json(load_scenario(path)); },
          py::arg("path"), "Validated scenario as canonical JSON text");

    m.def(
        "simulate",
        [](const std::string &json, std::optional<std::uint64_t> seed, std::optional<std::string> mode,
           std::optional<std::string> out_dir) { return to_dict(simulate(json, seed, mode, out_dir)); },
        py::arg("scenario_json"), py::arg("seed") = py::none(), py::arg("mode") = py::none(),
        py::arg("out_dir") = py::none());

    m.def(
        "sweep",
        [](const std::vector<double> &distances, const std::vector<std::uint32_t> &sizes, int reps, double range) {
            LinkModelParams link;
            link.loss_prob = 0.0;
            std::vector<SweepCell> cells;
            {
                py::gil_scoped_release release;
                cells = run_distance_sweep(distances, sizes, reps, link, range);
            }
            py::list out;
            for (const auto &c : cells)
            {
                out.append(py::make_tuple(c.distance_m, c.size_B, c.mean_elapsed_s));
            }
            return out;
        },
        py::arg("distances"), py::arg("sizes"), py::arg("reps") = 20, py::arg("range_m") = 300.0);
}
