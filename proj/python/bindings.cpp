// Python module rewevo._core: config, simulation, batch runs, exports and
// the closed-form lifecycle functions.

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rewevo/analysis.hpp"
#include "rewevo/config.hpp"
#include "rewevo/lifecycle.hpp"

namespace py = pybind11;
using namespace rewevo;

namespace {

py::dict metrics_dict(const Metrics &m) {
  py::dict d;
  d["steps"] = m.steps;
  d["extinct"] = m.extinct;
  d["births"] = m.births;
  d["founders"] = m.founders;
  d["deaths"] = m.deaths;
  d["average_lifetime"] = m.average_lifetime ? py::cast(*m.average_lifetime) : py::none();
  d["agent_steps"] = m.agent_steps;
  d["total_eaten"] = m.total_eaten;
  d["consumption_per_step"] = m.consumption_per_step;
  d["sample_steps"] = m.sample_steps;
  d["population"] = m.population;
  d["mean_w_food"] = m.mean_w_food;
  d["mean_w_act"] = m.mean_w_act;
  return d;
}

std::vector<std::string> json_lines(const std::vector<EventRecord> &events) {
  std::vector<std::string> out;
  out.reserve(events.size());
  for (const auto &e : events) out.push_back(to_json_line(e));
  return out;
}

py::dict agent_dict(const Simulation &sim, const AgentState &a) {
  py::dict d;
  d["id"] = a.id;
  d["parent_id"] = a.parent_id;
  d["birth_step"] = a.birth_step;
  d["energy"] = a.energy;
  d["w_food"] = a.reward.w_food;
  d["w_act"] = a.reward.w_act;
  d["eaten"] = a.eaten;
  if (const auto *body = sim.arena().agent_body(a.id)) {
    d["position"] = py::make_tuple(body->center.x, body->center.y);
    d["orientation"] = body->orientation;
  }
  return d;
}

std::vector<RunData> load_runs(const std::vector<std::string> &inputs) {
  std::vector<RunData> runs;
  for (const auto &in : inputs) {
    const auto dirs = find_run_directories(in);
    if (dirs.empty()) throw ConfigError("no run directories under '" + in + "'");
    for (const auto &d : dirs) runs.push_back(load_run(d));
  }
  return runs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Evolving reward functions in a foraging population";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  // Lifecycle functions with default parameters.
  m.def(
      "hazard", [](double age, double energy) { return hazard(age, energy, HazardParams{}); },
      py::arg("age"), py::arg("energy"), "Per-step death probability.");
  m.def(
      "survival", [](double age, double energy) { return survival(age, energy, HazardParams{}); },
      py::arg("age"), py::arg("energy"), "Probability of surviving to `age` at fixed energy.");
  m.def(
      "birth_probability",
      [](double energy) { return birth_probability(energy, BirthParams{}); }, py::arg("energy"));
  m.def(
      "compute_gae",
      [](const std::vector<double> &rewards, const std::vector<double> &values, double bootstrap,
         const std::vector<std::uint8_t> &dones, double gamma, double lam) {
        const auto r = rl::compute_gae(rewards, values, bootstrap, dones, gamma, lam);
        return py::make_tuple(py::array(py::cast(r.advantages)), py::array(py::cast(r.returns)));
      },
      py::arg("rewards"), py::arg("values"), py::arg("bootstrap"), py::arg("dones"),
      py::arg("gamma") = 0.999, py::arg("lam") = 0.95, "Returns (advantages, returns).");
  m.def(
      "random_walk",
      [](int steps, int trials, std::uint64_t seed) {
        Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(Stream::random_walk)});
        const auto ends =
            random_walk_characterization(steps, trials, rng, preset_config("random-walk-null").mutation);
        py::array_t<double> out({static_cast<py::ssize_t>(ends.size()), py::ssize_t{2}});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < ends.size(); ++i) {
          view(i, 0) = ends[i].w_food;
          view(i, 1) = ends[i].w_act;
        }
        return out;
      },
      py::arg("steps") = 1000, py::arg("trials") = 1000, py::arg("seed") = 0,
      "Endpoints (w_food, w_act) of independent mutation random walks, shape (trials, 2).");

  py::class_<SimulationConfig>(m, "Config")
      .def_static("preset", [](const std::string &name) { return preset_config(name); },
                  py::arg("name") = "baseline")
      .def_static(
          "load",
          [](std::optional<std::string> path, const std::string &preset,
             const std::vector<std::string> &overrides) {
            return load_config(path, preset, overrides);
          },
          py::arg("path") = py::none(), py::arg("preset") = "baseline",
          py::arg("overrides") = std::vector<std::string>{})
      .def(
          "with_overrides",
          [](const SimulationConfig &c, const std::vector<std::string> &overrides) {
            auto out = apply_overrides(overrides, c);
            validate(out);
            return out;
          },
          py::arg("overrides"), "Copy with `key=value` overrides applied and validated.")
      .def("to_text", [](const SimulationConfig &c) { return config_to_text(c); })
      .def_readwrite("seed", &SimulationConfig::seed)
      .def_readwrite("max_steps", &SimulationConfig::max_steps)
      .def_readwrite("initial_agents", &SimulationConfig::initial_agents)
      .def_readwrite("capacity", &SimulationConfig::capacity)
      .def_readwrite("checkpoint_every", &SimulationConfig::checkpoint_every)
      .def(py::self == py::self)
      .def("__repr__", [](const SimulationConfig &c) {
        return "<Config seed=" + std::to_string(c.seed) +
               " max_steps=" + std::to_string(c.max_steps) + ">";
      });
  m.def("preset_names", &preset_names);
  m.def("config_keys", &config_keys);

  py::class_<Simulation>(m, "Simulation")
      .def(py::init<SimulationConfig>(), py::arg("config"))
      .def("step", [](Simulation &s) { return s.step(); }, "Advance one step; returns new events.")
      .def(
          "advance",
          [](Simulation &s, long steps) {
            py::gil_scoped_release release;
            long done = 0;
            for (; done < steps && !s.extinct(); ++done) s.step();
            return done;
          },
          py::arg("steps"), "Step up to `steps` times, stopping at extinction.")
      .def_property_readonly("current_step", &Simulation::current_step)
      .def_property_readonly("extinct", &Simulation::extinct)
      .def_property_readonly("population",
                             [](const Simulation &s) { return s.agents().size(); })
      .def_property_readonly("observation_dim", &Simulation::observation_dim)
      .def("events", [](const Simulation &s) { return json_lines(s.events()); },
           "Event log as JSON lines.")
      .def("agents",
           [](const Simulation &s) {
             py::list out;
             for (const auto &a : s.agents()) out.append(agent_dict(s, a));
             return out;
           })
      .def("observation",
           [](const Simulation &s, int agent_id) {
             const auto *a = s.agent(agent_id);
             if (!a) throw py::key_error("no living agent " + std::to_string(agent_id));
             const auto &cfg = s.config().arena;
             return py::array(py::cast(s.arena()
                                           .build_observation(agent_id, a->energy)
                                           .to_vector(cfg.velocity_scale, cfg.energy_scale)));
           },
           py::arg("agent_id"))
      .def("last_ledger",
           [](const Simulation &s) {
             const auto &l = s.last_ledger();
             py::dict d;
             d["step"] = l.step;
             d["energy_before"] = l.energy_before;
             d["food_inflow"] = l.food_inflow;
             d["metabolic_outflow"] = l.metabolic_outflow;
             d["child_endowment"] = l.child_endowment;
             d["parent_deduction"] = l.parent_deduction;
             d["death_removal"] = l.death_removal;
             d["energy_after"] = l.energy_after;
             d["residual"] = l.residual();
             return d;
           })
      .def("save_checkpoint", &Simulation::save_checkpoint, py::arg("path"))
      .def_static("load_checkpoint", &Simulation::load_checkpoint, py::arg("path"));

  m.def(
      "run",
      [](const SimulationConfig &config, const std::string &event_log_path, long metrics_stride) {
        RunOutcome out;
        {
          py::gil_scoped_release release;
          RunOptions opts;
          opts.event_log_path = event_log_path;
          opts.metrics_stride = metrics_stride;
          out = run(config, opts);
        }
        py::dict d;
        d["steps"] = out.steps;
        d["extinct"] = out.extinct;
        d["metrics"] = metrics_dict(out.metrics);
        d["events"] = json_lines(out.events);
        return d;
      },
      py::arg("config"), py::arg("event_log_path") = "", py::arg("metrics_stride") = 1000,
      "Run until max_steps or extinction.");

  m.def(
      "run_batch",
      [](const SimulationConfig &config, const std::vector<std::uint64_t> &seeds,
         const std::string &out_root, const std::string &label, int jobs) {
        std::vector<BatchEntry> entries;
        {
          py::gil_scoped_release release;
          BatchOptions opts;
          opts.out_root = out_root;
          opts.label = label;
          opts.jobs = jobs;
          entries = run_batch(config, seeds, opts);
        }
        py::list out;
        for (const auto &e : entries) {
          py::dict d;
          d["seed"] = e.seed;
          d["directory"] = e.directory;
          d["ok"] = e.ok;
          d["error"] = e.error;
          d["steps"] = e.steps;
          d["extinct"] = e.extinct;
          d["metrics"] = metrics_dict(e.metrics);
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("seeds"), py::arg("out_root"), py::arg("label") = "baseline",
      py::arg("jobs") = 1);

  m.def(
      "export_csv",
      [](const std::string &kind, const std::vector<std::string> &inputs, long k, long stride) {
        const auto runs = load_runs(inputs);
        std::ostringstream out;
        if (kind == "reward_scatter_last_k")
          export_reward_scatter(runs, k, out);
        else if (kind == "reward_dynamics")
          export_reward_dynamics(runs, stride, out);
        else if (kind == "metrics_table")
          export_metrics_table(runs, out);
        else if (kind == "extinction_table")
          export_extinction_table(runs, out);
        else if (kind == "population_curve")
          export_population_curve(runs, stride, out);
        else
          throw ConfigError("unknown export kind '" + kind + "'");
        return out.str();
      },
      py::arg("kind"), py::arg("inputs"), py::arg("k") = 5000, py::arg("stride") = 1000,
      "CSV text for one export kind over run or batch directories.");
}
