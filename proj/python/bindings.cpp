#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rpmguard/alphabet.hpp"
#include "rpmguard/config.hpp"
#include "rpmguard/discretizer.hpp"
#include "rpmguard/errors.hpp"
#include "rpmguard/eval.hpp"
#include "rpmguard/hmm.hpp"
#include "rpmguard/io.hpp"
#include "rpmguard/pipeline.hpp"
#include "rpmguard/simulator.hpp"

namespace py = pybind11;
using namespace rpmguard;

namespace {

PipelineConfig config_from(const std::string& config_text) {
  if (config_text.empty()) return PipelineConfig{};
  return PipelineConfig::from_json_text(config_text);
}

py::dict report_to_dict(const EvalReport& report) {
  py::dict d;
  py::dict cm;
  cm["tp"] = report.windows.tp;
  cm["fp"] = report.windows.fp;
  cm["fn"] = report.windows.fn;
  cm["tn"] = report.windows.tn;
  d["confusion"] = cm;
  d["accuracy"] = report.windows.accuracy();
  d["labels_total"] = report.labels_total;
  d["labels_detected"] = report.labels_detected;
  d["missed_scenarios"] = report.missed_scenarios;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rpmguard, m) {
  m.doc() = "HMM-based anomaly detection for remote patient monitoring "
            "event streams";

  py::register_exception<Error>(m, "RpmguardError", PyExc_RuntimeError);

  m.attr("ALPHABET_VERSION") = std::string(kAlphabetVersion);
  m.def("symbol_names", [] { return symbol_names(); },
        "the 16 observation symbols in code order");
  m.def("symbol_code", [](const std::string& name) { return symbol_code(name); });

  py::class_<HmmModel>(m, "HmmModel")
      .def(py::init<>())
      .def_readwrite("n_states", &HmmModel::n_states)
      .def_readwrite("n_symbols", &HmmModel::n_symbols)
      .def_readwrite("transition", &HmmModel::transition)
      .def_readwrite("emission", &HmmModel::emission)
      .def_readwrite("initial", &HmmModel::initial)
      .def_readwrite("alphabet_tag", &HmmModel::alphabet_tag)
      .def("validate", [](const HmmModel& m_) { m_.validate(); });

  m.def("forward_log_likelihood", &forward_log_likelihood, py::arg("model"),
        py::arg("sequence"),
        "log P(O | lambda) by the scaled forward recursion");

  m.def(
      "train_baum_welch",
      [](const std::vector<ObservationSequence>& sequences,
         std::size_t n_states, std::size_t alphabet_size,
         std::size_t max_iterations, double convergence_tol,
         std::uint64_t rng_seed, double smoothing_floor) {
        TrainConfig cfg;
        cfg.max_iterations = max_iterations;
        cfg.convergence_tol = convergence_tol;
        cfg.rng_seed = rng_seed;
        cfg.smoothing_floor = smoothing_floor;
        auto result = train_baum_welch(sequences, n_states, alphabet_size, cfg);
        return py::make_tuple(result.model, result.log_likelihood_trace,
                              result.iterations, result.converged);
      },
      py::arg("sequences"), py::arg("n_states"), py::arg("alphabet_size"),
      py::arg("max_iterations") = 200, py::arg("convergence_tol") = 1e-4,
      py::arg("rng_seed") = 1, py::arg("smoothing_floor") = 1e-6,
      "returns (model, log_likelihood_trace, iterations, converged)");

  m.def("serialize_model", &serialize_model);
  m.def("deserialize_model", &deserialize_model, py::arg("text"),
        py::arg("expected_alphabet_tag") = "");

  m.def(
      "fit_profile",
      [](const std::string& kind, const std::vector<double>& readings) {
        const auto p = fit_profile(device_kind_from_string(kind), readings);
        py::dict d;
        d["kind"] = kind;
        d["mu"] = p.mu;
        d["sigma"] = p.sigma;
        return d;
      },
      py::arg("kind"), py::arg("readings"));

  m.def(
      "discretize",
      [](const std::string& kind, double mu, double sigma, double reading) {
        DeviceProfile p{device_kind_from_string(kind), mu, sigma};
        return symbol_name(discretize(p, reading));
      },
      py::arg("kind"), py::arg("mu"), py::arg("sigma"), py::arg("reading"));

  m.def(
      "expand_window",
      [](const std::vector<std::vector<std::string>>& window,
         std::size_t cap) {
        std::vector<ObservationVector> vectors(window.size());
        for (std::size_t t = 0; t < window.size(); ++t) {
          vectors[t].state_index = t;
          vectors[t].ts = static_cast<TimePoint>(t);
          for (const auto& name : window[t]) {
            vectors[t].symbols.push_back(symbol_code(name));
          }
          std::sort(vectors[t].symbols.begin(), vectors[t].symbols.end());
        }
        std::vector<std::vector<std::string>> out;
        for (const auto& seq : expand(vectors, cap)) {
          std::vector<std::string> names;
          for (int code : seq) names.push_back(symbol_name(code));
          out.push_back(std::move(names));
        }
        return out;
      },
      py::arg("window"), py::arg("cap") = 4096,
      "cartesian expansion of a window of symbol-name sets");

  m.def(
      "simulate",
      [](std::size_t days, std::uint64_t seed, const std::string& behavior_path,
         const std::string& presence_path, const std::string& config_text) {
        const auto cfg = config_from(config_text);
        const auto logs = simulate_days(cfg.routine, days, seed);
        write_event_log(behavior_path, logs.behavior);
        write_event_log(presence_path, logs.presence);
        return py::make_tuple(logs.behavior.size(), logs.presence.size());
      },
      py::arg("days"), py::arg("seed"), py::arg("behavior_path"),
      py::arg("presence_path"), py::arg("config_text") = "");

  m.def(
      "train_files",
      [](const std::string& behavior_path, const std::string& presence_path,
         const std::string& model_path, const std::string& threshold_path,
         const std::string& profiles_path, const std::string& config_text) {
        const auto cfg = config_from(config_text);
        const auto out = train_pipeline(cfg, behavior_path, presence_path);
        write_text_file(model_path, serialize_model(out.model));
        write_text_file(threshold_path, serialize_threshold(out.threshold));
        write_text_file(profiles_path, serialize_profiles(out.profiles));
        py::dict d;
        d["segments"] = out.segment_count;
        d["sequences"] = out.sequence_count;
        d["cutoff"] = out.threshold.cutoff;
        d["iterations"] = out.train_result.iterations;
        d["converged"] = out.train_result.converged;
        return d;
      },
      py::arg("behavior_path"), py::arg("presence_path"),
      py::arg("model_path"), py::arg("threshold_path"),
      py::arg("profiles_path"), py::arg("config_text") = "");

  m.def(
      "score_files",
      [](const std::string& behavior_path, const std::string& presence_path,
         const std::string& model_path, const std::string& threshold_path,
         const std::string& profiles_path, const std::string& alerts_path,
         const std::string& windows_path, const std::string& config_text) {
        const auto cfg = config_from(config_text);
        const auto model = deserialize_model(read_text_file(model_path),
                                             cfg.alphabet_version);
        const auto threshold =
            deserialize_threshold(read_text_file(threshold_path));
        const auto profiles =
            deserialize_profiles(read_text_file(profiles_path));
        const auto out = score_pipeline(cfg, model, threshold, profiles,
                                        behavior_path, presence_path);
        write_alerts(alerts_path, out.alerts);
        write_window_records(windows_path, out.windows);
        return py::make_tuple(out.windows.size(), out.alerts.size());
      },
      py::arg("behavior_path"), py::arg("presence_path"),
      py::arg("model_path"), py::arg("threshold_path"),
      py::arg("profiles_path"), py::arg("alerts_path"),
      py::arg("windows_path"), py::arg("config_text") = "");

  m.def(
      "inject_files",
      [](const std::string& behavior_path, const std::string& presence_path,
         std::uint64_t seed, std::size_t random_count,
         const std::string& profiles_path, const std::string& out_behavior,
         const std::string& out_presence, const std::string& labels_path,
         const std::string& config_text) {
        const auto cfg = config_from(config_text);
        SimulatedLogs logs{read_event_log(behavior_path),
                           read_event_log(presence_path)};
        auto crafted = inject_all_scenarios(logs, cfg.routine, seed);
        std::vector<LabelInterval> labels = crafted.labels;
        if (random_count > 0) {
          const auto profiles =
              profiles_path.empty()
                  ? cfg.profiles
                  : deserialize_profiles(read_text_file(profiles_path));
          auto randoms = generate_random_anomalies(
              crafted.logs, cfg.registry, profiles, cfg.detector,
              cfg.pipeline.coalesce_window, cfg.pipeline.heartbeat_tolerance,
              cfg.pipeline.gap_threshold, cfg.pipeline.max_segment_len,
              random_count, seed, labels);
          crafted.logs = std::move(randoms.logs);
          labels.insert(labels.end(), randoms.labels.begin(),
                        randoms.labels.end());
        }
        write_event_log(out_behavior, crafted.logs.behavior);
        write_event_log(out_presence, crafted.logs.presence);
        write_labels(labels_path, labels);
        return labels.size();
      },
      py::arg("behavior_path"), py::arg("presence_path"), py::arg("seed"),
      py::arg("random_count"), py::arg("profiles_path"),
      py::arg("out_behavior"), py::arg("out_presence"), py::arg("labels_path"),
      py::arg("config_text") = "");

  m.def(
      "evaluate_files",
      [](const std::string& alerts_path, const std::string& labels_path,
         const std::string& windows_path) {
        const auto report =
            evaluate(read_alerts(alerts_path), read_labels(labels_path),
                     read_window_records(windows_path));
        return report_to_dict(report);
      },
      py::arg("alerts_path"), py::arg("labels_path"), py::arg("windows_path"));

  m.def(
      "run_benchmark",
      [](std::size_t days, std::uint64_t seed, std::size_t random_count,
         const std::string& out_dir, const std::string& config_text) {
        const auto cfg = config_from(config_text);
        const auto out = run_benchmark(cfg, days, seed, random_count, out_dir);
        py::dict d = report_to_dict(out.report);
        d["scenario_recall"] = out.scenario_recall;
        d["window_fpr"] = out.window_fpr;
        d["segments"] = out.segment_count;
        return d;
      },
      py::arg("days"), py::arg("seed"), py::arg("random_count"),
      py::arg("out_dir"), py::arg("config_text") = "");

  m.def("scenario_catalog_text", &scenario_catalog_text);
  m.def("default_config_text",
        [] { return PipelineConfig{}.to_json_text(); });
}
