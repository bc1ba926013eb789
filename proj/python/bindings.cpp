#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ucf/acceptance.hpp"
#include "ucf/profiler.hpp"
#include "ucf/trainer.hpp"

namespace py = pybind11;
using namespace ucf;

namespace {

// Configs cross the boundary as JSON text; the Python side converts to dicts.
RunConfig config_from(const std::string& text) { return text.empty() ? RunConfig{} : parse_run_config(text); }

py::array_t<double> to_array(const Tensor& t) {
  py::array_t<double> a(t.shape);
  std::copy(t.data.begin(), t.data.end(), a.mutable_data());
  return a;
}

py::dict cost_dict(const CostParts& c) {
  py::dict d;
  d["projection"] = c.projection;
  d["attention_scores"] = c.attention_scores;
  d["feed_forward"] = c.feed_forward;
  d["norm"] = c.norm;
  d["merge"] = c.merge;
  d["total"] = c.total();
  return d;
}

}  // namespace

PYBIND11_MODULE(_ucf, m) {
  m.doc() = "Core bindings; see the ucfformer package for the Python-facing API.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("resolve_config", [](const std::string& text) { return to_json(config_from(text)).dump(); },
        py::arg("config_json") = "");

  m.def("desk_config", [] { return to_json(acceptance::desk_config()).dump(); });

  m.def(
      "generate_dataset",
      [](const std::string& text) {
        const Dataset d = generate_dataset(config_from(text).data);
        py::list samples;
        for (std::size_t i = 0; i < d.samples.size(); ++i) {
          py::list inputs;
          for (const Tensor& t : d.samples[i].inputs) inputs.append(to_array(t));
          samples.append(py::make_tuple(inputs, d.samples[i].label, to_string(d.partitions[i])));
        }
        return samples;
      },
      py::arg("config_json") = "");

  m.def(
      "profile",
      [](std::uint64_t modalities, std::uint64_t steps, std::uint64_t d, std::uint64_t heads, std::uint64_t d_k,
         std::uint64_t d_v, std::uint64_t layers, const std::string& variant) {
        const CostReport r =
            profile_encoder(encoder_variant_from_string(variant), {modalities, steps, d, heads, d_k, d_v, layers});
        py::dict out;
        out["params_per_layer"] = cost_dict(r.params_per_layer);
        out["params"] = cost_dict(r.params);
        out["macs_per_layer"] = cost_dict(r.macs_per_layer);
        out["macs"] = cost_dict(r.macs);
        out["core_params_per_layer"] = r.core_params_per_layer();
        out["flops_per_layer"] = r.flops_per_layer();
        return out;
      },
      py::arg("modalities") = 3, py::arg("steps") = 8, py::arg("d") = 512, py::arg("heads") = 8,
      py::arg("d_k") = 64, py::arg("d_v") = 64, py::arg("layers") = 4, py::arg("variant") = "sim");

  m.def(
      "complexity_csv",
      [](std::uint64_t modalities, std::uint64_t steps, std::uint64_t d, std::uint64_t min_layers,
         std::uint64_t max_layers) {
        ProfileConfig c;
        c.modalities = modalities;
        c.steps = steps;
        c.d = d;
        return complexity_csv(compare_complexity(c, min_layers, max_layers));
      },
      py::arg("modalities") = 3, py::arg("steps") = 8, py::arg("d") = 512, py::arg("min_layers") = 2,
      py::arg("max_layers") = 5);

  m.def(
      "train",
      [](const std::string& text) {
        TrainRun run;
        {
          py::gil_scoped_release release;
          run = run_experiment(config_from(text));
        }
        py::dict out;
        out["metrics_jsonl"] = metrics_jsonl(run);
        out["confusion_csv"] = confusion_csv(run);
        out["test"] = to_json(run.test).dump();
        out["best_epoch"] = run.best_epoch;
        return out;
      },
      py::arg("config_json") = "");

  m.def(
      "gradcheck",
      [](const std::string& text, double eps) {
        py::gil_scoped_release release;
        return gradcheck_model(config_from(text), eps).max_rel_error;
      },
      py::arg("config_json") = "", py::arg("eps") = 1e-5);

  m.def("contrastive_from_similarity", &contrastive_from_similarity, py::arg("mean_similarity"),
        py::arg("clamp_eps") = 1e-6);
  m.def("ce_from_probability", &ce_from_probability, py::arg("p_target"));
  m.def(
      "total_loss", [](double ce, double contrast, double alpha) { return total_loss(ce, contrast, {.alpha = alpha}); },
      py::arg("ce"), py::arg("contrast"), py::arg("alpha") = 0.2);
  m.def("cosine_sim", [](const std::vector<double>& a, const std::vector<double>& b) { return cosine_sim(a, b); });

  m.def(
      "accept",
      [](const std::vector<int>& ids) {
        std::vector<acceptance::CriterionResult> results;
        {
          py::gil_scoped_release release;
          acceptance::Options options;
          options.only = ids;
          results = acceptance::run_all(options);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["id"] = r.id;
          d["title"] = r.title;
          d["passed"] = r.pass;
          d["detail"] = r.detail;
          d["seconds"] = r.seconds;
          out.append(d);
        }
        return out;
      },
      py::arg("ids") = std::vector<int>{});
}
