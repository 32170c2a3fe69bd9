#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "a2dcdr/alignment.hpp"
#include "a2dcdr/fusion_scoring.hpp"
#include "a2dcdr/gradcheck.hpp"
#include "a2dcdr/training.hpp"

namespace py = pybind11;
using namespace a2dcdr;

namespace {

// configs cross the boundary as JSON text; the Python side wraps dicts
TrainingConfig parse_config(const std::string& text) {
  TrainingConfig c = nlohmann::json::parse(text).get<TrainingConfig>();
  c.validate();
  return c;
}

std::vector<std::pair<int, int>> pairs_of(const std::vector<Interaction>& rows) {
  std::vector<std::pair<int, int>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r.user, r.item);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "two-domain recommender core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<DomainDataset>(m, "Dataset")
      .def_readonly("user_count", &DomainDataset::user_count)
      .def_property_readonly("item_counts", [](const DomainDataset& d) { return d.item_counts; })
      .def("train", [](const DomainDataset& d, int domain) { return pairs_of(d.train.at(domain)); })
      .def("test", [](const DomainDataset& d, int domain) { return pairs_of(d.test.at(domain)); })
      .def("save", [](const DomainDataset& d, const std::filesystem::path& dir) { save_dataset(d, dir); });

  m.def(
      "synthesize",
      [](int users, int items_a, int items_b, double shared, double exclusive, double per_user, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.user_count = users;
        spec.item_counts = {items_a, items_b};
        spec.shared_strength = shared;
        spec.exclusive_strength = exclusive;
        spec.interactions_per_user = per_user;
        spec.seed = seed;
        return synthesize_dataset(spec).dataset;
      },
      py::arg("users") = 500, py::arg("items_a") = 200, py::arg("items_b") = 200, py::arg("shared") = 0.8,
      py::arg("exclusive") = 0.5, py::arg("interactions_per_user") = 12.0, py::arg("seed") = 0);
  m.def("load_dataset", [](const std::filesystem::path& dir) { return load_dataset(dir); });

  m.def("default_config", [] { return nlohmann::json(TrainingConfig{}).dump(); });
  m.def("config_hash", [](const std::string& text) { return parse_config(text).hash(); });

  m.def(
      "fit",
      [](const DomainDataset& ds, const std::string& config_text) {
        const TrainingConfig config = parse_config(config_text);
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit(ds, config);
        }
        nlohmann::json out;
        out["report"] = to_json(r.best_report);
        out["best_epoch"] = r.best_epoch;
        out["log"] = to_json(r.log);
        return out.dump();
      },
      py::arg("dataset"), py::arg("config"));

  m.def(
      "rank_metrics",
      [](const std::vector<double>& scores, std::size_t positive, int k) {
        const RankResult r = rank_metrics(scores, positive, k);
        return py::make_tuple(r.rank, r.hit, r.ndcg);
      },
      py::arg("scores"), py::arg("positive") = 0, py::arg("k") = 10);

  m.def(
      "mmd",
      [](const Matrix& x, const Matrix& y, bool median_heuristic, const std::vector<double>& bandwidths) {
        KernelConfig kernel;
        kernel.median_heuristic = median_heuristic;
        kernel.bandwidths = bandwidths;
        kernel.validate();
        return mmd(x, y, kernel);
      },
      py::arg("x"), py::arg("y"), py::arg("median_heuristic") = true,
      py::arg("bandwidths") = KernelConfig{}.bandwidths);

  m.def(
      "tafc_fuse",
      [](const Vector& h_v, const Vector& cross_t, const Vector& own_t, const Vector& own_s) {
        const FusedUserRep f = tafc_fuse(h_v, {cross_t, own_t, own_s});
        return py::make_tuple(f.e, f.attention_weights);
      },
      py::arg("h_v"), py::arg("cross_t"), py::arg("own_t"), py::arg("own_s"));

  m.def(
      "gradcheck",
      [](int d, int n, std::uint64_t seed) {
        GradCheckOptions o;
        o.d = d;
        o.n = n;
        o.seed = seed;
        py::list out;
        for (const auto& r : run_gradient_checks(o)) {
          py::dict row;
          row["suite"] = r.suite;
          row["worst_probe"] = r.worst_probe;
          row["worst_relative_error"] = r.worst_relative_error;
          row["passed"] = r.passed;
          out.append(row);
        }
        return out;
      },
      py::arg("d") = 4, py::arg("n") = 6, py::arg("seed") = 0);
}
