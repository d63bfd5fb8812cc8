#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>

#include "rgg/density.hpp"
#include "rgg/error.hpp"
#include "rgg/graph.hpp"
#include "rgg/harness.hpp"
#include "rgg/partition.hpp"
#include "rgg/sampler.hpp"
#include "rgg/serialize.hpp"
#include "rgg/theory.hpp"

namespace py = pybind11;
using namespace rgg;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::array_t<double> coords_array(const PointCloud& c) {
    const auto d = static_cast<py::ssize_t>(c.dimension());
    py::array_t<double> out({static_cast<py::ssize_t>(c.size()), d});
    std::copy(c.coords.begin(), c.coords.end(), out.mutable_data());
    return out;
}

PointCloud cloud_from_array(const DensitySpec& spec, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != spec.dimension()) {
        throw UsageError("points must have shape (N, " + std::to_string(spec.dimension()) + ")");
    }
    return make_cloud(spec, std::vector<double>(a.data(), a.data() + a.size()));
}

class Graph {
  public:
    Graph(const DensitySpec& spec, const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
          double radius)
        : g_(GeometricGraph::build(std::make_shared<const PointCloud>(cloud_from_array(spec, points)), radius)) {}

    std::size_t num_vertices() const { return g_.num_vertices(); }
    std::size_t num_components() const { return g_.num_components(); }
    double radius() const { return g_.radius(); }

    py::array_t<std::uint32_t> components() const {
        const auto c = g_.component_of();
        py::array_t<std::uint32_t> out(static_cast<py::ssize_t>(c.size()));
        std::copy(c.begin(), c.end(), out.mutable_data());
        return out;
    }

    py::array_t<bool> isolated() const {
        py::array_t<bool> out(static_cast<py::ssize_t>(g_.num_vertices()));
        auto* p = out.mutable_data();
        for (std::size_t v = 0; v < g_.num_vertices(); ++v) {
            p[v] = g_.isolated(v);
        }
        return out;
    }

    py::array_t<std::uint32_t> edges() const {
        const auto e = g_.edges();
        py::array_t<std::uint32_t> out({static_cast<py::ssize_t>(e.size()), py::ssize_t{2}});
        auto* p = out.mutable_data();
        for (const auto& [u, v] : e) {
            *p++ = u;
            *p++ = v;
        }
        return out;
    }

    py::dict stats(const std::vector<double>& probes) const {
        const auto s = rgg::stats(g_, probes);
        py::dict d;
        d["is_connected"] = s.is_connected;
        d["num_components"] = s.num_components;
        d["r_c"] = s.r_c;
        d["r_max"] = s.r_max;
        d["isolated_within"] = s.isolated_within;
        d["empty_graph"] = s.empty_graph;
        return d;
    }

  private:
    GeometricGraph g_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Random geometric graphs on radial Poisson processes";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);

    py::class_<DensitySpec>(m, "DensitySpec")
        .def_static("gaussian", &DensitySpec::gaussian, py::arg("dimension"))
        .def_static("heavy_tail", &DensitySpec::heavy_tail, py::arg("dimension"), py::arg("alpha"))
        .def_static("light_tail", &DensitySpec::light_tail, py::arg("dimension"), py::arg("v"), py::arg("scale") = 1.0)
        .def_static("parse", &DensitySpec::parse, py::arg("dimension"), py::arg("text"))
        .def_static("from_dict", [](const py::object& o) { return density_from_json(from_python(o)); })
        .def("to_dict", [](const DensitySpec& s) { return to_python(density_to_json(s)); })
        .def_property_readonly("dimension", &DensitySpec::dimension)
        .def_property_readonly("label", &DensitySpec::label)
        .def_property_readonly("norm_constant", &DensitySpec::norm_constant)
        .def_property_readonly("is_light", &DensitySpec::is_light)
        .def("profile", &DensitySpec::profile, py::arg("radius"))
        .def("__eq__", &DensitySpec::operator==)
        .def("__repr__", [](const DensitySpec& s) { return "DensitySpec(" + s.label() + ", d=" + std::to_string(s.dimension()) + ")"; });

    m.def("tail_mass", &tail_mass, py::arg("spec"), py::arg("R"));
    m.def("radial_cdf", &radial_cdf, py::arg("spec"), py::arg("rho"));
    m.def("ball_mass", &ball_mass, py::arg("spec"), py::arg("center_radius"), py::arg("r"));
    m.def(
        "cube_mass",
        [](const DensitySpec& spec, std::vector<double> lower, std::vector<double> upper) {
            return cube_mass(spec, Box{std::move(lower), std::move(upper)});
        },
        py::arg("spec"), py::arg("lower"), py::arg("upper"));

    m.def("tau", &tau, py::arg("spec"), py::arg("n"));
    m.def("expected_isolated", &expected_isolated, py::arg("spec"), py::arg("n"), py::arg("r"), py::arg("R"));
    m.def("tail_empty_prob", &tail_empty_prob, py::arg("spec"), py::arg("n"), py::arg("R"));
    m.def(
        "poisson_tail_bound",
        [](double n, double k, bool upper) { return poisson_tail_bound(n, k, upper ? TailSide::Upper : TailSide::Lower); },
        py::arg("n"), py::arg("k"), py::arg("upper"));
    m.def(
        "classify",
        [](const DensitySpec& spec, double n, double r, std::optional<double> gamma) {
            return to_python(to_json(classify(spec, n, r, gamma)));
        },
        py::arg("spec"), py::arg("n"), py::arg("r"), py::arg("gamma") = py::none());

    m.def(
        "sample",
        [](const DensitySpec& spec, double n, std::uint64_t seed) {
            std::optional<PointCloud> c;
            {
                py::gil_scoped_release release;
                c.emplace(sample(spec, n, seed));
            }
            return coords_array(*c);
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"), "Poisson(n) points from the density, shape (N, d).");

    py::class_<Graph>(m, "Graph")
        .def(py::init<const DensitySpec&, const py::array_t<double, py::array::c_style | py::array::forcecast>&, double>(),
             py::arg("spec"), py::arg("points"), py::arg("radius"))
        .def_property_readonly("num_vertices", &Graph::num_vertices)
        .def_property_readonly("num_components", &Graph::num_components)
        .def_property_readonly("radius", &Graph::radius)
        .def("components", &Graph::components)
        .def("isolated", &Graph::isolated)
        .def("edges", &Graph::edges)
        .def("stats", &Graph::stats, py::arg("probes") = std::vector<double>{});

    m.def(
        "run_sweep",
        [](const py::object& config, std::size_t threads) {
            const auto parsed = config_from_json(from_python(config));
            RunResult result;
            {
                py::gil_scoped_release release;
                result = run(parsed, RunOptions{threads});
            }
            std::ostringstream csv;
            write_results_csv(result.aggregates, csv);
            nlohmann::json cells = nlohmann::json::array();
            for (std::size_t i = 0; i < result.aggregates.size(); ++i) {
                auto cell = to_json(result.aggregates[i]);
                cell["theory"] = to_json(result.plans[i].theory);
                cells.push_back(std::move(cell));
            }
            nlohmann::json records = nlohmann::json::array();
            for (const auto& r : result.records) {
                records.push_back(to_json(r));
            }
            py::dict out;
            out["results_csv"] = csv.str();
            out["cells"] = to_python(cells);
            out["records"] = to_python(records);
            return out;
        },
        py::arg("config"), py::arg("threads") = 0);
}
