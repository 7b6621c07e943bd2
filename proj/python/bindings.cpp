// Python bindings over the core library. Arrays go in and out as numpy.

#include "dmpj/experiment.hpp"
#include "dmpj/filtering.hpp"
#include "dmpj/graph.hpp"
#include "dmpj/io.hpp"
#include "dmpj/metrics.hpp"
#include "dmpj/transforms.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dmpj;

namespace {

GsoKind gso_of(const std::string& name) {
  const auto k = parse_gso_kind(name);
  require(k.has_value(), ErrorCode::InvalidArgument, "unknown gso '" + name + "'");
  return *k;
}

TransformType type_of(const std::string& name) {
  require(name == "I" || name == "II", ErrorCode::InvalidArgument, "transform type must be 'I' or 'II'");
  return name == "I" ? TransformType::I : TransformType::II;
}

OrderParams params_of(const RMatrix& graph_orders, const RVector& time_orders, const std::string& g_type,
                      const std::string& d_type) {
  OrderParams p;
  p.graph_orders = graph_orders;
  p.time_orders = time_orders;
  p.g_type = type_of(g_type);
  p.d_type = type_of(d_type);
  p.validate();
  return p;
}

// json crosses the boundary as text so Python sees plain dicts
py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_python(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamic multiple-parameter joint time-vertex fractional Fourier transforms";

  // args are (message, code name), e.g. ("IllConditioned: ...", "IllConditioned")
  static PyObject* dmpj_error = py::exception<Error>(m, "DmpjError", PyExc_ValueError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(dmpj_error, py::make_tuple(e.what(), std::string(to_string(e.code()))).ptr());
    }
  });

  m.def("build_gso", [](const RMatrix& adjacency, const std::string& kind) {
    return build_gso(Graph(adjacency), gso_of(kind));
  }, py::arg("adjacency"), py::arg("kind") = "laplacian");
  m.def("knn_graph", [](const RMatrix& points, int k) { return knn_graph(points, k).adjacency(); },
        py::arg("points"), py::arg("k"));
  m.def("dft_matrix", &dft_matrix, py::arg("steps"));

  py::class_<TransformBases>(m, "TransformBases")
      .def(py::init([](const RMatrix& adjacency, const std::string& gso, int steps) {
             return TransformBases(graph_spectrum(Graph(adjacency), gso_of(gso)), steps);
           }),
           py::arg("adjacency"), py::arg("gso") = "laplacian", py::arg("steps"))
      .def_property_readonly("n", &TransformBases::n)
      .def_property_readonly("t", &TransformBases::t)
      .def_property_readonly("gft", [](const TransformBases& b) { return b.graph().gft; })
      .def_property_readonly("gft_eigenvalues", [](const TransformBases& b) { return b.graph().basis.values; });

  m.def("jfrft", [](const CMatrix& x, const TransformBases& b, double alpha, double beta) {
    return jfrft_apply(x, b.graph().basis, b.time(), alpha, beta);
  }, py::arg("x"), py::arg("bases"), py::arg("alpha"), py::arg("beta"));

  m.def("dmpjfrft", [](const CMatrix& x, const TransformBases& b, const RMatrix& graph_orders,
                       const RVector& time_orders, const std::string& g_type, const std::string& d_type,
                       bool inverse) {
    const OrderParams p = params_of(graph_orders, time_orders, g_type, d_type);
    return inverse ? dmpjfrft_inverse_operator(p, b).apply(x) : dmpjfrft_operator(p, b).apply(x);
  }, py::arg("x"), py::arg("bases"), py::arg("graph_orders"), py::arg("time_orders"), py::arg("g_type") = "I",
     py::arg("d_type") = "I", py::arg("inverse") = false);

  m.def("dmpjfrft_matrix", [](const TransformBases& b, const RMatrix& graph_orders, const RVector& time_orders,
                              const std::string& g_type, const std::string& d_type) {
    return dmpjfrft_operator(params_of(graph_orders, time_orders, g_type, d_type), b).dense();
  }, py::arg("bases"), py::arg("graph_orders"), py::arg("time_orders"), py::arg("g_type") = "I",
     py::arg("d_type") = "I");

  m.def("degrade_noise", [](const CMatrix& x, double sigma, std::uint64_t seed) {
    return degrade(x, Degradation::noise(sigma), seed);
  }, py::arg("x"), py::arg("sigma"), py::arg("seed") = 0);

  m.def("gd_filter", [](const CMatrix& y, const CMatrix& x, const TransformBases& b, double gamma, int epochs,
                        double init_order, const std::string& g_type, const std::string& d_type, bool tied) {
    OptimizerConfig cfg;
    cfg.gamma = gamma;
    cfg.epochs = epochs;
    cfg.init_order = init_order;
    const GdResult r = gd_filter(y, x, cfg, b, {type_of(g_type), type_of(d_type), tied});
    py::dict out;
    out["loss_trace"] = r.loss_trace;
    out["graph_orders"] = r.model.params.graph_orders;
    out["time_orders"] = r.model.params.time_orders;
    out["h"] = r.model.h_diag;
    out["restored"] = reconstruct(y, r.model, b);
    return out;
  }, py::arg("y"), py::arg("x"), py::arg("bases"), py::arg("gamma") = 0.01, py::arg("epochs") = 1000,
     py::arg("init_order") = 0.5, py::arg("g_type") = "I", py::arg("d_type") = "I", py::arg("tied") = false);

  m.def("snr_db", &snr_db, py::arg("reference"), py::arg("estimate"));
  m.def("psnr_db", &psnr_db, py::arg("reference"), py::arg("estimate"));
  m.def("ssim", &ssim, py::arg("reference"), py::arg("estimate"));
  m.def("mse", py::overload_cast<const CMatrix&, const CMatrix&>(&mse), py::arg("a"), py::arg("b"));

  m.def("gen_synthetic", [](int n, int t, const std::string& kind, std::uint64_t seed) {
    const auto k = parse_synthetic_kind(kind);
    require(k.has_value(), ErrorCode::InvalidArgument, "unknown synthetic kind '" + kind + "'");
    const SyntheticData d = gen_synthetic(n, t, *k, seed);
    return py::make_tuple(d.signal, d.graph.adjacency());
  }, py::arg("n"), py::arg("t"), py::arg("kind") = "smooth_graph", py::arg("seed") = 0);

  m.def("run_experiment", [](const py::dict& config) {
    return to_python(to_json(run_experiment(experiment_config_from_json(from_python(config)))));
  }, py::arg("config"));
}
