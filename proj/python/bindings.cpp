// Thin pybind11 layer over the pooling kernel. Input arrays are viewed in
// place (no copies); the output map hands its storage to NumPy.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "spreadpool/errors.hpp"
#include "spreadpool/neighbors.hpp"
#include "spreadpool/pool.hpp"
#include "spreadpool/recovery.hpp"

namespace py = pybind11;
namespace sp = spreadpool;

namespace {

class LifecycleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Opaque forward context. Keeps the input arrays alive so backward can read
// them without copying; release() drops everything and is idempotent.
class SavedContext {
 public:
  SavedContext(sp::SavedForBackward saved, sp::WeightParams params, py::array positions, py::array depths,
               py::array features)
      : saved_(std::move(saved)),
        params_(params),
        positions_(std::move(positions)),
        depths_(std::move(depths)),
        features_(std::move(features)) {}

  bool live() const { return saved_.has_value(); }

  void release() {
    saved_.reset();
    positions_ = py::array();
    depths_ = py::array();
    features_ = py::array();
  }

  const sp::SavedForBackward& saved() const {
    if (!saved_) throw LifecycleError("saved context has been released");
    return *saved_;
  }
  const sp::WeightParams& params() const { return params_; }
  const py::array& positions() const { return positions_; }
  const py::array& depths() const { return depths_; }
  const py::array& features() const { return features_; }

 private:
  std::optional<sp::SavedForBackward> saved_;
  sp::WeightParams params_;
  py::array positions_;
  py::array depths_;
  py::array features_;
};

template <typename T>
py::array_t<T> checked_buffer(const py::handle& obj, const char* name, std::initializer_list<py::ssize_t> shape) {
  if (!py::isinstance<py::array>(obj)) throw py::value_error(std::string(name) + ": expected a numpy array");
  auto arr = py::reinterpret_borrow<py::array>(obj);
  if (!arr.dtype().is(py::dtype::of<T>())) {
    throw py::value_error(std::string(name) + ": expected dtype " + std::string(py::str(py::dtype::of<T>())) +
                          ", got " + std::string(py::str(arr.dtype())));
  }
  if (!(arr.flags() & py::array::c_style)) throw py::value_error(std::string(name) + ": must be C-contiguous");
  if (arr.ndim() != static_cast<py::ssize_t>(shape.size())) {
    throw py::value_error(std::string(name) + ": expected " + std::to_string(shape.size()) + " dimensions");
  }
  std::size_t d = 0;
  for (py::ssize_t want : shape) {
    if (want >= 0 && arr.shape(static_cast<py::ssize_t>(d)) != want) {
      throw py::value_error(std::string(name) + ": dimension " + std::to_string(d) + " is " +
                            std::to_string(arr.shape(static_cast<py::ssize_t>(d))) + ", expected " +
                            std::to_string(want));
    }
    ++d;
  }
  return py::array_t<T>(arr);
}

bool overlaps(const py::array& a, const py::array& b) {
  const auto* a0 = static_cast<const char*>(a.data());
  const auto* b0 = static_cast<const char*>(b.data());
  return a.nbytes() > 0 && b.nbytes() > 0 && a0 < b0 + b.nbytes() && b0 < a0 + a.nbytes();
}

template <typename T>
py::array_t<T> adopt(std::vector<T>&& values, std::vector<py::ssize_t> shape) {
  auto* owner = new std::vector<T>(std::move(values));
  py::capsule free_when_done(owner, [](void* p) { delete static_cast<std::vector<T>*>(p); });
  return py::array_t<T>(shape, owner->data(), free_when_done);
}

sp::BevGridSpec make_grid(const py::tuple& grid) {
  if (grid.size() != 5) throw py::value_error("grid: expected (origin_x, origin_y, cell_size, nx, ny)");
  sp::BevGridSpec spec{grid[0].cast<double>(), grid[1].cast<double>(), grid[2].cast<double>(),
                       grid[3].cast<std::int64_t>(), grid[4].cast<std::int64_t>()};
  spec.validate();
  return spec;
}

py::tuple forward(const py::handle& positions_obj, const py::handle& depths_obj, const py::handle& features_obj,
                  const py::tuple& grid, const std::string& kind, std::optional<double> alpha, double sigma_min,
                  double sigma_max, std::size_t k, const std::string& mode, unsigned workers) {
  auto features = checked_buffer<float>(features_obj, "features", {-1, -1});
  const auto n = features.shape(0);
  auto positions = checked_buffer<double>(positions_obj, "positions", {n, 2});
  auto depths = checked_buffer<double>(depths_obj, "depths", {n});
  if (overlaps(positions, depths)) throw py::value_error("positions and depths alias the same memory");

  const sp::BevGridSpec spec = make_grid(grid);
  sp::WeightParams params;
  params.kind = sp::parse_weight_kind(kind);
  if (alpha) params.alpha = *alpha;
  params.sigma_min = sigma_min;
  params.sigma_max = sigma_max;
  const sp::PoolOptions options{k, sp::parse_exec_mode(mode), workers};

  const auto un = static_cast<std::size_t>(n);
  const auto channels = static_cast<std::size_t>(features.shape(1));
  const sp::FrustumBatchView view{un, channels, {positions.data(), 2 * un}, {depths.data(), un},
                                  {features.data(), un * channels}};
  sp::BevFeatureMap map;
  {
    py::gil_scoped_release unlocked;
    map = sp::spread_pool_forward(view, spec, params, options);
  }
  auto bev = adopt(std::move(map.values), {static_cast<py::ssize_t>(map.ny), static_cast<py::ssize_t>(map.nx),
                                           static_cast<py::ssize_t>(map.channels)});
  auto ctx = std::make_shared<SavedContext>(std::move(map.saved), params, positions, depths, features);
  return py::make_tuple(bev, ctx);
}

py::tuple backward(const py::handle& grad_obj, const std::shared_ptr<SavedContext>& ctx, unsigned workers) {
  if (!ctx) throw LifecycleError("no saved context");
  const sp::SavedForBackward& saved = ctx->saved();
  auto grad = checked_buffer<float>(grad_obj, "grad_bev",
                                    {static_cast<py::ssize_t>(saved.spec.ny), static_cast<py::ssize_t>(saved.spec.nx),
                                     static_cast<py::ssize_t>(saved.channels)});
  auto positions = py::array_t<double>(ctx->positions());
  auto depths = py::array_t<double>(ctx->depths());
  auto features = py::array_t<float>(ctx->features());
  const sp::FrustumBatchView view{saved.n, saved.channels, {positions.data(), 2 * saved.n}, {depths.data(), saved.n},
                                  {features.data(), saved.n * saved.channels}};
  sp::PoolGradients g;
  {
    py::gil_scoped_release unlocked;
    g = sp::spread_pool_backward({grad.data(), static_cast<std::size_t>(grad.size())}, saved, view, ctx->params(),
                                 workers);
  }
  const auto n = static_cast<py::ssize_t>(saved.n);
  return py::make_tuple(adopt(std::move(g.grad_features), {n, static_cast<py::ssize_t>(saved.channels)}),
                        g.grad_alpha, adopt(std::move(g.grad_depths), {n}));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spread voxel pooling kernels";

  py::register_exception<LifecycleError>(m, "LifecycleError");
  static py::exception<sp::NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const sp::NumericError& e) {
      py::set_error(numeric_error, e.what());
    } catch (const sp::IoError& e) {
      py::set_error(PyExc_OSError, e.what());
    }
  });

  py::class_<SavedContext, std::shared_ptr<SavedContext>>(m, "SavedContext")
      .def_property_readonly("live", &SavedContext::live)
      .def("_input_addresses", [](const SavedContext& c) {
        // Where the kernel reads its inputs from; lets tests prove no copy was made.
        return py::make_tuple(reinterpret_cast<std::uintptr_t>(c.positions().data()),
                              reinterpret_cast<std::uintptr_t>(c.depths().data()),
                              reinterpret_cast<std::uintptr_t>(c.features().data()));
      });

  m.def("forward", &forward, py::arg("positions"), py::arg("depths"), py::arg("features"), py::kw_only(),
        py::arg("grid"), py::arg("kind") = "gaussian", py::arg("alpha") = py::none(), py::arg("sigma_min") = 1e-3,
        py::arg("sigma_max") = 2.0, py::arg("k") = 1, py::arg("mode") = "deterministic", py::arg("workers") = 1,
        "Spread-pool points into a (ny, nx, C) float32 BEV map. Returns (map, saved_context).");
  m.def("backward", &backward, py::arg("grad_bev"), py::arg("saved"), py::kw_only(), py::arg("workers") = 1,
        "Returns (grad_features, grad_alpha, grad_depths) for a (ny, nx, C) upstream gradient.");
  m.def(
      "select_neighbors",
      [](const py::tuple& grid, std::pair<double, double> p, std::size_t k) {
        py::list out;
        for (const auto& nb : sp::select_neighbors(make_grid(grid), {p.first, p.second}, k)) {
          out.append(py::make_tuple(py::make_tuple(nb.cell.i, nb.cell.j), nb.distance));
        }
        return out;
      },
      py::arg("grid"), py::arg("point"), py::arg("k"), "Top-k nearest cells as [((i, j), distance), ...].");
  m.def("version", [] { return std::string(SPREADPOOL_VERSION); });
  m.def(
      "release", [](const std::shared_ptr<SavedContext>& ctx) { ctx->release(); }, py::arg("saved"),
      "Drop a saved context. Releasing twice is a no-op.");
}
