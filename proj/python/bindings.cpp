#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>

#include "xfield/cli.hpp"
#include "xfield/engine.hpp"
#include "xfield/error.hpp"
#include "xfield/eval.hpp"
#include "xfield/externalfield.hpp"
#include "xfield/io.hpp"
#include "xfield/pathsampler.hpp"
#include "xfield/phantom.hpp"
#include "xfield/sequential.hpp"

namespace py = pybind11;
using namespace xfield;

namespace {

// Arrays use C order with x varying fastest, so a lattice with dims
// (nx, ny[, nz]) is an array of shape ([nz,] ny, nx). Spacing follows the
// array axes.

LatticeSpec spec_from(const std::vector<py::ssize_t>& shape, std::optional<std::vector<double>> spacing) {
  std::vector<std::size_t> dims(shape.rbegin(), shape.rend());
  std::vector<double> voxel;
  if (spacing) {
    if (spacing->size() != shape.size()) throw ShapeError("spacing needs one entry per array axis");
    voxel.assign(spacing->rbegin(), spacing->rend());
  }
  return LatticeSpec::make(dims, voxel);
}

std::vector<py::ssize_t> shape_of(const LatticeSpec& spec) {
  return {spec.dims.rbegin(), spec.dims.rend()};
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v, std::vector<py::ssize_t> shape) {
  py::array_t<T> a(shape);
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

template <typename T>
std::vector<py::ssize_t> shape_vec(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  return {a.shape(), a.shape() + a.ndim()};
}

LabelField labels_from(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a, int k) {
  std::vector<std::uint8_t> l(a.data(), a.data() + a.size());
  if (k == 0 && !l.empty()) k = *std::max_element(l.begin(), l.end());
  LabelField z(std::move(l), k);
  z.validate(z.size());
  return z;
}

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

struct PyField {
  FieldPrior field;
  LatticeSpec spec;
};

struct PyChain {
  ChainResult result;
  LatticeSpec spec;
};

NoisePriors priors_from(std::optional<std::vector<py::dict>> comps) {
  if (!comps) return NoisePriors::ed_phantom();
  NoisePriors p;
  for (const auto& d : *comps)
    p.components.push_back({d.contains("name") ? d["name"].cast<std::string>() : std::string{}, d["m"].cast<double>(),
                            d["phi2"].cast<double>(), d["nu"].cast<double>(), d["s2"].cast<double>()});
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hidden Potts segmentation with an external field prior";

  py::register_exception<Error>(m, "Error");

  py::class_<PathTable>(m, "PathTable")
      .def_property_readonly("beta", [](const PathTable& t) { return to_array(t.beta_grid, {py::ssize_t(t.beta_grid.size())}); })
      .def_property_readonly("expected_stat",
                             [](const PathTable& t) { return to_array(t.expected_stat, {py::ssize_t(t.expected_stat.size())}); })
      .def("interpolate", &PathTable::interpolate)
      .def("log_ratio", [](const PathTable& t, double a, double b) { return log_ratio_normalising(t, a, b); },
           "log C(a) - log C(b)")
      .def("save", [](const PathTable& t, const std::string& path) { io::write_path_table(path, t); })
      .def_static("load", [](const std::string& path) { return io::read_path_table(path); });

  py::class_<PyField>(m, "FieldPrior")
      .def_property_readonly("k", [](const PyField& f) { return f.field.k; })
      .def_property_readonly("mode", [](const PyField& f) { return to_string(f.field.mode); })
      .def_property_readonly("log_density", [](const PyField& f) {
        auto shape = shape_of(f.spec);
        shape.insert(shape.begin(), f.field.k);
        return to_array(f.field.log_density, shape);
      }, "Array of shape (k, *image_shape); plane j - 1 holds label j")
      .def("argmax", [](const PyField& f) { return to_array(field_argmax(f.field).labels, shape_of(f.spec)); })
      .def("save", [](const PyField& f, const std::string& path) { io::write_field_prior(path, f.spec, f.field); })
      .def_static("load", [](const std::string& path) {
        auto [spec, field] = io::read_field_prior(path);
        return PyField{std::move(field), std::move(spec)};
      });

  py::class_<PyChain>(m, "ChainResult")
      .def_property_readonly("modal", [](const PyChain& c) { return to_array(c.result.modal.labels, shape_of(c.spec)); })
      .def_property_readonly("beta_trace",
                             [](const PyChain& c) { return to_array(c.result.beta_trace, {py::ssize_t(c.result.beta_trace.size())}); })
      .def_property_readonly("stat_trace", [](const PyChain& c) {
        std::vector<double> s(c.result.stat_trace.begin(), c.result.stat_trace.end());
        return to_array(s, {py::ssize_t(s.size())});
      })
      .def_property_readonly("mu_trace", [](const PyChain& c) {
        return to_array(c.result.mu_trace, {py::ssize_t(c.result.beta_trace.size()), c.result.k});
      })
      .def_property_readonly("sigma2_trace", [](const PyChain& c) {
        return to_array(c.result.sigma2_trace, {py::ssize_t(c.result.beta_trace.size()), c.result.k});
      })
      .def_property_readonly("counts", [](const PyChain& c) {
        auto shape = shape_of(c.spec);
        shape.insert(shape.begin(), c.result.k);
        return to_array(c.result.counts, shape);
      })
      .def_property_readonly("retained", [](const PyChain& c) { return c.result.retained; })
      .def_property_readonly("posterior_mean_beta", [](const PyChain& c) { return c.result.posterior_mean_beta(); })
      .def("save", [](const PyChain& c, const std::string& dir, std::optional<std::vector<std::string>> names) {
        std::vector<std::string> n;
        if (names) n = *names;
        else
          for (int j = 1; j <= c.result.k; ++j) n.push_back(std::to_string(j));
        io::write_chain_result(dir, c.spec, c.result, n);
      }, py::arg("directory"), py::arg("names") = py::none());

  m.def("phantom", [](double rotation, double bias_amplitude, std::uint64_t seed) {
    auto spec = PhantomSpec::ed_default();
    spec.inner_rotation_deg = rotation;
    spec.bias_amplitude = bias_amplitude;
    spec.seed = seed;
    auto reference_spec = spec;
    reference_spec.inner_rotation_deg = 0.0;
    const auto truth = generate_truth(spec);
    Rng rng = make_stream(seed, {0x504E});
    const auto image = render_image(truth, spec, rng);
    const auto shape = shape_of(spec.lattice);
    py::dict d;
    d["truth"] = to_array(truth.labels, shape);
    d["reference"] = to_array(generate_truth(reference_spec).labels, shape);
    d["image"] = to_array(image.values, shape);
    return d;
  }, py::arg("rotation") = 0.0, py::arg("bias_amplitude") = 0.0, py::arg("seed") = 1,
        "Default nine-class phantom; returns truth, undisplaced reference and noisy image arrays");

  m.def("calibrate", [](std::vector<py::ssize_t> shape, int k, double grid_max, double grid_step, std::size_t sweeps,
                        std::size_t burnin, std::uint64_t seed, int workers, std::optional<std::vector<double>> spacing) {
    const auto spec = spec_from(shape, spacing);
    py::gil_scoped_release release;
    return calibrate(spec, k, make_beta_grid(grid_max, grid_step), sweeps, burnin, seed, workers);
  }, py::arg("shape"), py::arg("k"), py::arg("grid_max") = 2.0, py::arg("grid_step") = 0.05, py::arg("sweeps") = 1000,
        py::arg("burnin") = 200, py::arg("seed") = 1, py::arg("workers") = 1, py::arg("spacing") = py::none());

  m.def("distance_transform", [](const U8Array& labels, int j, std::optional<std::vector<double>> spacing) {
    const auto spec = spec_from(shape_vec(labels), spacing);
    return to_array(distance_transform(labels_from(labels, 0), spec, j).distance, shape_vec(labels));
  }, py::arg("labels"), py::arg("label"), py::arg("spacing") = py::none(),
        "Euclidean distance in mm from every site to the nearest site carrying the label");

  m.def("build_field_prior", [](const U8Array& reference, double mu_delta, double sigma_delta, std::string mode,
                                bool allow_empty, int workers, std::optional<std::vector<double>> spacing) {
    const auto spec = spec_from(shape_vec(reference), spacing);
    const auto z = labels_from(reference, 0);
    DeltaHyper h;
    h.global = {mu_delta, sigma_delta * sigma_delta};
    const FieldMode fm = mode.empty() ? default_field_mode(z.size(), z.k) : parse_field_mode(mode);
    py::gil_scoped_release release;
    return PyField{build_field_prior(z, spec, h, fm, {allow_empty, workers}), spec};
  }, py::arg("reference"), py::arg("mu_delta") = 1.2, py::arg("sigma_delta") = 7.3, py::arg("mode") = "",
        py::arg("allow_empty") = false, py::arg("workers") = 1, py::arg("spacing") = py::none());

  m.def("segment", [](const F64Array& image, std::optional<PathTable> table, const PyField* field,
                      std::optional<std::vector<py::dict>> priors, std::optional<double> fixed_beta,
                      std::size_t iterations, std::size_t burnin, std::size_t thin, std::uint64_t seed, int workers,
                      std::optional<U8Array> truth, std::optional<std::vector<double>> spacing) {
    const auto spec = spec_from(shape_vec(image), spacing);
    ImageVolume y{spec, std::vector<double>(image.data(), image.data() + image.size())};
    const NoisePriors p = priors_from(priors);
    std::optional<LabelField> t;
    if (truth) t = labels_from(*truth, p.k());
    ChainConfig c;
    c.iterations = iterations;
    c.burnin = burnin;
    c.thin = thin;
    c.seed = seed;
    c.workers = workers;
    c.use_field = field != nullptr;
    if (fixed_beta) {
      c.beta_mode = BetaMode::Fixed;
      c.beta_fixed = *fixed_beta;
    }
    const FieldPrior* f = field ? &field->field : nullptr;
    const PathTable* tp = table ? &*table : nullptr;
    py::gil_scoped_release release;
    return PyChain{run_chain(y, c, p, f, tp, t ? &*t : nullptr), spec};
  }, py::arg("image"), py::arg("table") = py::none(), py::arg("field") = nullptr, py::arg("priors") = py::none(),
        py::arg("fixed_beta") = py::none(), py::arg("iterations") = 5500, py::arg("burnin") = 500,
        py::arg("thin") = 1, py::arg("seed") = 1, py::arg("workers") = 1, py::arg("truth") = py::none(),
        py::arg("spacing") = py::none(),
        "Run the MCMC sampler. Priors are dicts with keys name, m, phi2, nu, s2; default is the nine-tissue set.");

  m.def("update_delta", [](const std::vector<const PyChain*>& chains, const U8Array& reference,
                           std::optional<std::vector<py::dict>> prior, bool bias_correction) {
    if (chains.empty()) throw InvalidConfig("need at least one chain");
    const auto& spec = chains.front()->spec;
    const auto z = labels_from(reference, chains.front()->result.k);
    DeltaPriorState state;
    if (prior) {
      for (const auto& d : *prior)
        state.per_label.push_back({d["n"].cast<double>(), d["mu"].cast<double>(), d["sigma2"].cast<double>()});
    } else {
      state.per_label.assign(static_cast<std::size_t>(z.k), DeltaPrior{});
    }
    std::vector<DistanceField> dists(static_cast<std::size_t>(z.k));
    const auto present = z.counts();
    for (int j = 1; j <= z.k; ++j)
      if (present[static_cast<std::size_t>(j)] > 0) dists[static_cast<std::size_t>(j - 1)] = distance_transform(z, spec, j);
    std::optional<DeltaSufficientStats> pooled;
    for (const auto* c : chains) {
      auto s = delta_sufficient_stats(posterior_weights(c->result), dists);
      if (!pooled) {
        pooled = std::move(s);
        continue;
      }
      for (std::size_t j = 0; j < s.per_label.size(); ++j) pooled->per_label[j] = pool_stats(pooled->per_label[j], s.per_label[j]);
    }
    if (bias_correction) {
      std::vector<double> offset(static_cast<std::size_t>(z.k), 0.0);
      for (int j = 1; j <= z.k; ++j)
        if (present[static_cast<std::size_t>(j)] > 0) offset[static_cast<std::size_t>(j - 1)] = intra_object_mean_distance(z, spec, j);
      *pooled = add_distance_offset(*pooled, offset);
    }
    const auto updated = update_delta_hyperparams(state, *pooled);
    py::list out;
    for (std::size_t j = 0; j < updated.per_label.size(); ++j) {
      py::dict d;
      d["label"] = j + 1;
      d["n"] = updated.per_label[j].n_prior;
      d["mu"] = updated.per_label[j].mu_prior;
      d["sigma2"] = updated.per_label[j].sigma2_prior;
      out.append(d);
    }
    return out;
  }, py::arg("chains"), py::arg("reference"), py::arg("prior") = py::none(), py::arg("bias_correction") = false,
        "Conjugate displacement update pooled over chains; returns one dict per label");

  m.def("score", [](const U8Array& predicted, const U8Array& truth) {
    const auto t = labels_from(truth, 0);
    const auto r = score(labels_from(predicted, t.k), t);
    py::dict d;
    d["dice"] = r.dice;
    d["misclassification"] = r.misclassification;
    d["confusion"] = to_array(r.confusion, {r.k, r.k});
    return d;
  }, py::arg("predicted"), py::arg("truth"));

  m.def("spearman", [](std::vector<double> x, std::vector<double> y) { return spearman(x, y); });

  m.def("hpd_interval", [](std::vector<double> samples, double level) { return hpd_interval(samples, level); },
        py::arg("samples"), py::arg("level") = 0.95);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    py::gil_scoped_release release;
    return run_cli(args);
  }, py::arg("args"), "Run the command-line tool in-process; returns its exit code");
}
