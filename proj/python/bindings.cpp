#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "mdf/baselines.hpp"
#include "mdf/denoise.hpp"
#include "mdf/forward_model.hpp"
#include "mdf/image_io.hpp"
#include "mdf/metrics.hpp"
#include "mdf/patch_library.hpp"
#include "mdf/pnp.hpp"
#include "mdf/synthbench.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

mdf::Image to_image(const DoubleArray& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    mdf::Image img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(img.pixels.data(), arr.data(), sizeof(double) * img.size());
    return img;
}

py::array_t<double> to_array(const mdf::Image& img) {
    py::array_t<double> arr({img.height, img.width});
    std::memcpy(arr.mutable_data(), img.pixels.data(), sizeof(double) * img.size());
    return arr;
}

mdf::MeasurementSet sparse_set(const DoubleArray& values, const IndexArray& indices,
                               int width, int height, double sigma_w) {
    if (values.ndim() != 1 || indices.ndim() != 1 || values.shape(0) != indices.shape(0)) {
        throw std::invalid_argument("values and indices must be 1-D arrays of equal length");
    }
    mdf::MeasurementSet m;
    m.y = mdf::Image(static_cast<int>(values.shape(0)), 1);
    std::memcpy(m.y.pixels.data(), values.data(), sizeof(double) * m.y.size());
    mdf::SparseSampleModel model;
    model.mask.width = width;
    model.mask.height = height;
    model.mask.measured.assign(indices.data(), indices.data() + indices.shape(0));
    m.model = std::move(model);
    m.sigma_w = sigma_w;
    m.validate();
    return m;
}

mdf::MeasurementSet sr_set(const DoubleArray& y, int factor, double sigma_w) {
    mdf::MeasurementSet m;
    m.y = to_image(y);
    m.model = mdf::SuperResolutionModel{factor};
    m.sigma_w = sigma_w;
    m.validate();
    return m;
}

py::dict report_dict(const mdf::ReconstructionReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["final_residual"] = r.final_residual;
    d["residual_history"] = r.residual_history;
    d["residual_history_running"] = r.residual_history_running;
    d["non_monotone_residual"] = r.non_monotone_residual;
    d["beta"] = r.beta;
    d["sigma_lambda"] = r.sigma_lambda;
    d["sigma_n"] = r.sigma_n;
    d["sigma_w"] = r.sigma_w;
    d["wall_time_s"] = r.wall_time_s;
    return d;
}

py::tuple run_pnp(const mdf::MeasurementSet& meas, const mdf::PatchLibrary& lib,
                  double beta, std::optional<double> sigma_lambda, int max_iters,
                  double tol, std::optional<DoubleArray> init) {
    mdf::PnPConfig cfg;
    cfg.beta = beta;
    cfg.sigma_lambda = sigma_lambda;
    cfg.max_iters = max_iters;
    cfg.residual_tol = tol;
    mdf::Image start;
    if (init) {
        start = to_image(*init);
    } else if (meas.is_super_resolution()) {
        start = mdf::bicubic_interpolate(meas.y,
                                         std::get<mdf::SuperResolutionModel>(meas.model).factor);
    } else {
        start = mdf::shepard_interpolate(meas);
    }
    auto [img, report] = mdf::pnp_reconstruct(meas, mdf::make_lbnlm_denoiser(lib), cfg, start);
    return py::make_tuple(to_array(img), report_dict(report));
}

}  // namespace

PYBIND11_MODULE(_mdf, m) {
    m.doc() = "Multi-resolution data fusion: plug-and-play reconstruction with a "
              "library-based non-local-means prior";

    py::class_<mdf::PatchLibrary>(m, "PatchLibrary")
        .def_property_readonly("patch_size", [](const mdf::PatchLibrary& l) { return l.patch_size; })
        .def_property_readonly("count", &mdf::PatchLibrary::count)
        .def_property_readonly("centers", [](const mdf::PatchLibrary& l) { return l.centers; })
        .def("__repr__", [](const mdf::PatchLibrary& l) {
            return "<PatchLibrary " + std::to_string(l.count()) + " patches of " +
                   std::to_string(l.patch_size) + "x" + std::to_string(l.patch_size) + ">";
        });

    m.def("block_downsample",
          [](const DoubleArray& x, int factor) { return to_array(mdf::block_downsample(to_image(x), factor)); },
          py::arg("x"), py::arg("factor"));
    m.def("replicate_upsample",
          [](const DoubleArray& y, int factor) { return to_array(mdf::replicate_upsample(to_image(y), factor)); },
          py::arg("y"), py::arg("factor"));
    m.def("sample_sparse",
          [](const DoubleArray& x, double fraction, std::uint64_t seed) {
              const auto m_ = mdf::sample_sparse(to_image(x), fraction, seed);
              const auto& mask = std::get<mdf::SparseSampleModel>(m_.model).mask;
              py::array_t<double> values(static_cast<py::ssize_t>(m_.y.size()));
              std::memcpy(values.mutable_data(), m_.y.pixels.data(), sizeof(double) * m_.y.size());
              py::array_t<std::int64_t> indices(static_cast<py::ssize_t>(mask.measured.size()));
              std::memcpy(indices.mutable_data(), mask.measured.data(),
                          sizeof(std::int64_t) * mask.measured.size());
              return py::make_tuple(values, indices);
          },
          py::arg("x"), py::arg("fraction"), py::arg("seed"));

    m.def("bicubic_interpolate",
          [](const DoubleArray& y, int factor) { return to_array(mdf::bicubic_interpolate(to_image(y), factor)); },
          py::arg("y"), py::arg("factor"));
    m.def("shepard_interpolate",
          [](const DoubleArray& values, const IndexArray& indices, int width, int height) {
              return to_array(mdf::shepard_interpolate(sparse_set(values, indices, width, height, 0.0)));
          },
          py::arg("values"), py::arg("indices"), py::arg("width"), py::arg("height"));

    m.def("build_library",
          [](const std::vector<DoubleArray>& images, int patch_size, int stride,
             std::optional<std::int64_t> max_patches, std::uint64_t seed) {
              std::vector<mdf::Image> imgs;
              imgs.reserve(images.size());
              for (const auto& a : images) imgs.push_back(to_image(a));
              return mdf::build_library(imgs, patch_size, stride, max_patches, seed);
          },
          py::arg("images"), py::arg("patch_size") = 7, py::arg("stride") = 2,
          py::arg("max_patches") = std::optional<std::int64_t>{20000}, py::arg("seed") = 1);
    m.def("load_library", &mdf::load_library, py::arg("path"));
    m.def("save_library", &mdf::save_library, py::arg("library"), py::arg("path"));

    m.def("lbnlm_denoise",
          [](const DoubleArray& v, const mdf::PatchLibrary& lib, double sigma_n) {
              return to_array(mdf::lbnlm_denoise(to_image(v), lib, sigma_n));
          },
          py::arg("v"), py::arg("library"), py::arg("sigma_n"));
    m.def("internal_nlm_denoise",
          [](const DoubleArray& v, double sigma_n, int patch_size, int search_radius,
             bool symmetrize, int sinkhorn_iters) {
              mdf::NlmConfig cfg;
              cfg.sigma_n = sigma_n;
              cfg.patch_size = patch_size;
              cfg.search_radius = search_radius;
              cfg.symmetrize = symmetrize;
              cfg.sinkhorn_iters = sinkhorn_iters;
              return to_array(mdf::internal_nlm_denoise(to_image(v), cfg));
          },
          py::arg("v"), py::arg("sigma_n"), py::arg("patch_size") = 7,
          py::arg("search_radius") = 5, py::arg("symmetrize") = false,
          py::arg("sinkhorn_iters") = 10);

    m.def("sr_inversion",
          [](const DoubleArray& x_tilde, const DoubleArray& y, int factor, double sigma_w,
             double sigma_lambda) {
              return to_array(mdf::sr_inversion(to_image(x_tilde), sr_set(y, factor, sigma_w),
                                                sigma_lambda));
          },
          py::arg("x_tilde"), py::arg("y"), py::arg("factor"), py::arg("sigma_w") = 0.0,
          py::arg("sigma_lambda") = 1.0);
    m.def("sparse_inversion",
          [](const DoubleArray& x_tilde, const DoubleArray& values, const IndexArray& indices,
             double sigma_w, double sigma_lambda) {
              const mdf::Image xt = to_image(x_tilde);
              return to_array(mdf::sparse_inversion(
                  xt, sparse_set(values, indices, xt.width, xt.height, sigma_w), sigma_lambda));
          },
          py::arg("x_tilde"), py::arg("values"), py::arg("indices"), py::arg("sigma_w") = 0.0,
          py::arg("sigma_lambda") = 1.0);

    m.def("estimate_sigma_lambda",
          [](const DoubleArray& baseline) { return mdf::estimate_sigma_lambda(to_image(baseline)); },
          py::arg("baseline"));
    m.def("rmse_percent",
          [](const DoubleArray& a, const DoubleArray& b) {
              return mdf::rmse_percent(to_image(a), to_image(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("acquisition_stats",
          [](std::int64_t n_recon, std::int64_t m_low, std::int64_t m_high) {
              const auto s = mdf::acquisition_stats(n_recon, m_low, m_high);
              return py::make_tuple(s.rho, s.speedup);
          },
          py::arg("n_recon"), py::arg("m_low"), py::arg("m_high"));

    m.def("gen_lattice_scene",
          [](int width, int height, double spot_spacing, double spot_sigma, double amplitude,
             double jitter, double background, std::uint64_t seed) {
              mdf::LatticeSceneConfig cfg{width, height, spot_spacing, spot_sigma,
                                          amplitude, jitter, background, seed};
              return to_array(mdf::gen_lattice_scene(cfg));
          },
          py::arg("width"), py::arg("height"), py::arg("spot_spacing") = 12.0,
          py::arg("spot_sigma") = 2.0, py::arg("amplitude") = 150.0, py::arg("jitter") = 0.0,
          py::arg("background") = 20.0, py::arg("seed") = 0);

    m.def("pnp_reconstruct_sr",
          [](const DoubleArray& y, int factor, const mdf::PatchLibrary& lib, double beta,
             std::optional<double> sigma_lambda, double sigma_w, int max_iters, double tol,
             std::optional<DoubleArray> init) {
              return run_pnp(sr_set(y, factor, sigma_w), lib, beta, sigma_lambda, max_iters,
                             tol, std::move(init));
          },
          py::arg("y"), py::arg("factor"), py::arg("library"), py::arg("beta") = 0.5,
          py::arg("sigma_lambda") = py::none(), py::arg("sigma_w") = 0.0,
          py::arg("max_iters") = 100, py::arg("tol") = 1e-4, py::arg("init") = py::none());
    m.def("pnp_reconstruct_sparse",
          [](const DoubleArray& values, const IndexArray& indices, int width, int height,
             const mdf::PatchLibrary& lib, double beta, std::optional<double> sigma_lambda,
             double sigma_w, int max_iters, double tol, std::optional<DoubleArray> init) {
              return run_pnp(sparse_set(values, indices, width, height, sigma_w), lib, beta,
                             sigma_lambda, max_iters, tol, std::move(init));
          },
          py::arg("values"), py::arg("indices"), py::arg("width"), py::arg("height"),
          py::arg("library"), py::arg("beta") = 0.5, py::arg("sigma_lambda") = py::none(),
          py::arg("sigma_w") = 0.0, py::arg("max_iters") = 100, py::arg("tol") = 1e-4,
          py::arg("init") = py::none());

    m.def("load_image", [](const std::string& path) { return to_array(mdf::load_image(path)); },
          py::arg("path"));
    m.def("save_image",
          [](const DoubleArray& img, const std::string& path) {
              mdf::save_image(to_image(img), path, mdf::ImageFormat::autodetect);
          },
          py::arg("img"), py::arg("path"));
}
