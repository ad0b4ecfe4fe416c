#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "dqdetect/datasets.hpp"
#include "dqdetect/features.hpp"
#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/localization.hpp"
#include "dqdetect/metrics.hpp"
#include "dqdetect/nn/checkpoint.hpp"
#include "dqdetect/qmatrix.hpp"
#include "dqdetect/synthesis.hpp"
#include "dqdetect/training.hpp"

namespace py = pybind11;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

dqd::JpegStream toStream(const py::bytes& data) {
  const std::string s = data;
  return dqd::JpegStream{{s.begin(), s.end()}};
}

py::bytes toBytes(const dqd::JpegStream& s) {
  return py::bytes(reinterpret_cast<const char*>(s.bytes.data()), s.bytes.size());
}

dqd::PixelPatch toPatch(const U8Array& pixels) {
  if (pixels.ndim() != 2) throw std::invalid_argument("expected a 2-D uint8 array");
  const int h = static_cast<int>(pixels.shape(0)), w = static_cast<int>(pixels.shape(1));
  return dqd::PixelPatch(w, h, std::vector<std::uint8_t>(pixels.data(), pixels.data() + pixels.size()));
}

U8Array toArray(const dqd::PixelPatch& p) {
  U8Array out({p.height, p.width});
  std::memcpy(out.mutable_data(), p.samples.data(), p.samples.size());
  return out;
}

dqd::QMatrix toQ(const std::vector<int>& steps) {
  if (steps.size() != 64) throw std::invalid_argument("a Q-matrix needs 64 steps");
  return dqd::QMatrix(steps);
}

py::object jsonToPy(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<std::int32_t> coefficients(const py::bytes& data) {
  const dqd::QuantizedBlockGrid g = dqd::decodeCoefficients(toStream(data));
  py::array_t<std::int32_t> out({g.blocksY, g.blocksX, 8, 8});
  std::memcpy(out.mutable_data(), g.blocks.data(), g.blocks.size() * sizeof(dqd::CoefficientBlock));
  return out;
}

py::array_t<std::int32_t> feature(const py::bytes& data, int b, bool withQ) {
  dqd::FeatureOptions opt;
  opt.b = b;
  opt.withQFactors = withQ;
  const dqd::FeatureTensor f = dqd::buildFeature(dqd::decodeCoefficients(toStream(data)), opt);
  py::array_t<std::int32_t> out({f.rows, f.cols, f.channels});
  std::memcpy(out.mutable_data(), f.values.data(), f.values.size() * sizeof(std::int32_t));
  return out;
}

py::dict forgery(int size, const std::string& kind, const std::string& pool, const std::string& firstPool,
                 std::uint64_t seed, int region, bool aligned) {
  dqd::Rng rng(seed);
  const dqd::PixelPatch src = dqd::proceduralImage(size, size, rng);
  dqd::ForgeryOptions opt;
  opt.regionSize = region;
  opt.alignedRegion = aligned;
  const dqd::QMatrixPool second = dqd::resolvePool(pool, seed);
  const dqd::QMatrixPool first = firstPool.empty() ? second : dqd::resolvePool(firstPool, seed);
  if (kind != "copymove" && kind != "blur") throw std::invalid_argument("kind must be copymove or blur");
  const dqd::ForgeryCase fc = dqd::makeForgery(
      src, kind == "blur" ? dqd::Manipulation::Blur : dqd::Manipulation::CopyMove, first, second, rng, opt);
  U8Array mask({fc.maskBlocksY, fc.maskBlocksX});
  std::memcpy(mask.mutable_data(), fc.mask.data(), fc.mask.size());
  py::dict d;
  d["forged"] = toBytes(fc.forged);
  d["mask"] = mask;
  d["provenance"] = jsonToPy(fc.provenance());
  return d;
}

py::dict metrics(const std::vector<int>& labels, const std::vector<int>& preds) {
  return jsonToPy(dqd::metricsJson(dqd::confusion(labels, preds)));
}

class PyClassifier {
 public:
  explicit PyClassifier(const std::string& path) : ck_(dqd::nn::loadCheckpoint(std::filesystem::path(path))) {
    if (ck_.metadata.contains("features")) {
      features_ = dqd::FeatureOptions::fromJson(ck_.metadata.at("features"));
    } else {
      features_.b = (ck_.model.config().inputCols - 1) / 2;
      features_.withQFactors = ck_.model.config().inputChannels == 2;
    }
  }

  double probability(const py::bytes& data) {
    const dqd::QuantizedBlockGrid g = dqd::decodeCoefficients(toStream(data));
    dqd::NetworkClassifier c(ck_.model, features_);
    return c.probabilityDouble(std::span(&g, 1)).front();
  }

  py::dict localize(const py::bytes& data, int stride, int window) {
    dqd::NetworkClassifier c(ck_.model, features_);
    const dqd::TamperMap m = dqd::localize(toStream(data), c, stride, window);
    py::array_t<double> perWindow({m.ys.size(), m.xs.size()});
    std::memcpy(perWindow.mutable_data(), m.perWindow.data(), m.perWindow.size() * sizeof(double));
    py::array_t<double> perPixel({m.height, m.width});
    std::memcpy(perPixel.mutable_data(), m.perPixel.data(), m.perPixel.size() * sizeof(double));
    py::dict d;
    d["xs"] = m.xs;
    d["ys"] = m.ys;
    d["p_double"] = perWindow;
    d["per_pixel"] = perPixel;
    return d;
  }

  py::dict features() const { return jsonToPy(features_.toJson()); }

 private:
  dqd::nn::LoadedCheckpoint ck_;
  dqd::FeatureOptions features_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "JPEG double-compression detection core";

  py::register_exception<dqd::JpegError>(m, "JpegError", PyExc_ValueError);
  py::register_exception<dqd::PoolError>(m, "PoolError", PyExc_ValueError);
  py::register_exception<dqd::nn::CheckpointError>(m, "CheckpointError", PyExc_ValueError);

  m.attr("__version__") = dqd::kVersion;

  m.def("standard_qmatrix", [](int qf) { return dqd::standardQMatrix(qf).toVector(); }, py::arg("quality"),
        "IJG-scaled luminance table as 64 steps in (u, v) row-major order");
  m.def("encode", [](const U8Array& px, const std::vector<int>& q) { return toBytes(dqd::encode(toPatch(px), toQ(q))); },
        py::arg("pixels"), py::arg("qmatrix"), "Baseline grayscale JPEG bytes");
  m.def("recompress", [](const py::bytes& data, const std::vector<int>& q) {
        return toBytes(dqd::recompress(toStream(data), toQ(q)));
      }, py::arg("jpeg"), py::arg("qmatrix"));
  m.def("decode_pixels", [](const py::bytes& data) { return toArray(dqd::decodePixels(toStream(data))); },
        py::arg("jpeg"));
  m.def("decode_coefficients", &coefficients, py::arg("jpeg"),
        "Quantized DCT coefficients shaped (blocks_y, blocks_x, 8, 8)");
  m.def("qmatrix", [](const py::bytes& data) { return dqd::inspect(toStream(data)).qmatrix.toVector(); },
        py::arg("jpeg"), "Quantization table of a stream in (u, v) row-major order");
  m.def("build_feature", &feature, py::arg("jpeg"), py::arg("b") = 100, py::arg("with_q_factors") = true,
        "Histogram feature tensor shaped (64, 2b+1, channels)");
  m.def("procedural_image", [](int w, int h, std::uint64_t seed) {
        dqd::Rng rng(seed);
        return toArray(dqd::proceduralImage(w, h, rng));
      }, py::arg("width"), py::arg("height"), py::arg("seed") = 0);
  m.def("pool", [](const std::string& spec, std::uint64_t seed) { return jsonToPy(nlohmann::json::parse(dqd::resolvePool(spec, seed).toJson())); },
        py::arg("spec") = "default", py::arg("seed") = 0);
  m.def("make_forgery", &forgery, py::arg("size") = 1024, py::arg("kind") = "copymove",
        py::arg("pool") = "default", py::arg("first_pool") = "", py::arg("seed") = 0, py::arg("region") = 544,
        py::arg("aligned") = true);
  m.def("metrics", &metrics, py::arg("labels"), py::arg("predictions"),
        "Confusion counts, rates and derived scores; positive class = 1");

  py::class_<PyClassifier>(m, "Classifier")
      .def(py::init<const std::string&>(), py::arg("checkpoint"))
      .def("probability_double", &PyClassifier::probability, py::arg("jpeg"))
      .def("localize", &PyClassifier::localize, py::arg("jpeg"), py::arg("stride") = 32, py::arg("window") = 256)
      .def_property_readonly("features", &PyClassifier::features);
}
