#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "sragan/cli.hpp"
#include "sragan/config.hpp"
#include "sragan/data.hpp"
#include "sragan/discriminator.hpp"
#include "sragan/evaluation.hpp"
#include "sragan/generator.hpp"
#include "sragan/losses.hpp"
#include "sragan/saliency.hpp"
#include "sragan/synthetic.hpp"
#include "sragan/trainer.hpp"

namespace py = pybind11;
using namespace sragan;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

torch::Tensor tensor_from(const DoubleArray& arr) {
  std::vector<int64_t> shape(arr.ndim());
  for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[static_cast<size_t>(i)] = arr.shape(i);
  auto t = torch::from_blob(const_cast<double*>(arr.data()), shape, torch::kFloat64);
  return t.clone();
}

py::array_t<double> array_from(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat64).contiguous();
  std::vector<py::ssize_t> shape(c.sizes().begin(), c.sizes().end());
  py::array_t<double> out(shape);
  std::memcpy(out.mutable_data(), c.data_ptr<double>(),
              sizeof(double) * static_cast<size_t>(c.numel()));
  return out;
}

std::vector<std::pair<torch::Tensor, torch::Tensor>> pairs_from(
    const std::vector<std::pair<DoubleArray, DoubleArray>>& pairs) {
  std::vector<std::pair<torch::Tensor, torch::Tensor>> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.emplace_back(tensor_from(a), tensor_from(b));
  return out;
}

struct PyGenerator {
  GeneratorNet net{nullptr};

  PyGenerator(int64_t base_channels, int64_t n_bottleneck, const std::string& sn_positions,
              uint64_t seed) {
    torch::manual_seed(seed);
    GeneratorOptions opts;
    opts.base_channels = base_channels;
    opts.n_bottleneck = n_bottleneck;
    opts.sn_positions = GeneratorOptions::parse_sn_positions(sn_positions, n_bottleneck);
    net = GeneratorNet(opts);
    net->to(torch::kFloat64);
  }

  py::array_t<double> forward(const DoubleArray& img, const DoubleArray& saliency) {
    torch::NoGradGuard no_grad;
    return array_from(net->forward(tensor_from(img), tensor_from(saliency)));
  }

  int64_t sanorm_count() const { return net->sanorm_count(); }
};

struct PyDiscriminator {
  SaliencyAttendedDiscriminator net{nullptr};

  explicit PyDiscriminator(uint64_t seed) {
    torch::manual_seed(seed);
    net = SaliencyAttendedDiscriminator();
    net->to(torch::kFloat64);
  }

  py::tuple forward(const DoubleArray& img) {
    torch::NoGradGuard no_grad;
    auto pair = net->forward(tensor_from(img));
    return py::make_tuple(array_from(pair.main), array_from(pair.aux));
  }

  double adv_d(const DoubleArray& real, const DoubleArray& fake, const DoubleArray& s_real,
               const DoubleArray& s_fake, bool saliency_attended) {
    return adv_d_loss(net, tensor_from(real), tensor_from(fake), tensor_from(s_real),
                      tensor_from(s_fake), saliency_attended)
        .item<double>();
  }

  double adv_g(const DoubleArray& fake, const DoubleArray& s_fake, bool saliency_attended) {
    return adv_g_loss(net, tensor_from(fake), tensor_from(s_fake), saliency_attended)
        .item<double>();
  }
};

py::dict report_to_dict(const EvalReport& r) {
  py::dict d;
  d["fid"] = r.fid;
  d["saliency_miou"] = r.saliency_miou;
  d["n_generated"] = r.n_generated;
  d["n_real"] = r.n_real;
  d["extractor"] = r.extractor;
  d["seed"] = r.seed;
  d["checkpoint_id"] = r.checkpoint_id;
  d["per_image_iou"] = r.per_image_iou;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sragan, m) {
  m.doc() = "saliency-regularized unpaired image-to-image stylization (C++ core)";

  py::class_<SaliencyDetector>(m, "SaliencyDetector")
      .def_static("synthetic", &SaliencyDetector::synthetic)
      .def_static("pretrained", &SaliencyDetector::pretrained, py::arg("weights_path"))
      .def("detect",
           [](const SaliencyDetector& det, const DoubleArray& img01) {
             return array_from(det.detect(tensor_from(img01)));
           },
           py::arg("img01"))
      .def("num_parameters",
           [](const SaliencyDetector& det) { return det.parameters().size(); });

  m.def("to_unit_range", [](const DoubleArray& a) { return array_from(to_unit_range(tensor_from(a))); });
  m.def("from_unit_range",
        [](const DoubleArray& a) { return array_from(from_unit_range(tensor_from(a))); });
  m.def("instance_normalize",
        [](const DoubleArray& f, double eps) { return array_from(instance_normalize(tensor_from(f), eps)); },
        py::arg("f"), py::arg("eps") = 1e-5);
  m.def("threshold_hard",
        [](const DoubleArray& s) { return array_from(threshold_hard(tensor_from(s))); });
  m.def("threshold_soft",
        [](const DoubleArray& s, double tau) { return array_from(threshold_soft(tensor_from(s), tau)); },
        py::arg("s"), py::arg("tau"));
  m.def("downsample8", [](const DoubleArray& s) { return array_from(downsample8(tensor_from(s))); });
  m.def("iou_hard",
        [](const DoubleArray& a, const DoubleArray& b) { return iou_hard(tensor_from(a), tensor_from(b)); });
  m.def("iou_soft", [](const DoubleArray& a, const DoubleArray& b) {
    return iou_soft(tensor_from(a), tensor_from(b)).item<double>();
  });
  m.def("masked_mse", [](const DoubleArray& logits, const DoubleArray& target, const DoubleArray& mask) {
    return masked_mse(tensor_from(logits), tensor_from(target), tensor_from(mask)).item<double>();
  });

  m.def("cycle_loss",
        [](const DoubleArray& x, const DoubleArray& xr, const DoubleArray& y, const DoubleArray& yr) {
          return cycle_loss(tensor_from(x), tensor_from(xr), tensor_from(y), tensor_from(yr))
              .item<double>();
        });
  m.def("siou_loss",
        [](const std::vector<std::pair<DoubleArray, DoubleArray>>& pairs, double tau) {
          return siou_loss(pairs_from(pairs), tau).item<double>();
        },
        py::arg("map_pairs"), py::arg("tau") = 0.1);
  m.def("saliency_mse_loss", [](const std::vector<std::pair<DoubleArray, DoubleArray>>& pairs) {
    return saliency_mse_loss(pairs_from(pairs)).item<double>();
  });
  m.def("total_loss",
        [](double adv, double cycle, double siou, double lambda1, double lambda2, double lambda3) {
          return total_loss(adv, cycle, siou, LossWeights{lambda1, lambda2, lambda3});
        },
        py::arg("adv"), py::arg("cycle"), py::arg("siou"), py::arg("lambda1") = 1.0,
        py::arg("lambda2") = 10.0, py::arg("lambda3") = 5.0);

  m.def("lr_schedule",
        [](int64_t epochs, double lr, int64_t decay_start_epoch, int64_t epoch) {
          TrainConfig cfg;
          cfg.epochs = epochs;
          cfg.lr = lr;
          cfg.decay_start_epoch = decay_start_epoch;
          return lr_at(cfg, epoch);
        },
        py::arg("epochs"), py::arg("lr"), py::arg("decay_start_epoch"), py::arg("epoch"));

  m.def("fit_gaussian", [](const DoubleArray& features) {
    auto stats = fit_gaussian(tensor_from(features));
    return py::make_tuple(array_from(stats.mu), array_from(stats.sigma));
  });
  m.def("fid",
        [](const DoubleArray& mu_r, const DoubleArray& sigma_r, const DoubleArray& mu_g,
           const DoubleArray& sigma_g) {
          return fid(GaussianStats{tensor_from(mu_r), tensor_from(sigma_r)},
                     GaussianStats{tensor_from(mu_g), tensor_from(sigma_g)});
        },
        py::arg("mu_r"), py::arg("sigma_r"), py::arg("mu_g"), py::arg("sigma_g"));
  m.def("fid_features", [](const DoubleArray& real, const DoubleArray& generated) {
    return fid(fit_gaussian(tensor_from(real)), fit_gaussian(tensor_from(generated)));
  });
  m.def("saliency_miou",
        [](const std::vector<DoubleArray>& sources, const std::vector<DoubleArray>& stylized,
           const SaliencyDetector& det) {
          std::vector<torch::Tensor> src, sty;
          for (const auto& a : sources) src.push_back(tensor_from(a));
          for (const auto& a : stylized) sty.push_back(tensor_from(a));
          return saliency_miou(src, sty, det);
        },
        py::arg("sources"), py::arg("stylized"), py::arg("detector"));

  py::class_<PyGenerator>(m, "Generator")
      .def(py::init<int64_t, int64_t, const std::string&, uint64_t>(), py::arg("base_channels") = 64,
           py::arg("n_bottleneck") = 9, py::arg("sn_positions") = "alternate", py::arg("seed") = 0)
      .def("forward", &PyGenerator::forward, py::arg("img"), py::arg("saliency"))
      .def("sanorm_count", &PyGenerator::sanorm_count);

  py::class_<PyDiscriminator>(m, "Discriminator")
      .def(py::init<uint64_t>(), py::arg("seed") = 0)
      .def("forward", &PyDiscriminator::forward, py::arg("img"))
      .def("adv_d_loss", &PyDiscriminator::adv_d, py::arg("real"), py::arg("fake"),
           py::arg("s_real"), py::arg("s_fake"), py::arg("saliency_attended") = true)
      .def("adv_g_loss", &PyDiscriminator::adv_g, py::arg("fake"), py::arg("s_fake"),
           py::arg("saliency_attended") = true);

  m.def("make_synthetic_task", &write_synthetic_task, py::arg("root"), py::arg("n_train") = 8,
        py::arg("n_test") = 4, py::arg("size") = 64, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());

  m.def("run_train", &cmd_train, py::arg("config_path"),
        py::arg("overrides") = std::vector<std::string>{}, py::arg("resume") = false,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_infer", &cmd_infer, py::arg("checkpoint"), py::arg("input_path"),
        py::arg("output_path"), py::arg("overrides") = std::vector<std::string>{},
        py::call_guard<py::gil_scoped_release>());
  m.def("run_evaluate",
        [](const std::string& checkpoint, const std::string& test_dir, const std::string& real_dir,
           bool identity, bool self_fid, const std::string& report_path,
           const std::string& iou_csv) {
          EvaluateCliOptions options;
          options.identity = identity;
          options.self_fid = self_fid;
          options.report_path = report_path;
          options.iou_csv = iou_csv;
          return cmd_evaluate(checkpoint, test_dir, real_dir, options);
        },
        py::arg("checkpoint"), py::arg("test_dir"), py::arg("real_dir"),
        py::arg("identity") = false, py::arg("self_fid") = false, py::arg("report_path") = "",
        py::arg("iou_csv") = "", py::call_guard<py::gil_scoped_release>());
  m.def("evaluate_report",
        [](const std::string& checkpoint, const std::string& test_dir, const std::string& real_dir,
           bool identity, bool self_fid) {
          RunConfig snapshot;
          (void)load_checkpoint(checkpoint, &snapshot);
          const int64_t resize = snapshot.get_int("data.resize_to");
          auto test_set = load_dataset(test_dir, resize);
          auto real_set = load_dataset(real_dir, resize);
          EvalMode mode = EvalMode::kStandard;
          if (identity) mode = EvalMode::kIdentity;
          if (self_fid) mode = EvalMode::kSelfFid;
          return report_to_dict(evaluate(checkpoint, test_set, real_set, snapshot, mode));
        },
        py::arg("checkpoint"), py::arg("test_dir"), py::arg("real_dir"),
        py::arg("identity") = false, py::arg("self_fid") = false);

  m.def("config_keys", [] {
    py::list out;
    for (const auto& k : RunConfig::schema())
      out.append(py::make_tuple(k.name, k.type, k.default_value, k.help));
    return out;
  });
}
