#include "sragan/evaluation.hpp"

#include <torch/script.h>

#include <json.hpp>

#include <filesystem>

#include "sragan/trainer.hpp"

namespace sragan {

namespace F = torch::nn::functional;

namespace {

// Snap tiny magnitudes (eigensolver noise) to an exact zero.
constexpr double kFidZeroSnap = 1e-9;
constexpr double kEigenFloor = -1e-6;

torch::Tensor grayscale01(const torch::Tensor& images) {
  auto img01 = to_unit_range(images.to(torch::kFloat64));
  auto w = torch::tensor({0.299, 0.587, 0.114}, img01.options()).view({1, 3, 1, 1});
  return (img01 * w).sum(1, /*keepdim=*/true);
}

torch::Tensor psd_sqrt(const torch::Tensor& sym) {
  auto [evals, evecs] = torch::linalg_eigh(sym);
  require_arg(evals.min().item<double>() >= kEigenFloor,
              "fid: covariance has a significantly negative eigenvalue");
  auto root = torch::sqrt(evals.clamp_min(0.0));
  return evecs.matmul(torch::diag(root)).matmul(evecs.t());
}

}  // namespace

FeatureExtractor FeatureExtractor::toy() {
  return {};
}

FeatureExtractor FeatureExtractor::inception(const std::string& weights_path) {
  if (!std::filesystem::is_regular_file(weights_path))
    throw InitializationError("feature extractor weights file not found: " + weights_path);
  FeatureExtractor fx;
  fx.name_ = "inception";
  try {
    fx.net_ = std::make_shared<torch::jit::Module>(torch::jit::load(weights_path));
  } catch (const c10::Error& e) {
    throw InitializationError("cannot load extractor weights '" + weights_path + "': " + e.what());
  }
  fx.net_->eval();
  for (auto p : fx.net_->parameters()) p.set_requires_grad(false);
  return fx;
}

torch::Tensor FeatureExtractor::extract(const torch::Tensor& images) const {
  require_arg(images.dim() == 4 && images.size(1) == 3,
              "extract: expected (B, 3, H, W) images in [-1, 1]");
  torch::NoGradGuard no_grad;
  if (!net_) {
    auto pooled = torch::adaptive_avg_pool2d(grayscale01(images), {8, 8});
    return pooled.flatten(1);
  }
  auto in = to_unit_range(images.to(torch::kFloat32));
  if (in.size(2) != 299 || in.size(3) != 299) {
    in = F::interpolate(in, F::InterpolateFuncOptions()
                                .size(std::vector<int64_t>{299, 299})
                                .mode(torch::kBilinear)
                                .align_corners(false));
  }
  auto out = net_->forward({in}).toTensor();
  if (out.dim() == 4) out = torch::adaptive_avg_pool2d(out, {1, 1}).flatten(1);
  require_arg(out.dim() == 2, "extract: feature network returned an unexpected shape");
  return out.to(torch::kFloat64);
}

GaussianStats fit_gaussian(const torch::Tensor& features) {
  require_arg(features.dim() == 2, "fit_gaussian: expected an N x D matrix");
  const int64_t n = features.size(0);
  require_arg(n >= 2, "fit_gaussian: need at least 2 samples");
  auto f = features.to(torch::kFloat64);
  auto mu = f.mean(0);
  auto centered = f - mu;
  auto sigma = centered.t().matmul(centered) / static_cast<double>(n - 1);
  sigma = 0.5 * (sigma + sigma.t());
  return {mu, sigma};
}

double fid(const GaussianStats& r, const GaussianStats& g) {
  require_arg(r.mu.sizes() == g.mu.sizes() && r.sigma.sizes() == g.sigma.sizes(),
              "fid: dimensionality mismatch");
  auto diff = (r.mu - g.mu).to(torch::kFloat64);
  const double mean_term = diff.dot(diff).item<double>();

  auto sqrt_r = psd_sqrt(r.sigma.to(torch::kFloat64));
  auto inner = sqrt_r.matmul(g.sigma.to(torch::kFloat64)).matmul(sqrt_r);
  inner = 0.5 * (inner + inner.t());
  auto [evals, evecs] = torch::linalg_eigh(inner);
  require_arg(evals.min().item<double>() >= kEigenFloor,
              "fid: cross-covariance product has a significantly negative eigenvalue");
  const double cross_trace = torch::sqrt(evals.clamp_min(0.0)).sum().item<double>();

  double value = mean_term + r.sigma.diagonal().sum().item<double>() +
                 g.sigma.diagonal().sum().item<double>() - 2.0 * cross_trace;
  require_arg(value >= kEigenFloor, "fid: result below the numerical tolerance");
  if (std::abs(value) < kFidZeroSnap) value = 0.0;
  return std::max(value, 0.0);
}

double saliency_miou(const std::vector<torch::Tensor>& sources,
                     const std::vector<torch::Tensor>& stylized, const SaliencyDetector& det) {
  require_arg(sources.size() == stylized.size(), "saliency_miou: list length mismatch");
  require_arg(!sources.empty(), "saliency_miou: empty input");
  torch::NoGradGuard no_grad;
  double sum = 0;
  int64_t count = 0;
  for (size_t i = 0; i < sources.size(); ++i) {
    require_arg(sources[i].sizes() == stylized[i].sizes(),
                "saliency_miou: batch shape mismatch at index " + std::to_string(i));
    auto m_src = threshold_hard(detect(det, to_unit_range(sources[i])));
    auto m_sty = threshold_hard(detect(det, to_unit_range(stylized[i])));
    auto per_item = iou_hard_per_item(m_src, m_sty);
    sum += per_item.sum().item<double>();
    count += per_item.size(0);
  }
  return sum / static_cast<double>(count);
}

std::string EvalReport::to_json() const {
  nlohmann::json j = {{"fid", fid},
                      {"saliency_miou", saliency_miou},
                      {"n_generated", n_generated},
                      {"n_real", n_real},
                      {"extractor", extractor},
                      {"seed", seed},
                      {"checkpoint_id", checkpoint_id}};
  return j.dump(2);
}

EvalReport evaluate(const std::string& checkpoint_path, const DomainDataset& test_set,
                    const DomainDataset& real_paintings, const RunConfig& cfg, EvalMode mode) {
  RunConfig snapshot;
  auto state = load_checkpoint(checkpoint_path, &snapshot);
  state.g->eval();

  FeatureExtractor extractor = cfg.get_str("eval.extractor") == "inception"
                                   ? FeatureExtractor::inception(cfg.get_str("eval.weights_path"))
                                   : FeatureExtractor::toy();

  torch::NoGradGuard no_grad;
  constexpr int64_t kChunk = 8;
  std::vector<torch::Tensor> sources, stylized;
  for (int64_t begin = 0; begin < test_set.size(); begin += kChunk) {
    std::vector<int64_t> idx;
    for (int64_t i = begin; i < std::min(begin + kChunk, test_set.size()); ++i) idx.push_back(i);
    auto x = test_set.get_batch(idx);
    sources.push_back(x);
    if (mode == EvalMode::kIdentity) {
      stylized.push_back(x);
    } else {
      auto s = detect(state.detector, to_unit_range(x));
      stylized.push_back(state.g->forward(x, s));
    }
  }

  std::vector<torch::Tensor> real_feature_chunks;
  for (int64_t begin = 0; begin < real_paintings.size(); begin += kChunk) {
    std::vector<int64_t> idx;
    for (int64_t i = begin; i < std::min(begin + kChunk, real_paintings.size()); ++i)
      idx.push_back(i);
    real_feature_chunks.push_back(extractor.extract(real_paintings.get_batch(idx)));
  }
  auto real_features = torch::cat(real_feature_chunks, 0);

  torch::Tensor gen_features;
  if (mode == EvalMode::kSelfFid) {
    gen_features = real_features;
  } else {
    std::vector<torch::Tensor> chunks;
    for (const auto& batch : stylized) chunks.push_back(extractor.extract(batch));
    gen_features = torch::cat(chunks, 0);
  }

  EvalReport report;
  report.fid = fid(fit_gaussian(real_features), fit_gaussian(gen_features));
  std::vector<double> per_image;
  {
    double sum = 0;
    for (size_t i = 0; i < sources.size(); ++i) {
      auto m_src = threshold_hard(detect(state.detector, to_unit_range(sources[i])));
      auto m_sty = threshold_hard(detect(state.detector, to_unit_range(stylized[i])));
      auto ious = iou_hard_per_item(m_src, m_sty);
      for (int64_t b = 0; b < ious.size(0); ++b) {
        per_image.push_back(ious[b].item<double>());
        sum += per_image.back();
      }
    }
    report.saliency_miou = sum / static_cast<double>(per_image.size());
  }
  report.per_image_iou = std::move(per_image);
  report.n_generated = test_set.size();
  report.n_real = real_paintings.size();
  report.extractor = extractor.name();
  report.seed = snapshot.get_int("trainer.seed");
  report.checkpoint_id = std::filesystem::path(checkpoint_path).stem().string();
  return report;
}

}  // namespace sragan
