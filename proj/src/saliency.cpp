#include "sragan/saliency.hpp"

#include <torch/script.h>

#include <filesystem>

namespace sragan {

namespace F = torch::nn::functional;

namespace {

torch::Tensor synthetic_map(const torch::Tensor& img01) {
  require_arg(img01.dim() == 4 && img01.size(1) == 3,
              "detect: expected (B, 3, H, W) input in [0, 1]");
  auto w = torch::tensor({0.299, 0.587, 0.114}, img01.options()).view({1, 3, 1, 1});
  auto lum = (img01 * w).sum(1, /*keepdim=*/true);
  auto d = lum - lum.mean({2, 3}, /*keepdim=*/true);
  auto dmin = d.amin({2, 3}, /*keepdim=*/true);
  auto dmax = d.amax({2, 3}, /*keepdim=*/true);
  auto s = (d - dmin) / (dmax - dmin + 1e-8);
  // 3x3 box smoothing with replicate borders keeps values in [0, 1].
  auto padded = F::pad(s, F::PadFuncOptions({1, 1, 1, 1}).mode(torch::kReplicate));
  auto kernel = torch::full({1, 1, 3, 3}, 1.0 / 9.0, s.options());
  return F::conv2d(padded, kernel);
}

}  // namespace

SaliencyDetector SaliencyDetector::synthetic() {
  SaliencyDetector det;
  det.backend_ = SaliencyBackend::kSynthetic;
  return det;
}

SaliencyDetector SaliencyDetector::pretrained(const std::string& weights_path) {
  if (!std::filesystem::is_regular_file(weights_path))
    throw InitializationError("saliency weights file not found: " + weights_path);
  SaliencyDetector det;
  det.backend_ = SaliencyBackend::kPretrained;
  try {
    det.net_ = std::make_shared<torch::jit::Module>(torch::jit::load(weights_path));
  } catch (const c10::Error& e) {
    throw InitializationError("cannot load saliency weights '" + weights_path + "': " + e.what());
  }
  det.net_->eval();
  for (auto p : det.net_->parameters()) p.set_requires_grad(false);
  return det;
}

torch::Tensor SaliencyDetector::detect(const torch::Tensor& img01) const {
  if (backend_ == SaliencyBackend::kSynthetic) return synthetic_map(img01);

  require_arg(img01.dim() == 4 && img01.size(1) == 3,
              "detect: expected (B, 3, H, W) input in [0, 1]");
  auto out = net_->forward({img01}).toTensor();
  if (out.dim() == 3) out = out.unsqueeze(1);
  require_arg(out.dim() == 4, "pretrained saliency model returned a non-4D tensor");
  if (out.size(1) > 1) out = out.narrow(1, 0, 1);
  if (out.size(2) != img01.size(2) || out.size(3) != img01.size(3)) {
    out = F::interpolate(out, F::InterpolateFuncOptions()
                                  .size(std::vector<int64_t>{img01.size(2), img01.size(3)})
                                  .mode(torch::kBilinear)
                                  .align_corners(false));
  }
  return out.clamp(0.0, 1.0);
}

std::vector<torch::Tensor> SaliencyDetector::parameters() const {
  std::vector<torch::Tensor> out;
  if (net_) {
    for (auto p : net_->parameters()) out.push_back(p);
  }
  return out;
}

torch::Tensor threshold_hard(const torch::Tensor& s) {
  return (s >= 0.5).to(s.scalar_type());
}

torch::Tensor threshold_soft(const torch::Tensor& s, double tau) {
  require_arg(tau > 0.0, "threshold_soft: tau must be positive");
  return torch::sigmoid((s - 0.5) / tau);
}

torch::Tensor downsample8(const torch::Tensor& s) {
  require_arg(s.dim() == 4, "downsample8: expected a rank-4 map");
  require_arg(s.size(2) % 8 == 0 && s.size(3) % 8 == 0,
              "downsample8: spatial dims must be divisible by 8");
  return F::interpolate(s, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{s.size(2) / 8, s.size(3) / 8})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

torch::Tensor iou_hard_per_item(const torch::Tensor& a, const torch::Tensor& b) {
  require_arg(a.sizes() == b.sizes(), "iou_hard: shape mismatch");
  require_arg(a.dim() >= 1, "iou_hard: expected batched masks");
  auto is_binary = [](const torch::Tensor& t) {
    return ((t == 0) | (t == 1)).all().item<bool>();
  };
  require_arg(is_binary(a) && is_binary(b), "iou_hard: masks must be binary");

  auto ad = a.detach().to(torch::kFloat64).flatten(1);
  auto bd = b.detach().to(torch::kFloat64).flatten(1);
  auto inter = (ad * bd).sum(1);
  auto uni = ad.sum(1) + bd.sum(1) - inter;
  // Two empty masks describe the same (absent) object.
  return torch::where(uni < kMaskEps, torch::ones_like(inter), inter / uni.clamp_min(kMaskEps));
}

double iou_hard(const torch::Tensor& a, const torch::Tensor& b) {
  return iou_hard_per_item(a, b).mean().item<double>();
}

torch::Tensor iou_soft(const torch::Tensor& a, const torch::Tensor& b) {
  require_arg(a.sizes() == b.sizes(), "iou_soft: shape mismatch");
  require_arg(a.dim() >= 2, "iou_soft: expected batched masks");
  auto af = a.flatten(1);
  auto bf = b.flatten(1);
  auto inter = (af * bf).sum(1);
  auto uni = af.sum(1) + bf.sum(1) - inter;
  return (inter / (uni + kMaskEps)).mean();
}

torch::Tensor masked_mse(const torch::Tensor& logits, const torch::Tensor& target,
                         const torch::Tensor& mask) {
  require_arg(logits.sizes() == target.sizes() && logits.sizes() == mask.sizes(),
              "masked_mse: shape mismatch");
  require_arg(!mask.requires_grad(), "masked_mse: mask must be detached");
  auto m = mask.to(logits.scalar_type());
  auto num = (m * (logits - target).pow(2)).sum();
  return num / (m.sum() + kMaskEps);
}

}  // namespace sragan
