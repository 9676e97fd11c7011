#pragma once

#include <torch/torch.h>

#include <memory>
#include <string>
#include <vector>

#include "sragan/common.hpp"

namespace torch::jit {
struct Module;
}

namespace sragan {

// Degenerate-denominator guard shared by the mask reductions.
inline constexpr double kMaskEps = 1e-6;

enum class SaliencyBackend { kSynthetic, kPretrained };

/// Frozen salient-object detector. Maps (B, 3, H, W) images in [0, 1] to
/// (B, 1, H, W) maps in [0, 1]; spatial size is preserved and gradients flow
/// through to the input, never into detector parameters.
///
/// The synthetic backend is an analytic oracle: per-pixel luminance relative to
/// the image mean, linearly rescaled to [0, 1], smoothed with a 3x3 box filter.
/// The pretrained backend wraps a TorchScript model (e.g. an exported CSNet).
class SaliencyDetector {
 public:
  SaliencyDetector() = default;

  static SaliencyDetector synthetic();
  static SaliencyDetector pretrained(const std::string& weights_path);

  SaliencyBackend backend() const { return backend_; }
  torch::Tensor detect(const torch::Tensor& img01) const;
  /// Frozen weights (empty for the synthetic backend); used to verify freezing.
  std::vector<torch::Tensor> parameters() const;

 private:
  SaliencyBackend backend_ = SaliencyBackend::kSynthetic;
  std::shared_ptr<torch::jit::Module> net_;
};

inline torch::Tensor detect(const SaliencyDetector& det, const torch::Tensor& img01) {
  return det.detect(img01);
}

/// 1 where s >= 0.5, else 0; same dtype as the input, no gradient path.
torch::Tensor threshold_hard(const torch::Tensor& s);

/// sigmoid((s - 0.5) / tau); differentiable surrogate of the hard threshold.
torch::Tensor threshold_soft(const torch::Tensor& s, double tau);

/// x8 bilinear downscale; spatial dims must be divisible by 8.
torch::Tensor downsample8(const torch::Tensor& s);

/// Per-item |a∩b| / |a∪b| over binary masks, shape (B,). Two empty masks count
/// as structurally identical (IOU 1).
torch::Tensor iou_hard_per_item(const torch::Tensor& a, const torch::Tensor& b);

/// Batch mean of iou_hard_per_item.
double iou_hard(const torch::Tensor& a, const torch::Tensor& b);

/// Soft IOU: sum(a*b) / (sum(a) + sum(b) - sum(a*b) + eps), per item then batch
/// mean. Differentiable.
torch::Tensor iou_soft(const torch::Tensor& a, const torch::Tensor& b);

/// sum(mask * (logits - target)^2) / (sum(mask) + eps). The mask must carry no
/// gradient; an all-zero mask yields exactly 0 (term dropped).
torch::Tensor masked_mse(const torch::Tensor& logits, const torch::Tensor& target,
                         const torch::Tensor& mask);

}  // namespace sragan
