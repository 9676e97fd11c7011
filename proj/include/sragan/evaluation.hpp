#pragma once

#include <torch/torch.h>

#include <memory>
#include <string>
#include <vector>

#include "sragan/common.hpp"
#include "sragan/config.hpp"
#include "sragan/data.hpp"
#include "sragan/saliency.hpp"

namespace torch::jit {
struct Module;
}

namespace sragan {

/// Frozen, deterministic image-to-vector map used by the Fréchet metric. The
/// toy backend flattens an 8x8 average-pooled grayscale image (64-d); the
/// inception backend wraps a TorchScript feature network.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;

  static FeatureExtractor toy();
  static FeatureExtractor inception(const std::string& weights_path);

  /// (B, 3, H, W) in [-1, 1] -> (B, D) float64.
  torch::Tensor extract(const torch::Tensor& images) const;
  const std::string& name() const { return name_; }

 private:
  std::string name_ = "toy";
  std::shared_ptr<torch::jit::Module> net_;
};

struct GaussianStats {
  torch::Tensor mu;     // (D,) float64
  torch::Tensor sigma;  // (D, D) float64, symmetric
};

/// Sample mean and covariance (denominator N-1) of an N x D feature matrix.
GaussianStats fit_gaussian(const torch::Tensor& features);

/// Fréchet distance between two Gaussians: squared mean distance plus the
/// covariance trace term with the principal matrix square root, computed via
/// the symmetric form sqrt(sigma_r)^T sigma_g sqrt(sigma_r). Eigenvalues in
/// [-1e-6, 0) are clamped to zero; anything more negative is an error.
double fid(const GaussianStats& r, const GaussianStats& g);

/// Mean IOU of the hard saliency masks of aligned source/stylized batches.
double saliency_miou(const std::vector<torch::Tensor>& sources,
                     const std::vector<torch::Tensor>& stylized, const SaliencyDetector& det);

enum class EvalMode { kStandard, kIdentity, kSelfFid };

struct EvalReport {
  double fid = 0;
  double saliency_miou = 0;
  int64_t n_generated = 0;
  int64_t n_real = 0;
  std::string extractor;
  int64_t seed = 0;
  std::string checkpoint_id;
  std::vector<double> per_image_iou;

  std::string to_json() const;  // without the per-image vector
};

/// Stylizes every test image with the checkpoint's X->Y generator, then scores
/// FID against the real-painting set and Saliency MIOU against the sources.
/// kIdentity short-circuits stylization (stylized = source); kSelfFid scores
/// the real set against itself.
EvalReport evaluate(const std::string& checkpoint_path, const DomainDataset& test_set,
                    const DomainDataset& real_paintings, const RunConfig& cfg,
                    EvalMode mode = EvalMode::kStandard);

}  // namespace sragan
