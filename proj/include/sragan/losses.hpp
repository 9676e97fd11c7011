#pragma once

#include <torch/torch.h>

#include <utility>
#include <vector>

#include "sragan/common.hpp"
#include "sragan/discriminator.hpp"

namespace sragan {

struct LossWeights {
  double lambda1 = 1.0;   // adversarial
  double lambda2 = 10.0;  // cycle
  double lambda3 = 5.0;   // saliency structure
};

/// Per-iteration scalar record; every field must stay finite.
struct LossReport {
  double adv_g_xy = 0, adv_g_yx = 0;
  double adv_d_xy = 0, adv_d_yx = 0;
  double cycle = 0;
  double siou = 0;  // carries the MSE variant under the smse ablation
  double total = 0;

  /// Throws TrainingAbortError naming the first non-finite component.
  void check_finite() const;
};

/// Discriminator half of the two-head least-squares objective for one mapping:
/// main logits of the real image vs 1 and the (detached) fake vs 0, plus the
/// same pair on the auxiliary head restricted to each image's own saliency
/// mask. Masks are hard-thresholded x8-downsampled maps, detached.
torch::Tensor adv_d_loss(SaliencyAttendedDiscriminator& d, const torch::Tensor& real,
                         const torch::Tensor& fake, const torch::Tensor& s_real,
                         const torch::Tensor& s_fake, bool saliency_attended = true);

/// Same objective on precomputed logits; the masks are aux-scale binary masks.
torch::Tensor adv_d_loss(const LogitPair& real_pred, const LogitPair& fake_pred,
                         const torch::Tensor& aux_mask_real, const torch::Tensor& aux_mask_fake,
                         bool saliency_attended = true);

/// Generator half: main and saliency-masked aux logits of the fake drawn
/// toward 1. Gradients flow into `fake`; the mask stays detached.
torch::Tensor adv_g_loss(SaliencyAttendedDiscriminator& d, const torch::Tensor& fake,
                         const torch::Tensor& s_fake, bool saliency_attended = true);

torch::Tensor adv_g_loss(const LogitPair& fake_pred, const torch::Tensor& aux_mask_fake,
                         bool saliency_attended = true);

/// Mean-per-element L1 of both reconstruction directions.
torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_rec,
                         const torch::Tensor& y, const torch::Tensor& y_rec);

/// Negative sum of soft IOUs over (reference, derived) saliency-map pairs,
/// soft-thresholded at temperature tau. Four pairs give a range of [-4, 0].
torch::Tensor siou_loss(const std::vector<std::pair<torch::Tensor, torch::Tensor>>& map_pairs,
                        double tau);

/// Ablation variant: sum of per-pair pixelwise MSE on the raw maps.
torch::Tensor saliency_mse_loss(
    const std::vector<std::pair<torch::Tensor, torch::Tensor>>& map_pairs);

torch::Tensor total_loss(const torch::Tensor& adv, const torch::Tensor& cycle,
                         const torch::Tensor& siou, const LossWeights& w);
double total_loss(double adv, double cycle, double siou, const LossWeights& w);

}  // namespace sragan
