#include "sragan/losses.hpp"

#include <cmath>

#include "sragan/saliency.hpp"

namespace sragan {

namespace {

torch::Tensor aux_mask(const torch::Tensor& saliency) {
  return threshold_hard(downsample8(saliency)).detach();
}

}  // namespace

void LossReport::check_finite() const {
  const std::pair<const char*, double> fields[] = {
      {"adv_g_xy", adv_g_xy}, {"adv_g_yx", adv_g_yx}, {"adv_d_xy", adv_d_xy},
      {"adv_d_yx", adv_d_yx}, {"cycle", cycle},       {"siou", siou},
      {"total", total}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value))
      throw TrainingAbortError(std::string("non-finite loss component '") + name +
                               "' = " + std::to_string(value));
  }
}

torch::Tensor adv_d_loss(SaliencyAttendedDiscriminator& d, const torch::Tensor& real,
                         const torch::Tensor& fake, const torch::Tensor& s_real,
                         const torch::Tensor& s_fake, bool saliency_attended) {
  require_arg(real.sizes() == fake.sizes(), "adv_d_loss: real/fake shape mismatch");
  require_arg(!fake.requires_grad(), "adv_d_loss: fake images must be detached");
  return adv_d_loss(d->forward(real), d->forward(fake), aux_mask(s_real), aux_mask(s_fake),
                    saliency_attended);
}

torch::Tensor adv_d_loss(const LogitPair& real_pred, const LogitPair& fake_pred,
                         const torch::Tensor& aux_mask_real, const torch::Tensor& aux_mask_fake,
                         bool saliency_attended) {
  auto ones_main = torch::ones_like(real_pred.main);
  auto loss = masked_mse(real_pred.main, ones_main, ones_main) +
              masked_mse(fake_pred.main, torch::zeros_like(fake_pred.main), ones_main);
  if (saliency_attended) {
    auto ones_aux = torch::ones_like(real_pred.aux);
    loss = loss + masked_mse(real_pred.aux, ones_aux, aux_mask_real) +
           masked_mse(fake_pred.aux, torch::zeros_like(fake_pred.aux), aux_mask_fake);
  }
  return loss;
}

torch::Tensor adv_g_loss(SaliencyAttendedDiscriminator& d, const torch::Tensor& fake,
                         const torch::Tensor& s_fake, bool saliency_attended) {
  return adv_g_loss(d->forward(fake), aux_mask(s_fake), saliency_attended);
}

torch::Tensor adv_g_loss(const LogitPair& fake_pred, const torch::Tensor& aux_mask_fake,
                         bool saliency_attended) {
  auto ones_main = torch::ones_like(fake_pred.main);
  auto loss = masked_mse(fake_pred.main, ones_main, ones_main);
  if (saliency_attended) {
    loss = loss + masked_mse(fake_pred.aux, torch::ones_like(fake_pred.aux), aux_mask_fake);
  }
  return loss;
}

torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_rec,
                         const torch::Tensor& y, const torch::Tensor& y_rec) {
  require_arg(x.sizes() == x_rec.sizes() && y.sizes() == y_rec.sizes(),
              "cycle_loss: shape mismatch");
  return (x - x_rec).abs().mean() + (y - y_rec).abs().mean();
}

torch::Tensor siou_loss(const std::vector<std::pair<torch::Tensor, torch::Tensor>>& map_pairs,
                        double tau) {
  require_arg(!map_pairs.empty(), "siou_loss: no map pairs");
  torch::Tensor total;
  for (const auto& [ref, derived] : map_pairs) {
    auto iou = iou_soft(threshold_soft(ref, tau), threshold_soft(derived, tau));
    total = total.defined() ? total + iou : iou;
  }
  return -total;
}

torch::Tensor saliency_mse_loss(
    const std::vector<std::pair<torch::Tensor, torch::Tensor>>& map_pairs) {
  require_arg(!map_pairs.empty(), "saliency_mse_loss: no map pairs");
  torch::Tensor total;
  for (const auto& [ref, derived] : map_pairs) {
    require_arg(ref.sizes() == derived.sizes(), "saliency_mse_loss: shape mismatch");
    auto mse = (ref - derived).pow(2).mean();
    total = total.defined() ? total + mse : mse;
  }
  return total;
}

torch::Tensor total_loss(const torch::Tensor& adv, const torch::Tensor& cycle,
                         const torch::Tensor& siou, const LossWeights& w) {
  return w.lambda1 * adv + w.lambda2 * cycle + w.lambda3 * siou;
}

double total_loss(double adv, double cycle, double siou, const LossWeights& w) {
  const double v = w.lambda1 * adv + w.lambda2 * cycle + w.lambda3 * siou;
  if (!std::isfinite(v))
    throw TrainingAbortError("non-finite total loss: " + std::to_string(v));
  return v;
}

}  // namespace sragan
