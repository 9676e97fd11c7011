#pragma once

#include <torch/torch.h>

#include "sragan/common.hpp"

namespace sragan {

struct LogitPair {
  torch::Tensor main;  // (B, 1, H/16, W/16), raw logits
  torch::Tensor aux;   // (B, 1, H/8, W/8), raw logits
};

/// Patch discriminator with four stride-2 conv blocks (64, 128, 256, 512), a
/// main 1/16-scale logit head after block 4 and an auxiliary 1/8-scale head
/// after block 3. The auxiliary head's loss contribution is masked to salient
/// regions by the caller; the heads themselves emit raw logits.
struct SaliencyAttendedDiscriminatorImpl : torch::nn::Module {
  SaliencyAttendedDiscriminatorImpl();

  LogitPair forward(const torch::Tensor& img);

  torch::nn::Sequential block1{nullptr}, block2{nullptr}, block3{nullptr}, block4{nullptr};
  torch::nn::Conv2d main_head{nullptr}, aux_head{nullptr};
};
TORCH_MODULE(SaliencyAttendedDiscriminator);

}  // namespace sragan
