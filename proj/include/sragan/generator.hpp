#pragma once

#include <torch/torch.h>

#include <string>
#include <vector>

#include "sragan/common.hpp"

namespace sragan {

/// Per-item, per-channel spatial standardization: (f - mu_c) / sqrt(var_c + eps)
/// with the biased (1/HW) variance.
torch::Tensor instance_normalize(const torch::Tensor& f, double eps = 1e-5);

/// Saliency adaptive normalization. Standardizes the incoming feature map, then
/// modulates it with scale/shift tensors predicted from the saliency map by two
/// sibling conv branches that share their first 3x3 convolution. The scale
/// branch carries a +1 output offset so a fresh layer starts as plain
/// instance normalization.
struct SANormImpl : torch::nn::Module {
  explicit SANormImpl(int64_t channels, int64_t hidden = 0);

  torch::Tensor forward(const torch::Tensor& f_in, const torch::Tensor& saliency);

  torch::nn::Conv2d shared_conv{nullptr};  // first conv, shared by both branches
  torch::nn::Conv2d gamma_head{nullptr};
  torch::nn::Conv2d beta_head{nullptr};
  int64_t channels;
  double eps = 1e-5;
};
TORCH_MODULE(SANorm);

/// conv -> IN -> ReLU -> conv -> IN, with a residual skip. Instance norms carry
/// learnable affine parameters.
struct ResBlockImpl : torch::nn::Module {
  explicit ResBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ResBlock);

/// conv -> SANorm -> ReLU -> conv, with a residual skip; exactly one SANorm.
struct SNBlockImpl : torch::nn::Module {
  explicit SNBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& saliency);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  SANorm sanorm{nullptr};
};
TORCH_MODULE(SNBlock);

struct GeneratorOptions {
  int64_t base_channels = 64;
  int64_t n_bottleneck = 9;
  std::vector<int64_t> sn_positions = alternate_positions(9);

  /// 0, 2, 4, ... below n: saliency-normalized blocks interleaved with residual
  /// blocks, starting saliency-normalized.
  static std::vector<int64_t> alternate_positions(int64_t n);
  /// Parses "alternate", "none"/"" or an explicit comma list of block indices.
  static std::vector<int64_t> parse_sn_positions(const std::string& text, int64_t n);
};

/// Encoder-decoder translation network conditioned on a saliency map. The map
/// enters only through the SANorm layers of the bottleneck; with no SANorm
/// positions configured the forward pass ignores it entirely.
struct GeneratorNetImpl : torch::nn::Module {
  explicit GeneratorNetImpl(GeneratorOptions options = {});

  /// img (B, 3, H, W) in [-1, 1]; saliency (B, 1, H, W) in [0, 1]; returns a
  /// same-shape image strictly inside (-1, 1).
  torch::Tensor forward(const torch::Tensor& img, const torch::Tensor& saliency);

  int64_t sanorm_count() const;
  const GeneratorOptions& options() const { return opts_; }

  GeneratorOptions opts_;
  torch::nn::Sequential encoder{nullptr};
  torch::nn::Sequential decoder{nullptr};
  std::vector<SNBlock> sn_blocks;
  std::vector<ResBlock> res_blocks;
  std::vector<bool> block_is_sn;
};
TORCH_MODULE(GeneratorNet);

/// Zero-mean Gaussian (std 0.02) init for every conv weight; biases to zero.
void init_gan_weights(torch::nn::Module& module, double std = 0.02);

}  // namespace sragan
