#include "sragan/discriminator.hpp"

#include "sragan/generator.hpp"

namespace sragan {

using torch::nn::Conv2d;
using torch::nn::Conv2dOptions;
using torch::nn::InstanceNorm2d;
using torch::nn::InstanceNorm2dOptions;
using torch::nn::LeakyReLU;
using torch::nn::LeakyReLUOptions;
using torch::nn::Sequential;

namespace {

Conv2d down_conv(int64_t in, int64_t out) {
  return Conv2d(Conv2dOptions(in, out, 4).stride(2).padding(1));
}

LeakyReLU lrelu() {
  return LeakyReLU(LeakyReLUOptions().negative_slope(0.2));
}

}  // namespace

SaliencyAttendedDiscriminatorImpl::SaliencyAttendedDiscriminatorImpl() {
  block1 = register_module("block1", Sequential(down_conv(3, 64), lrelu()));
  block2 = register_module(
      "block2", Sequential(down_conv(64, 128), InstanceNorm2d(InstanceNorm2dOptions(128).affine(true)), lrelu()));
  block3 = register_module(
      "block3", Sequential(down_conv(128, 256), InstanceNorm2d(InstanceNorm2dOptions(256).affine(true)), lrelu()));
  block4 = register_module(
      "block4", Sequential(down_conv(256, 512), InstanceNorm2d(InstanceNorm2dOptions(512).affine(true)), lrelu()));
  aux_head = register_module("aux_head", Conv2d(Conv2dOptions(256, 1, 3).stride(1).padding(1)));
  main_head = register_module("main_head", Conv2d(Conv2dOptions(512, 1, 3).stride(1).padding(1)));
  init_gan_weights(*this);
}

LogitPair SaliencyAttendedDiscriminatorImpl::forward(const torch::Tensor& img) {
  require_arg(img.dim() == 4 && img.size(1) == 3, "discriminator: expected (B, 3, H, W)");
  require_arg(img.size(2) % 16 == 0 && img.size(3) % 16 == 0,
              "discriminator: spatial dims must be divisible by 16");
  auto h3 = block3->forward(block2->forward(block1->forward(img)));
  auto h4 = block4->forward(h3);
  return {main_head(h4), aux_head(h3)};
}

}  // namespace sragan
