#include "sragan/generator.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace sragan {

namespace F = torch::nn::functional;
using torch::nn::Conv2d;
using torch::nn::Conv2dOptions;
using torch::nn::InstanceNorm2d;
using torch::nn::InstanceNorm2dOptions;

namespace {

Conv2d reflect_conv(int64_t in, int64_t out, int64_t kernel, int64_t stride = 1) {
  return Conv2d(Conv2dOptions(in, out, kernel)
                    .stride(stride)
                    .padding((kernel - 1) / 2)
                    .padding_mode(torch::kReflect));
}

InstanceNorm2d affine_in(int64_t channels) {
  return InstanceNorm2d(InstanceNorm2dOptions(channels).affine(true));
}

}  // namespace

torch::Tensor instance_normalize(const torch::Tensor& f, double eps) {
  require_arg(f.dim() == 4, "instance_normalize: expected (B, C, H, W)");
  auto mu = f.mean({2, 3}, /*keepdim=*/true);
  auto var = (f - mu).pow(2).mean({2, 3}, /*keepdim=*/true);
  return (f - mu) / torch::sqrt(var + eps);
}

SANormImpl::SANormImpl(int64_t channels_in, int64_t hidden) : channels(channels_in) {
  require_arg(channels > 0, "SANorm: channels must be positive");
  if (hidden <= 0) hidden = std::max<int64_t>(channels / 2, 8);
  shared_conv = register_module("shared_conv", reflect_conv(1, hidden, 3));
  gamma_head = register_module("gamma_head", reflect_conv(hidden, channels, 3));
  beta_head = register_module("beta_head", reflect_conv(hidden, channels, 3));
}

torch::Tensor SANormImpl::forward(const torch::Tensor& f_in, const torch::Tensor& saliency) {
  require_arg(f_in.dim() == 4 && saliency.dim() == 4, "SANorm: expected rank-4 inputs");
  require_arg(f_in.size(0) == saliency.size(0), "SANorm: batch size mismatch");
  require_arg(saliency.size(1) == 1, "SANorm: saliency must have a single channel");
  require_arg(f_in.size(1) == channels, "SANorm: feature channels do not match the layer");

  auto s = saliency;
  if (s.size(2) != f_in.size(2) || s.size(3) != f_in.size(3)) {
    s = F::interpolate(s, F::InterpolateFuncOptions()
                              .size(std::vector<int64_t>{f_in.size(2), f_in.size(3)})
                              .mode(torch::kBilinear)
                              .align_corners(false));
  }
  auto h = torch::relu(shared_conv(s));
  auto gamma = gamma_head(h) + 1.0;
  auto beta = beta_head(h);
  return instance_normalize(f_in, eps) * gamma + beta;
}

ResBlockImpl::ResBlockImpl(int64_t channels) {
  conv1 = register_module("conv1", reflect_conv(channels, channels, 3));
  norm1 = register_module("norm1", affine_in(channels));
  conv2 = register_module("conv2", reflect_conv(channels, channels, 3));
  norm2 = register_module("norm2", affine_in(channels));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(norm1(conv1(x)));
  return x + norm2(conv2(h));
}

SNBlockImpl::SNBlockImpl(int64_t channels) {
  conv1 = register_module("conv1", reflect_conv(channels, channels, 3));
  sanorm = register_module("sanorm", SANorm(channels));
  conv2 = register_module("conv2", reflect_conv(channels, channels, 3));
}

torch::Tensor SNBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& saliency) {
  auto h = torch::relu(sanorm(conv1(x), saliency));
  return x + conv2(h);
}

std::vector<int64_t> GeneratorOptions::alternate_positions(int64_t n) {
  std::vector<int64_t> out;
  for (int64_t i = 0; i < n; i += 2) out.push_back(i);
  return out;
}

std::vector<int64_t> GeneratorOptions::parse_sn_positions(const std::string& text, int64_t n) {
  if (text == "alternate") return alternate_positions(n);
  if (text.empty() || text == "none") return {};
  std::set<int64_t> seen;
  std::istringstream parts(text);
  std::string item;
  while (std::getline(parts, item, ',')) {
    if (item.empty()) continue;
    int64_t idx = 0;
    try {
      idx = std::stoll(item);
    } catch (const std::exception&) {
      throw ConfigurationError("gen.sn_positions: '" + item + "' is not an index");
    }
    if (idx < 0 || idx >= n)
      throw ConfigurationError("gen.sn_positions: index " + item + " outside [0, " +
                               std::to_string(n) + ")");
    seen.insert(idx);
  }
  return {seen.begin(), seen.end()};
}

GeneratorNetImpl::GeneratorNetImpl(GeneratorOptions options) : opts_(std::move(options)) {
  require_arg(opts_.base_channels > 0 && opts_.n_bottleneck >= 0, "generator: bad sizes");
  for (int64_t p : opts_.sn_positions)
    require_arg(p >= 0 && p < opts_.n_bottleneck, "generator: sn position out of range");

  const int64_t c1 = opts_.base_channels, c2 = c1 * 2, c4 = c1 * 4;
  encoder = torch::nn::Sequential(
      reflect_conv(3, c1, 7), affine_in(c1), torch::nn::ReLU(),
      reflect_conv(c1, c2, 3, /*stride=*/2), affine_in(c2), torch::nn::ReLU(),
      reflect_conv(c2, c4, 3, /*stride=*/2), affine_in(c4), torch::nn::ReLU());
  register_module("encoder", encoder);

  std::set<int64_t> sn_set(opts_.sn_positions.begin(), opts_.sn_positions.end());
  for (int64_t i = 0; i < opts_.n_bottleneck; ++i) {
    const bool is_sn = sn_set.count(i) > 0;
    block_is_sn.push_back(is_sn);
    if (is_sn) {
      sn_blocks.push_back(register_module("block" + std::to_string(i), SNBlock(c4)));
      res_blocks.push_back(nullptr);
    } else {
      res_blocks.push_back(register_module("block" + std::to_string(i), ResBlock(c4)));
      sn_blocks.push_back(nullptr);
    }
  }

  auto upsample2 = [] {
    return torch::nn::Upsample(
        torch::nn::UpsampleOptions().scale_factor(std::vector<double>{2, 2}).mode(torch::kNearest));
  };
  decoder = torch::nn::Sequential(
      upsample2(), reflect_conv(c4, c2, 3), affine_in(c2), torch::nn::ReLU(),
      upsample2(), reflect_conv(c2, c1, 3), affine_in(c1), torch::nn::ReLU(),
      reflect_conv(c1, 3, 7));
  register_module("decoder", decoder);

  init_gan_weights(*this);
}

torch::Tensor GeneratorNetImpl::forward(const torch::Tensor& img, const torch::Tensor& saliency) {
  require_arg(img.dim() == 4 && img.size(1) == 3, "generator: expected (B, 3, H, W) image");
  require_arg(saliency.dim() == 4 && saliency.size(1) == 1,
              "generator: expected (B, 1, H, W) saliency map");
  require_arg(img.size(0) == saliency.size(0) && img.size(2) == saliency.size(2) &&
                  img.size(3) == saliency.size(3),
              "generator: image and saliency spatial sizes must match");
  require_arg(img.size(2) % 4 == 0 && img.size(3) % 4 == 0,
              "generator: spatial dims must be divisible by 4");

  auto h = encoder->forward(img);
  for (int64_t i = 0; i < opts_.n_bottleneck; ++i) {
    const auto idx = static_cast<size_t>(i);
    h = block_is_sn[idx] ? sn_blocks[idx]->forward(h, saliency) : res_blocks[idx]->forward(h);
  }
  // The (1 - 1e-6) scale keeps the range strictly inside (-1, 1): float32 tanh
  // rounds to exactly 1.0 for large pre-activations.
  return torch::tanh(decoder->forward(h)) * (1.0 - 1e-6);
}

int64_t GeneratorNetImpl::sanorm_count() const {
  return static_cast<int64_t>(std::count(block_is_sn.begin(), block_is_sn.end(), true));
}

void init_gan_weights(torch::nn::Module& module, double std) {
  torch::NoGradGuard no_grad;
  for (const auto& m : module.modules(/*include_self=*/false)) {
    if (auto* conv = m->as<torch::nn::Conv2d>()) {
      conv->weight.normal_(0.0, std);
      if (conv->bias.defined()) conv->bias.zero_();
    }
  }
}

}  // namespace sragan
