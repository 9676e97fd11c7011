#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace sragan::testing {

/// Cell-enumeration IOU oracle over two binary masks of any (broadcast-free)
/// shape; independent of the tensorized implementation.
inline double brute_force_iou(const torch::Tensor& a, const torch::Tensor& b) {
  auto af = a.flatten().to(torch::kFloat64).contiguous();
  auto bf = b.flatten().to(torch::kFloat64).contiguous();
  const double* ap = af.data_ptr<double>();
  const double* bp = bf.data_ptr<double>();
  int64_t inter = 0, uni = 0;
  for (int64_t i = 0; i < af.numel(); ++i) {
    const bool ai = ap[i] != 0.0;
    const bool bi = bp[i] != 0.0;
    if (ai && bi) ++inter;
    if (ai || bi) ++uni;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Central-difference gradient of f with respect to x (contiguous float64,
/// mutated in place and restored). f must read x's current values each call.
inline torch::Tensor finite_diff_grad(torch::Tensor x, const std::function<double()>& f,
                                      double h = 1e-5) {
  TORCH_CHECK(x.is_contiguous() && x.scalar_type() == torch::kFloat64);
  auto g = torch::zeros_like(x);
  double* xp = x.data_ptr<double>();
  double* gp = g.data_ptr<double>();
  torch::NoGradGuard no_grad;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + h;
    const double fp = f();
    xp[i] = orig - h;
    const double fm = f();
    xp[i] = orig;
    gp[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const torch::Tensor& analytic, const torch::Tensor& reference) {
  const double denom = reference.norm().item<double>();
  return (analytic - reference).norm().item<double>() / (denom + 1e-12);
}

/// Fresh temp directory under the system temp root.
inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("sragan_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random map with no values inside (0.45, 0.55), the band where hard and soft
/// thresholding legitimately disagree.
inline torch::Tensor banded_random_map(const std::vector<int64_t>& shape) {
  auto u = torch::rand(shape, torch::kFloat64) * 0.9;
  return torch::where(u < 0.45, u, u + 0.1);
}

}  // namespace sragan::testing
