#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sragan/common.hpp"

namespace sragan {

/// One image folder held in memory: every item decodes to 3 channels and is
/// bicubic-resized to resize_to x resize_to at load. Pixels are kept as uint8
/// and converted to float in [-1, 1] on access. Immutable after construction.
class DomainDataset {
 public:
  DomainDataset() = default;

  const std::filesystem::path& root() const { return root_; }
  const std::vector<std::string>& image_ids() const { return ids_; }
  int64_t resize_to() const { return resize_to_; }
  int64_t size() const { return static_cast<int64_t>(ids_.size()); }

  /// (3, R, R) float32 in [-1, 1].
  torch::Tensor get(int64_t index) const;
  /// (B, 3, R, R) stacked in the given index order.
  torch::Tensor get_batch(const std::vector<int64_t>& indices) const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> ids_;
  std::vector<torch::Tensor> pixels_;  // uint8 (3, R, R), RGB
  int64_t resize_to_ = 256;

  friend DomainDataset load_dataset(const std::filesystem::path&, int64_t);
  friend std::pair<DomainDataset, DomainDataset> split_dataset(const DomainDataset&, uint64_t);
};

/// Loads every *.png / *.jpg / *.jpeg under root (non-recursive), sorted
/// lexicographically by filename. Undecodable files are skipped with a warning;
/// an empty result is a configuration error.
DomainDataset load_dataset(const std::filesystem::path& root, int64_t resize_to = 256);

/// Deterministic 4:1 train/test partition of the id list given the seed.
std::pair<DomainDataset, DomainDataset> split_dataset(const DomainDataset& ds, uint64_t seed);

struct UnpairedBatch {
  torch::Tensor x;  // (B, 3, R, R) in [-1, 1]
  torch::Tensor y;
};

/// One-shot random pairing: indices drawn uniformly with replacement from each
/// domain, deterministic in the seed.
UnpairedBatch sample_unpaired(const DomainDataset& ds_x, const DomainDataset& ds_y,
                              int64_t batch, uint64_t seed);

/// Epoch-aware batch stream for training: the larger domain is reshuffled and
/// walked once per epoch, the smaller one is drawn uniformly with replacement.
class UnpairedSampler {
 public:
  UnpairedSampler(const DomainDataset* ds_x, const DomainDataset* ds_y,
                  int64_t batch, uint64_t seed);

  int64_t iterations_per_epoch() const;
  UnpairedBatch next();

  std::string state() const;
  void restore(const std::string& text);

 private:
  void reshuffle();

  const DomainDataset* ds_x_;
  const DomainDataset* ds_y_;
  int64_t batch_;
  std::mt19937_64 rng_;
  std::vector<int64_t> order_;  // shuffled indices of the larger domain
  size_t cursor_ = 0;
  bool x_is_larger_ = true;
};

torch::Tensor to_unit_range(const torch::Tensor& img);    // [-1,1] -> [0,1]
torch::Tensor from_unit_range(const torch::Tensor& img);  // [0,1] -> [-1,1]

/// Decodes one PNG/JPEG into (3, R, R) float32 in [-1, 1]; throws ArgumentError
/// when the file cannot be decoded.
torch::Tensor load_image_file(const std::filesystem::path& path, int64_t resize_to);

/// Writes a (3, H, W) or (1, 3, H, W) tensor in [-1, 1] as an 8-bit PNG.
void save_image_png(const torch::Tensor& img, const std::filesystem::path& path);

}  // namespace sragan
