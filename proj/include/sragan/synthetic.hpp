#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>

namespace sragan {

/// (3, size, size) image in [-1, 1]: a flat disk of brightness fg on a bg
/// background. Coordinates and radius are in pixels.
torch::Tensor disk_image(int64_t size, double cx, double cy, double radius, double fg, double bg);

/// Writes the bundled synthetic smoke task under root: trainX/testX hold bright
/// disks on dark ground, trainY/testY their photometric inverses. Deterministic
/// in the seed.
void write_synthetic_task(const std::filesystem::path& root, int64_t n_train, int64_t n_test,
                          int64_t size, uint64_t seed);

}  // namespace sragan
