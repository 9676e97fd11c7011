#include "sragan/synthetic.hpp"

#include <random>

#include "sragan/common.hpp"
#include "sragan/data.hpp"

namespace sragan {

torch::Tensor disk_image(int64_t size, double cx, double cy, double radius, double fg, double bg) {
  require_arg(size > 0 && radius > 0, "disk_image: bad geometry");
  auto ys = torch::arange(size, torch::kFloat32).view({size, 1});
  auto xs = torch::arange(size, torch::kFloat32).view({1, size});
  auto dist2 = (xs - cx).pow(2) + (ys - cy).pow(2);
  auto inside = (dist2 <= radius * radius).to(torch::kFloat32);
  auto img01 = bg + (fg - bg) * inside;
  return from_unit_range(img01.unsqueeze(0).expand({3, size, size}).contiguous());
}

void write_synthetic_task(const std::filesystem::path& root, int64_t n_train, int64_t n_test,
                          int64_t size, uint64_t seed) {
  require_arg(n_train > 0 && n_test >= 0 && size > 0, "write_synthetic_task: bad sizes");
  std::mt19937_64 rng(seed);
  auto unit = [&rng] {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // [0, 1)
  };

  const std::pair<const char*, int64_t> splits[] = {
      {"trainX", n_train}, {"trainY", n_train}, {"testX", n_test}, {"testY", n_test}};
  for (const auto& [name, count] : splits) {
    const auto dir = root / name;
    std::filesystem::create_directories(dir);
    const bool inverted = std::string(name).back() == 'Y';
    for (int64_t i = 0; i < count; ++i) {
      const double cx = (0.3 + 0.4 * unit()) * static_cast<double>(size);
      const double cy = (0.3 + 0.4 * unit()) * static_cast<double>(size);
      const double radius = (0.15 + 0.15 * unit()) * static_cast<double>(size);
      double fg = 0.85 + 0.1 * unit();
      double bg = 0.08 + 0.05 * unit();
      if (inverted) {
        fg = 1.0 - fg;
        bg = 1.0 - bg;
      }
      char fname[32];
      std::snprintf(fname, sizeof(fname), "img_%04lld.png", static_cast<long long>(i));
      save_image_png(disk_image(size, cx, cy, radius, fg, bg), dir / fname);
    }
  }
}

}  // namespace sragan
