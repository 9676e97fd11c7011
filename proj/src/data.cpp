#include "sragan/data.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <iostream>
#include <sstream>

namespace sragan {

namespace {

bool has_supported_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// uint8 RGB (3, R, R) or an undefined tensor when decoding fails.
torch::Tensor decode_u8(const std::filesystem::path& path, int64_t resize_to) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);  // grayscale replicates to 3ch
  if (bgr.empty()) return {};
  if (bgr.cols != resize_to || bgr.rows != resize_to) {
    cv::Mat resized;
    cv::resize(bgr, resized, cv::Size(static_cast<int>(resize_to), static_cast<int>(resize_to)),
               0, 0, cv::INTER_CUBIC);
    bgr = resized;
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  auto t = torch::from_blob(rgb.data, {resize_to, resize_to, 3}, torch::kUInt8);
  return t.permute({2, 0, 1}).clone();
}

torch::Tensor u8_to_pm1(const torch::Tensor& u8) {
  return u8.to(torch::kFloat32).div(255.0).mul(2.0).sub(1.0);
}

}  // namespace

torch::Tensor DomainDataset::get(int64_t index) const {
  require_arg(index >= 0 && index < size(), "dataset index out of range");
  return u8_to_pm1(pixels_[static_cast<size_t>(index)]);
}

torch::Tensor DomainDataset::get_batch(const std::vector<int64_t>& indices) const {
  require_arg(!indices.empty(), "get_batch: empty index list");
  std::vector<torch::Tensor> items;
  items.reserve(indices.size());
  for (int64_t i : indices) items.push_back(get(i));
  return torch::stack(items, 0);
}

DomainDataset load_dataset(const std::filesystem::path& root, int64_t resize_to) {
  if (!std::filesystem::is_directory(root))
    throw ConfigurationError("dataset folder does not exist: " + root.string());
  require_arg(resize_to > 0, "resize_to must be positive");

  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_regular_file() && has_supported_extension(entry.path()))
      names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());

  DomainDataset ds;
  ds.root_ = root;
  ds.resize_to_ = resize_to;
  for (const auto& name : names) {
    auto t = decode_u8(root / name, resize_to);
    if (!t.defined()) {
      std::cerr << "[sragan] warning: skipping undecodable image " << (root / name).string() << "\n";
      continue;
    }
    ds.ids_.push_back(name);
    ds.pixels_.push_back(std::move(t));
  }
  if (ds.ids_.empty())
    throw ConfigurationError("no decodable PNG/JPEG images in " + root.string());
  return ds;
}

std::pair<DomainDataset, DomainDataset> split_dataset(const DomainDataset& ids, uint64_t seed) {
  const int64_t n = ids.size();
  require_arg(n >= 2, "split_dataset: need at least 2 items");
  std::vector<int64_t> perm(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = perm.size() - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_index(rng, i + 1)]);

  const int64_t n_train = std::max<int64_t>(int64_t{1}, n * 4 / 5);
  auto take = [&](size_t begin, size_t end) {
    DomainDataset part;
    part.root_ = ids.root_;
    part.resize_to_ = ids.resize_to_;
    std::vector<size_t> sel(perm.begin() + static_cast<long>(begin), perm.begin() + static_cast<long>(end));
    std::sort(sel.begin(), sel.end());
    for (size_t i : sel) {
      part.ids_.push_back(ids.ids_[i]);
      part.pixels_.push_back(ids.pixels_[i]);
    }
    return part;
  };
  return {take(0, static_cast<size_t>(n_train)), take(static_cast<size_t>(n_train), perm.size())};
}

UnpairedBatch sample_unpaired(const DomainDataset& ds_x, const DomainDataset& ds_y,
                              int64_t batch, uint64_t seed) {
  require_arg(ds_x.size() > 0 && ds_y.size() > 0, "sample_unpaired: empty domain");
  require_arg(batch > 0, "sample_unpaired: batch must be positive");
  std::mt19937_64 rng(seed);
  std::vector<int64_t> ix, iy;
  for (int64_t b = 0; b < batch; ++b) {
    ix.push_back(static_cast<int64_t>(uniform_index(rng, static_cast<size_t>(ds_x.size()))));
    iy.push_back(static_cast<int64_t>(uniform_index(rng, static_cast<size_t>(ds_y.size()))));
  }
  return {ds_x.get_batch(ix), ds_y.get_batch(iy)};
}

UnpairedSampler::UnpairedSampler(const DomainDataset* ds_x, const DomainDataset* ds_y,
                                 int64_t batch, uint64_t seed)
    : ds_x_(ds_x), ds_y_(ds_y), batch_(batch), rng_(seed) {
  require_arg(ds_x_ && ds_y_ && ds_x_->size() > 0 && ds_y_->size() > 0,
              "sampler: both domains must be non-empty");
  require_arg(batch_ > 0, "sampler: batch must be positive");
  x_is_larger_ = ds_x_->size() >= ds_y_->size();
  reshuffle();
}

int64_t UnpairedSampler::iterations_per_epoch() const {
  const int64_t larger = std::max(ds_x_->size(), ds_y_->size());
  return (larger + batch_ - 1) / batch_;
}

void UnpairedSampler::reshuffle() {
  const int64_t larger = std::max(ds_x_->size(), ds_y_->size());
  order_.resize(static_cast<size_t>(larger));
  for (int64_t i = 0; i < larger; ++i) order_[static_cast<size_t>(i)] = i;
  for (size_t i = order_.size() - 1; i > 0; --i)
    std::swap(order_[i], order_[uniform_index(rng_, i + 1)]);
  cursor_ = 0;
}

UnpairedBatch UnpairedSampler::next() {
  if (cursor_ >= order_.size()) reshuffle();
  const auto* larger = x_is_larger_ ? ds_x_ : ds_y_;
  const auto* smaller = x_is_larger_ ? ds_y_ : ds_x_;

  std::vector<int64_t> li, si;
  const int64_t take = std::min<int64_t>(batch_, static_cast<int64_t>(order_.size() - cursor_));
  for (int64_t b = 0; b < take; ++b) li.push_back(order_[cursor_++]);
  for (int64_t b = 0; b < take; ++b)
    si.push_back(static_cast<int64_t>(uniform_index(rng_, static_cast<size_t>(smaller->size()))));

  auto lt = larger->get_batch(li);
  auto st = smaller->get_batch(si);
  return x_is_larger_ ? UnpairedBatch{lt, st} : UnpairedBatch{st, lt};
}

std::string UnpairedSampler::state() const {
  std::ostringstream os;
  os << rng_to_string(rng_) << "\n" << cursor_ << "\n";
  for (size_t i = 0; i < order_.size(); ++i) os << order_[i] << (i + 1 < order_.size() ? " " : "");
  os << "\n";
  return os.str();
}

void UnpairedSampler::restore(const std::string& text) {
  std::istringstream is(text);
  std::string rng_line;
  std::getline(is, rng_line);
  rng_ = rng_from_string(rng_line);
  is >> cursor_;
  for (auto& v : order_) is >> v;
  if (is.fail()) throw ArgumentError("sampler: malformed state");
}

torch::Tensor to_unit_range(const torch::Tensor& img) {
  return (img + 1.0) / 2.0;
}

torch::Tensor from_unit_range(const torch::Tensor& img) {
  return img * 2.0 - 1.0;
}

torch::Tensor load_image_file(const std::filesystem::path& path, int64_t resize_to) {
  require_arg(has_supported_extension(path), "unsupported image format: " + path.string());
  auto t = decode_u8(path, resize_to);
  if (!t.defined()) throw ArgumentError("cannot decode image: " + path.string());
  return u8_to_pm1(t);
}

void save_image_png(const torch::Tensor& img, const std::filesystem::path& path) {
  auto t = img;
  if (t.dim() == 4) {
    require_arg(t.size(0) == 1, "save_image_png: batch size must be 1");
    t = t.squeeze(0);
  }
  require_arg(t.dim() == 3 && t.size(0) == 3, "save_image_png: expected (3, H, W)");
  auto u8 = to_unit_range(t.detach().to(torch::kFloat32))
                .clamp(0.0, 1.0)
                .mul(255.0)
                .round()
                .to(torch::kUInt8)
                .permute({1, 2, 0})
                .contiguous();  // HWC RGB
  cv::Mat rgb(static_cast<int>(u8.size(0)), static_cast<int>(u8.size(1)), CV_8UC3, u8.data_ptr());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr))
    throw TrainingAbortError("cannot write image: " + path.string());
}

}  // namespace sragan
