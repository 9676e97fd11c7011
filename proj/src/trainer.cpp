#include "sragan/trainer.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace sragan {

namespace {

void set_requires_grad(torch::nn::Module& module, bool flag) {
  for (auto& p : module.parameters()) p.set_requires_grad(flag);
}

void set_lr(torch::optim::Adam& opt, double lr) {
  for (auto& group : opt.param_groups())
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

std::vector<torch::Tensor> concat_params(torch::nn::Module& a, torch::nn::Module& b) {
  auto params = a.parameters();
  auto more = b.parameters();
  params.insert(params.end(), more.begin(), more.end());
  return params;
}

SaliencyDetector make_detector(const TrainConfig& cfg) {
  if (cfg.saliency_backend == "pretrained")
    return SaliencyDetector::pretrained(cfg.saliency_weights_path);
  return SaliencyDetector::synthetic();
}

}  // namespace

AblationSet AblationSet::parse(const std::vector<std::string>& names) {
  AblationSet set;
  for (const auto& n : names) {
    if (n == "no_siou")
      set.no_siou = true;
    else if (n == "smse")
      set.smse = true;
    else if (n == "no_sanorm")
      set.no_sanorm = true;
    else if (n == "no_saadv")
      set.no_saadv = true;
    else
      throw ConfigurationError("unknown ablation '" + n + "'");
  }
  if (set.no_siou && set.smse)
    throw ConfigurationError("ablations no_siou and smse are mutually exclusive");
  return set;
}

TrainConfig TrainConfig::from_run_config(const RunConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.get_int("trainer.epochs");
  t.lr = cfg.get_double("trainer.lr");
  t.adam_beta1 = cfg.get_double("trainer.adam_beta1");
  t.adam_beta2 = cfg.get_double("trainer.adam_beta2");
  t.decay_start_epoch = cfg.get_int("trainer.decay_start_epoch");
  t.batch_size = cfg.get_int("data.batch_size");
  t.weights = {cfg.get_double("trainer.lambda1"), cfg.get_double("trainer.lambda2"),
               cfg.get_double("trainer.lambda3")};
  t.ablation = AblationSet::parse(cfg.get_list("trainer.ablation"));
  t.seed = static_cast<uint64_t>(cfg.get_int("trainer.seed"));
  t.pool_size = cfg.get_int("trainer.pool_size");
  t.checkpoint_every = cfg.get_int("trainer.checkpoint_every");
  t.tau = cfg.get_double("saliency.tau");
  t.saliency_backend = cfg.get_str("saliency.backend");
  t.saliency_weights_path = cfg.get_str("saliency.weights_path");
  t.run_name = cfg.get_str("run.name");

  t.gen.base_channels = cfg.get_int("gen.base_channels");
  t.gen.n_bottleneck = cfg.get_int("gen.n_bottleneck");
  t.gen.sn_positions = t.ablation.no_sanorm
                           ? std::vector<int64_t>{}
                           : GeneratorOptions::parse_sn_positions(cfg.get_str("gen.sn_positions"),
                                                                  t.gen.n_bottleneck);

  if (t.epochs < 1) throw ConfigurationError("trainer.epochs must be >= 1");
  if (t.lr <= 0) throw ConfigurationError("trainer.lr must be positive");
  if (t.decay_start_epoch < 0 || t.decay_start_epoch >= t.epochs)
    throw ConfigurationError("trainer.decay_start_epoch must lie in [0, epochs)");
  if (t.batch_size < 1) throw ConfigurationError("data.batch_size must be >= 1");
  if (t.pool_size < 0) throw ConfigurationError("trainer.pool_size must be >= 0");
  if (t.checkpoint_every < 1) throw ConfigurationError("trainer.checkpoint_every must be >= 1");
  if (t.tau <= 0) throw ConfigurationError("saliency.tau must be positive");
  if (t.weights.lambda1 < 0 || t.weights.lambda2 < 0 || t.weights.lambda3 < 0)
    throw ConfigurationError("loss weights must be non-negative");
  const int64_t resize = cfg.get_int("data.resize_to");
  if (resize < 16 || resize % 16 != 0)
    throw ConfigurationError("data.resize_to must be a positive multiple of 16");
  return t;
}

double lr_at(const TrainConfig& cfg, int64_t epoch) {
  require_arg(epoch >= 0 && epoch < cfg.epochs, "lr_at: epoch outside [0, epochs)");
  if (epoch < cfg.decay_start_epoch) return cfg.lr;
  const auto span = static_cast<double>(cfg.epochs - cfg.decay_start_epoch);
  return cfg.lr * (1.0 - static_cast<double>(epoch - cfg.decay_start_epoch) / span);
}

ImagePool::ImagePool(int64_t capacity, uint64_t seed) : capacity_(capacity), rng_(seed) {
  require_arg(capacity >= 0, "pool capacity must be >= 0");
}

torch::Tensor ImagePool::query(const torch::Tensor& fakes) {
  require_arg(fakes.dim() == 4, "pool: expected (B, 3, H, W)");
  require_arg(!fakes.requires_grad(), "pool: fakes must be detached");
  if (capacity_ == 0) return fakes;

  std::vector<torch::Tensor> out;
  out.reserve(static_cast<size_t>(fakes.size(0)));
  for (int64_t b = 0; b < fakes.size(0); ++b) {
    auto item = fakes[b].clone();
    if (stored() < capacity_) {
      images_.push_back(item);
      out.push_back(item);
    } else if (uniform_index(rng_, 2) == 1) {
      const size_t idx = uniform_index(rng_, images_.size());
      out.push_back(images_[idx]);
      images_[idx] = item;
    } else {
      out.push_back(item);
    }
  }
  return torch::stack(out, 0);
}

void ImagePool::save(torch::serialize::OutputArchive& archive) const {
  archive.write("capacity", c10::IValue(capacity_));
  archive.write("rng", c10::IValue(rng_to_string(rng_)));
  archive.write("count", c10::IValue(static_cast<int64_t>(images_.size())));
  if (!images_.empty()) archive.write("images", torch::stack(images_, 0));
}

void ImagePool::load(torch::serialize::InputArchive& archive) {
  c10::IValue v;
  archive.read("capacity", v);
  capacity_ = v.toInt();
  archive.read("rng", v);
  rng_ = rng_from_string(v.toStringRef());
  archive.read("count", v);
  const int64_t count = v.toInt();
  images_.clear();
  if (count > 0) {
    torch::Tensor stack;
    archive.read("images", stack);
    for (int64_t i = 0; i < count; ++i) images_.push_back(stack[i].clone());
  }
}

TrainState init_train_state(const TrainConfig& cfg) {
  torch::manual_seed(cfg.seed);
  TrainState state;
  state.g = GeneratorNet(cfg.gen);
  state.f = GeneratorNet(cfg.gen);
  state.d_x = SaliencyAttendedDiscriminator();
  state.d_y = SaliencyAttendedDiscriminator();
  auto adam_opts = torch::optim::AdamOptions(cfg.lr).betas({cfg.adam_beta1, cfg.adam_beta2});
  state.opt_g = std::make_unique<torch::optim::Adam>(concat_params(*state.g, *state.f), adam_opts);
  state.opt_d =
      std::make_unique<torch::optim::Adam>(concat_params(*state.d_x, *state.d_y), adam_opts);
  state.pool_x = ImagePool(cfg.pool_size, derive_seed(cfg.seed, 1));
  state.pool_y = ImagePool(cfg.pool_size, derive_seed(cfg.seed, 2));
  state.detector = make_detector(cfg);
  state.seed = cfg.seed;
  return state;
}

GeneratorUpdateResult generator_update(TrainState& state, const UnpairedBatch& batch,
                                       const TrainConfig& cfg) {
  const auto& x = batch.x;
  const auto& y = batch.y;
  require_arg(x.sizes() == y.sizes(), "train_step: x and y batches must match in shape");

  const auto& det = state.detector;
  auto s_x = detect(det, to_unit_range(x)).detach();
  auto s_y = detect(det, to_unit_range(y)).detach();

  set_requires_grad(*state.d_x, false);
  set_requires_grad(*state.d_y, false);

  auto x2y = state.g->forward(x, s_x);
  auto y2x = state.f->forward(y, s_y);
  // Cycles are conditioned on the original images' saliency maps.
  auto x_rec = state.f->forward(x2y, s_x);
  auto y_rec = state.g->forward(y2x, s_y);

  const bool attended = !cfg.ablation.no_saadv;
  auto s_x2y = detect(det, to_unit_range(x2y));
  auto s_y2x = detect(det, to_unit_range(y2x));
  auto adv_xy = adv_g_loss(state.d_y, x2y, s_x2y.detach(), attended);
  auto adv_yx = adv_g_loss(state.d_x, y2x, s_y2x.detach(), attended);
  auto cycle = cycle_loss(x, x_rec, y, y_rec);

  torch::Tensor structure = torch::zeros({}, x.options());
  if (cfg.ablation.smse || !cfg.ablation.no_siou) {
    auto s_xrec = detect(det, to_unit_range(x_rec));
    auto s_yrec = detect(det, to_unit_range(y_rec));
    std::vector<std::pair<torch::Tensor, torch::Tensor>> pairs = {
        {s_x, s_x2y}, {s_x, s_xrec}, {s_y, s_y2x}, {s_y, s_yrec}};
    structure = cfg.ablation.smse ? saliency_mse_loss(pairs) : siou_loss(pairs, cfg.tau);
  }

  auto objective = total_loss(adv_xy + adv_yx, cycle, structure, cfg.weights);
  state.opt_g->zero_grad();
  objective.backward();
  state.opt_g->step();

  set_requires_grad(*state.d_x, true);
  set_requires_grad(*state.d_y, true);

  GeneratorUpdateResult out;
  out.adv_g_xy = adv_xy.item<double>();
  out.adv_g_yx = adv_yx.item<double>();
  out.cycle = cycle.item<double>();
  out.siou = structure.item<double>();
  out.fake_xy = x2y.detach();
  out.fake_yx = y2x.detach();
  return out;
}

std::pair<double, double> discriminator_update(TrainState& state, const UnpairedBatch& batch,
                                               const torch::Tensor& pooled_fake_y,
                                               const torch::Tensor& pooled_fake_x,
                                               const TrainConfig& cfg) {
  const auto& det = state.detector;
  torch::Tensor s_y, s_fake_y, s_x, s_fake_x;
  {
    torch::NoGradGuard no_grad;
    s_y = detect(det, to_unit_range(batch.y));
    s_fake_y = detect(det, to_unit_range(pooled_fake_y));
    s_x = detect(det, to_unit_range(batch.x));
    s_fake_x = detect(det, to_unit_range(pooled_fake_x));
  }
  const bool attended = !cfg.ablation.no_saadv;
  auto d_xy = adv_d_loss(state.d_y, batch.y, pooled_fake_y, s_y, s_fake_y, attended);
  auto d_yx = adv_d_loss(state.d_x, batch.x, pooled_fake_x, s_x, s_fake_x, attended);
  auto objective = cfg.weights.lambda1 * (d_xy + d_yx);
  state.opt_d->zero_grad();
  objective.backward();
  state.opt_d->step();
  return {d_xy.item<double>(), d_yx.item<double>()};
}

LossReport train_step(TrainState& state, const UnpairedBatch& batch, const TrainConfig& cfg) {
  auto g_out = generator_update(state, batch, cfg);
  auto fake_y = state.pool_y.query(g_out.fake_xy);
  auto fake_x = state.pool_x.query(g_out.fake_yx);
  auto [adv_d_xy, adv_d_yx] = discriminator_update(state, batch, fake_y, fake_x, cfg);

  LossReport report;
  report.adv_g_xy = g_out.adv_g_xy;
  report.adv_g_yx = g_out.adv_g_yx;
  report.adv_d_xy = adv_d_xy;
  report.adv_d_yx = adv_d_yx;
  report.cycle = g_out.cycle;
  report.siou = g_out.siou;
  report.total = total_loss(report.adv_g_xy + report.adv_g_yx + report.adv_d_xy + report.adv_d_yx,
                            report.cycle, report.siou, cfg.weights);
  report.check_finite();
  return report;
}

std::filesystem::path runs_root() {
  if (const char* env = std::getenv("SRAGAN_RUNS_DIR")) return {env};
  return {"runs"};
}

std::filesystem::path run_dir(const RunConfig& cfg) {
  return runs_root() / cfg.get_str("run.name");
}

std::string fit(const RunConfig& cfg, const DomainDataset& ds_x, const DomainDataset& ds_y,
                bool resume) {
  const TrainConfig tcfg = TrainConfig::from_run_config(cfg);
  const auto dir = run_dir(cfg);
  const auto ckpt_dir = dir / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);
  std::filesystem::create_directories(dir / "reports");
  const auto latest_path = (ckpt_dir / "latest.pt").string();

  TrainState state;
  UnpairedSampler sampler(&ds_x, &ds_y, tcfg.batch_size, derive_seed(tcfg.seed, 0));
  if (resume && std::filesystem::exists(latest_path)) {
    state = load_checkpoint(latest_path);
    sampler.restore(state.sampler_state);
  } else {
    resume = false;
    state = init_train_state(tcfg);
    std::ofstream snap(dir / "config.snapshot");
    snap << cfg.snapshot();
    if (!snap) throw TrainingAbortError("cannot write config snapshot under " + dir.string());
  }

  std::ofstream metrics(dir / "metrics.log", resume ? std::ios::app : std::ios::trunc);
  if (!metrics) throw TrainingAbortError("cannot open metrics log under " + dir.string());

  const int64_t iters = sampler.iterations_per_epoch();
  for (int64_t epoch = state.epoch; epoch < tcfg.epochs; ++epoch) {
    const double lr = lr_at(tcfg, epoch);
    set_lr(*state.opt_g, lr);
    set_lr(*state.opt_d, lr);
    double cycle_sum = 0;
    for (int64_t it = 0; it < iters; ++it) {
      auto report = train_step(state, sampler.next(), tcfg);
      cycle_sum += report.cycle;
      nlohmann::json line = {
          {"epoch", epoch},          {"iter", it},
          {"step", epoch * iters + it}, {"adv_g_xy", report.adv_g_xy},
          {"adv_g_yx", report.adv_g_yx}, {"adv_d_xy", report.adv_d_xy},
          {"adv_d_yx", report.adv_d_yx}, {"cycle", report.cycle},
          {"siou", report.siou},     {"total", report.total}};
      metrics << line.dump() << "\n";
    }
    metrics.flush();
    std::cout << "[sragan] epoch " << (epoch + 1) << "/" << tcfg.epochs << " lr " << lr
              << " mean cycle " << (cycle_sum / static_cast<double>(iters)) << std::endl;

    state.epoch = epoch + 1;
    state.sampler_state = sampler.state();
    save_checkpoint(state, cfg, latest_path);
    if ((epoch + 1) % tcfg.checkpoint_every == 0 || epoch + 1 == tcfg.epochs) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%04lld.pt", static_cast<long long>(epoch + 1));
      save_checkpoint(state, cfg, (ckpt_dir / name).string());
    }
  }
  return latest_path;
}

void save_checkpoint(const TrainState& state, const RunConfig& cfg, const std::string& path) {
  torch::serialize::OutputArchive root;
  root.write("format_version", c10::IValue(static_cast<int64_t>(1)));
  root.write("epoch", c10::IValue(state.epoch));
  root.write("seed", c10::IValue(static_cast<int64_t>(state.seed)));
  root.write("config", c10::IValue(cfg.snapshot()));
  root.write("sampler", c10::IValue(state.sampler_state));

  auto write_module = [&root](const std::string& key, const torch::nn::Module& m) {
    torch::serialize::OutputArchive a;
    m.save(a);
    root.write(key, a);
  };
  write_module("g", *state.g);
  write_module("f", *state.f);
  write_module("d_x", *state.d_x);
  write_module("d_y", *state.d_y);

  torch::serialize::OutputArchive og, od, px, py;
  state.opt_g->save(og);
  state.opt_d->save(od);
  state.pool_x.save(px);
  state.pool_y.save(py);
  root.write("opt_g", og);
  root.write("opt_d", od);
  root.write("pool_x", px);
  root.write("pool_y", py);

  try {
    root.save_to(path);
  } catch (const c10::Error& e) {
    throw TrainingAbortError("cannot write checkpoint '" + path + "': " + e.what());
  }
}

TrainState load_checkpoint(const std::string& path, RunConfig* snapshot_out) {
  if (!std::filesystem::is_regular_file(path))
    throw InitializationError("checkpoint not found: " + path);
  torch::serialize::InputArchive root;
  try {
    root.load_from(path);
  } catch (const c10::Error& e) {
    throw InitializationError("cannot read checkpoint '" + path + "': " + e.what());
  }

  c10::IValue v;
  root.read("config", v);
  const RunConfig cfg = RunConfig::from_text(v.toStringRef());
  if (snapshot_out) *snapshot_out = cfg;

  auto state = init_train_state(TrainConfig::from_run_config(cfg));
  root.read("epoch", v);
  state.epoch = v.toInt();
  root.read("seed", v);
  state.seed = static_cast<uint64_t>(v.toInt());
  root.read("sampler", v);
  state.sampler_state = v.toStringRef();

  auto read_module = [&root](const std::string& key, torch::nn::Module& m) {
    torch::serialize::InputArchive a;
    root.read(key, a);
    m.load(a);
  };
  read_module("g", *state.g);
  read_module("f", *state.f);
  read_module("d_x", *state.d_x);
  read_module("d_y", *state.d_y);

  torch::serialize::InputArchive og, od, px, py;
  root.read("opt_g", og);
  state.opt_g->load(og);
  root.read("opt_d", od);
  state.opt_d->load(od);
  root.read("pool_x", px);
  state.pool_x.load(px);
  root.read("pool_y", py);
  state.pool_y.load(py);
  return state;
}

}  // namespace sragan
