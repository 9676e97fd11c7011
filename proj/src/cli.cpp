#include "sragan/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "sragan/config.hpp"
#include "sragan/data.hpp"
#include "sragan/evaluation.hpp"
#include "sragan/trainer.hpp"

namespace sragan {

namespace fs = std::filesystem;

namespace {

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigurationError& e) {
    std::cerr << "[sragan] configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "[sragan] error: " << e.what() << "\n";
    return 1;
  }
}

RunConfig load_config_with_overrides(const std::string& path,
                                     const std::vector<std::string>& overrides) {
  RunConfig cfg = RunConfig::from_file(path);
  for (const auto& pair : overrides) cfg.set_pair(pair);
  return cfg;
}

fs::path require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw ConfigurationError("missing data folder: " + p.string());
  return p;
}

}  // namespace

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              bool resume) {
  return run_guarded([&] {
    RunConfig cfg = load_config_with_overrides(config_path, overrides);
    const fs::path root = cfg.get_str("data.root");
    if (root.empty()) throw ConfigurationError("data.root is not set");
    const int64_t resize = cfg.get_int("data.resize_to");
    auto ds_x = load_dataset(require_dir(root / "trainX"), resize);
    auto ds_y = load_dataset(require_dir(root / "trainY"), resize);
    const auto final_path = fit(cfg, ds_x, ds_y, resume);
    std::cout << "[sragan] final checkpoint: " << final_path << "\n";
    return 0;
  });
}

int cmd_infer(const std::string& checkpoint, const std::string& input_path,
              const std::string& output_path, const std::vector<std::string>& overrides) {
  return run_guarded([&] {
    RunConfig snapshot;
    auto state = load_checkpoint(checkpoint, &snapshot);
    for (const auto& pair : overrides) snapshot.set_pair(pair);
    state.g->eval();
    const int64_t resize = snapshot.get_int("data.resize_to");

    std::vector<fs::path> inputs;
    if (fs::is_directory(input_path)) {
      for (const auto& entry : fs::directory_iterator(input_path))
        if (entry.is_regular_file()) inputs.push_back(entry.path());
      std::sort(inputs.begin(), inputs.end());
    } else if (fs::is_regular_file(input_path)) {
      inputs.push_back(input_path);
    } else {
      throw ConfigurationError("input path does not exist: " + input_path);
    }

    fs::create_directories(output_path);
    torch::NoGradGuard no_grad;
    int64_t written = 0;
    for (const auto& in : inputs) {
      torch::Tensor x;
      try {
        x = load_image_file(in, resize).unsqueeze(0);
      } catch (const ArgumentError& e) {
        std::cerr << "[sragan] warning: skipping " << in.string() << " (" << e.what() << ")\n";
        continue;
      }
      auto s = detect(state.detector, to_unit_range(x));
      auto y = state.g->forward(x, s);
      save_image_png(y, fs::path(output_path) / (in.stem().string() + ".png"));
      ++written;
    }
    if (written == 0) {
      std::cerr << "[sragan] error: no input image could be stylized\n";
      return 1;
    }
    std::cout << "[sragan] wrote " << written << " stylized image(s) to " << output_path << "\n";
    return 0;
  });
}

int cmd_evaluate(const std::string& checkpoint, const std::string& test_dir,
                 const std::string& real_dir, const EvaluateCliOptions& options) {
  return run_guarded([&] {
    RunConfig snapshot;
    {  // surface checkpoint/config problems before loading datasets
      auto state = load_checkpoint(checkpoint, &snapshot);
      (void)state;
    }
    for (const auto& pair : options.overrides) snapshot.set_pair(pair);
    const int64_t resize = snapshot.get_int("data.resize_to");
    auto test_set = load_dataset(require_dir(test_dir), resize);
    auto real_set = load_dataset(require_dir(real_dir), resize);

    EvalMode mode = EvalMode::kStandard;
    if (options.identity) mode = EvalMode::kIdentity;
    if (options.self_fid) mode = EvalMode::kSelfFid;
    auto report = evaluate(checkpoint, test_set, real_set, snapshot, mode);

    std::cout << "fid = " << report.fid << "\n"
              << "saliency_miou = " << report.saliency_miou << "\n";

    fs::path report_path = options.report_path;
    if (report_path.empty()) {
      const auto dir = run_dir(snapshot) / "reports";
      fs::create_directories(dir);
      report_path = dir / ("eval_" + report.checkpoint_id + ".json");
    }
    std::ofstream out(report_path);
    out << report.to_json() << "\n";
    if (!out) throw TrainingAbortError("cannot write report: " + report_path.string());
    std::cout << "[sragan] report written to " << report_path.string() << "\n";

    if (!options.iou_csv.empty()) {
      std::ofstream csv(options.iou_csv);
      csv << "index,iou\n";
      for (size_t i = 0; i < report.per_image_iou.size(); ++i)
        csv << i << "," << report.per_image_iou[i] << "\n";
      if (!csv) throw TrainingAbortError("cannot write CSV: " + options.iou_csv);
    }
    return 0;
  });
}

}  // namespace sragan
