#pragma once

#include <string>
#include <vector>

namespace sragan {

// Exit codes: 0 success, 1 runtime abort, 2 configuration/parse error.

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              bool resume);

int cmd_infer(const std::string& checkpoint, const std::string& input_path,
              const std::string& output_path, const std::vector<std::string>& overrides);

struct EvaluateCliOptions {
  std::vector<std::string> overrides;
  std::string report_path;  // default: <run dir>/reports/eval_<checkpoint>.json
  std::string iou_csv;      // per-image IOU export; empty disables
  bool identity = false;    // sanity: stylized = source
  bool self_fid = false;    // sanity: FID of the real set against itself
};

int cmd_evaluate(const std::string& checkpoint, const std::string& test_dir,
                 const std::string& real_dir, const EvaluateCliOptions& options);

}  // namespace sragan
