#include <CLI11.hpp>

#include "sragan/cli.hpp"
#include "sragan/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sragan: saliency-regularized unpaired image-to-image stylization"};
  app.require_subcommand(1);
  app.footer(sragan::RunConfig::describe_keys() +
             "\nRuns are written under $SRAGAN_RUNS_DIR (default ./runs).");

  std::string config_path, checkpoint, input_path, output_path, test_dir, real_dir;
  std::vector<std::string> overrides;
  bool resume = false;
  sragan::EvaluateCliOptions eval_options;

  auto* train = app.add_subcommand("train", "Train from a config file");
  train->add_option("--config", config_path, "flat key = value config file")->required();
  train->add_option("--set", overrides, "override a config key (key=value), repeatable");
  train->add_flag("--resume", resume, "resume from the run's latest checkpoint");

  auto* infer = app.add_subcommand("infer", "Stylize an image file or folder");
  infer->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  infer->add_option("--input", input_path, "image file or folder")->required();
  infer->add_option("--output", output_path, "output folder for stylized PNGs")->required();
  infer->add_option("--set", overrides, "override a snapshot config key, repeatable");

  auto* evaluate = app.add_subcommand("evaluate", "Score FID and Saliency MIOU");
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  evaluate->add_option("--test-dir", test_dir, "folder of source-domain test images")->required();
  evaluate->add_option("--real-dir", real_dir, "folder of real target-domain images")->required();
  evaluate->add_option("--report", eval_options.report_path, "report JSON path");
  evaluate->add_option("--iou-csv", eval_options.iou_csv, "write per-image IOUs as CSV");
  evaluate->add_flag("--identity", eval_options.identity,
                     "sanity mode: score sources against themselves (MIOU = 1)");
  evaluate->add_flag("--self-fid", eval_options.self_fid,
                     "sanity mode: FID of the real set against itself (= 0)");
  evaluate->add_option("--set", overrides, "override a snapshot config key, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0; bad arguments exit 2
  }

  if (train->parsed()) return sragan::cmd_train(config_path, overrides, resume);
  if (infer->parsed()) return sragan::cmd_infer(checkpoint, input_path, output_path, overrides);
  eval_options.overrides = overrides;
  return sragan::cmd_evaluate(checkpoint, test_dir, real_dir, eval_options);
}
