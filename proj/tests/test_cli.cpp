#include <doctest.h>

#include <opencv2/imgcodecs.hpp>

#include <cstdlib>
#include <fstream>

#include "sragan/cli.hpp"
#include "sragan/config.hpp"
#include "sragan/data.hpp"
#include "sragan/synthetic.hpp"
#include "test_helpers.hpp"

using namespace sragan;
namespace fs = std::filesystem;

namespace {

struct CliFixture {
  fs::path base, data, runs;
  std::string config_path;

  CliFixture() {
    base = testing::make_temp_dir("cli");
    data = base / "data";
    runs = base / "runs";
    write_synthetic_task(data, 4, 2, 32, 5);
    setenv("SRAGAN_RUNS_DIR", runs.c_str(), 1);

    config_path = (base / "smoke.cfg").string();
    std::ofstream cfg(config_path);
    cfg << "run.name = cli_smoke\n"
        << "data.root = " << data.string() << "\n"
        << "data.resize_to = 32\n"
        << "trainer.epochs = 1\n"
        << "trainer.decay_start_epoch = 0\n"
        << "trainer.pool_size = 2\n"
        << "gen.base_channels = 8\n"
        << "gen.n_bottleneck = 2\n"
        << "gen.sn_positions = 0\n";
  }
  ~CliFixture() { unsetenv("SRAGAN_RUNS_DIR"); }

  std::string latest() const {
    return (runs / "cli_smoke" / "checkpoints" / "latest.pt").string();
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train, infer and evaluate round trip") {
  CliFixture fx;

  REQUIRE(cmd_train(fx.config_path, {}, false) == 0);
  CHECK(fs::exists(fx.latest()));
  CHECK(fs::exists(fx.runs / "cli_smoke" / "metrics.log"));
  CHECK(fs::exists(fx.runs / "cli_smoke" / "config.snapshot"));

  SUBCASE("infer stylizes a folder, mirroring names, byte-identically") {
    auto out1 = fx.base / "out1";
    auto out2 = fx.base / "out2";
    REQUIRE(cmd_infer(fx.latest(), (fx.data / "testX").string(), out1.string(), {}) == 0);
    REQUIRE(cmd_infer(fx.latest(), (fx.data / "testX").string(), out2.string(), {}) == 0);
    CHECK(fs::exists(out1 / "img_0000.png"));
    CHECK(fs::exists(out1 / "img_0001.png"));
    CHECK(read_file(out1 / "img_0000.png") == read_file(out2 / "img_0000.png"));
    CHECK(read_file(out1 / "img_0001.png") == read_file(out2 / "img_0001.png"));
  }

  SUBCASE("infer resizes a single image to the checkpoint resolution") {
    save_image_png(disk_image(128, 64, 64, 30, 0.9, 0.1), fx.base / "photo.png");
    auto out = fx.base / "single";
    REQUIRE(cmd_infer(fx.latest(), (fx.base / "photo.png").string(), out.string(), {}) == 0);
    auto written = cv::imread((out / "photo.png").string(), cv::IMREAD_COLOR);
    REQUIRE_FALSE(written.empty());
    CHECK(written.cols == 32);  // snapshot data.resize_to
    CHECK(written.rows == 32);
  }

  SUBCASE("evaluate writes a report and honors the sanity flags") {
    EvaluateCliOptions opts;
    opts.report_path = (fx.base / "report.json").string();
    opts.iou_csv = (fx.base / "ious.csv").string();
    REQUIRE(cmd_evaluate(fx.latest(), (fx.data / "testX").string(), (fx.data / "trainY").string(),
                         opts) == 0);
    auto report = read_file(fx.base / "report.json");
    CHECK(report.find("\"fid\"") != std::string::npos);
    auto csv = read_file(fx.base / "ious.csv");
    CHECK(csv.find("index,iou") != std::string::npos);

    EvaluateCliOptions identity;
    identity.identity = true;
    identity.report_path = (fx.base / "identity.json").string();
    REQUIRE(cmd_evaluate(fx.latest(), (fx.data / "testX").string(),
                         (fx.data / "trainY").string(), identity) == 0);
    CHECK(read_file(fx.base / "identity.json").find("\"saliency_miou\": 1.0") !=
          std::string::npos);

    EvaluateCliOptions self_fid;
    self_fid.self_fid = true;
    self_fid.report_path = (fx.base / "selffid.json").string();
    REQUIRE(cmd_evaluate(fx.latest(), (fx.data / "testX").string(),
                         (fx.data / "trainY").string(), self_fid) == 0);
    CHECK(read_file(fx.base / "selffid.json").find("\"fid\": 0.0") != std::string::npos);
  }
}

TEST_CASE("ablation override flows through the config") {
  CliFixture fx;
  REQUIRE(cmd_train(fx.config_path, {"trainer.ablation=no_siou", "run.name=cli_ablation"},
                    false) == 0);
  std::ifstream log(fx.runs / "cli_ablation" / "metrics.log");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    CHECK(line.find("\"siou\":0.0") != std::string::npos);
    ++lines;
  }
  CHECK(lines == 4);
}

TEST_CASE("error paths map to the documented exit codes") {
  CliFixture fx;
  CHECK(cmd_train("/nonexistent.cfg", {}, false) == 2);
  CHECK(cmd_train(fx.config_path, {"trainer.epochs=notanumber"}, false) == 2);
  CHECK(cmd_train(fx.config_path, {"data.root=/no/such/dir"}, false) == 2);

  auto bad_cfg = (fx.base / "bad.cfg").string();
  std::ofstream(bad_cfg) << "unknown.key = 1\n";
  CHECK(cmd_train(bad_cfg, {}, false) == 2);

  CHECK(cmd_infer((fx.base / "missing.pt").string(), (fx.data / "testX").string(),
                  (fx.base / "o").string(), {}) == 1);

  REQUIRE(cmd_train(fx.config_path, {}, false) == 0);
  auto textdir = fx.base / "textonly";
  fs::create_directories(textdir);
  std::ofstream(textdir / "fake.png") << "not an image";
  CHECK(cmd_infer(fx.latest(), textdir.string(), (fx.base / "o2").string(), {}) == 1);

  EvaluateCliOptions opts;
  CHECK(cmd_evaluate(fx.latest(), (fx.base / "nodir").string(), (fx.data / "trainY").string(),
                     opts) == 2);
}

}  // TEST_SUITE
