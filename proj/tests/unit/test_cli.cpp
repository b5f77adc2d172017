#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <functional>
#include <sstream>

#include "vihsd/cli.hpp"
#include "vihsd/config.hpp"
#include "vihsd/dataset.hpp"
#include "vihsd/error.hpp"

using namespace vihsd;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(VIHSD_SOURCE_DIR) / "data" / "fixture";

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "vihsd");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / "vihsd_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Contract;
}

}  // namespace

TEST_CASE("config defaults keep the published sizes") {
  const auto cfg = parse_run_config("{}");
  CHECK(cfg.recurrent.max_len == 220);
  CHECK(cfg.recurrent.embed_dim == 300);
  CHECK(cfg.recurrent.dropout_rate == 0.2);
  CHECK(cfg.recurrent.lstm_units == 112);
  CHECK(cfg.recurrent.gru_units == 112);
  CHECK(cfg.spec_for(ModelKind::TextCnn).kernel_widths == std::vector<std::size_t>{3, 4, 5});
  CHECK(cfg.spec_for(ModelKind::TextCnn).conv_filters == 100);
  CHECK(cfg.spec_for(ModelKind::BiGruCnn).conv_filters == 64);
  CHECK(cfg.training.batch_size == 32);
  CHECK(cfg.training.learning_rate == 1e-3);
  CHECK(cfg.training.patience == 5);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_run_config(R"({"train_data": "a.csv", "vectors": "/abs/v.vec", "model": "all",
    "model_spec": {"max_len": 20, "kernel_widths": [2, 3]},
    "training": {"class_weighting": "inverse", "val_fraction": 0}})",
                                    "/base/dir");
  CHECK(cfg.train_data == fs::path("/base/dir/a.csv"));
  CHECK(cfg.vectors == fs::path("/abs/v.vec"));
  CHECK(cfg.models.size() == 3);
  CHECK(cfg.recurrent.max_len == 20);
  CHECK(cfg.recurrent.kernel_widths == std::vector<std::size_t>{2, 3});
  CHECK(cfg.training.class_weighting == ClassWeighting::Inverse);
  CHECK(cfg.training.val_fraction == 0.0);

  std::string msg;
  CHECK(kind_of([] { parse_run_config(R"({"epochs": 3})"); }, &msg) == ErrorKind::Config);
  CHECK(msg.find("epochs") != std::string::npos);
  CHECK(kind_of([] { parse_run_config(R"({"training": {"lr": 3}})"); }, &msg) == ErrorKind::Config);
  CHECK(msg.find("training.lr") != std::string::npos);
  CHECK(kind_of([] { parse_run_config(R"({"model_spec": {"max_len": "big"}})"); }, &msg) == ErrorKind::Config);
  CHECK(msg.find("model_spec.max_len") != std::string::npos);
  CHECK(kind_of([] { parse_run_config(R"({"model_spec": {"max_len": -4}})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_run_config(R"({"model_spec": {"dropout_rate": 1.5}})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_run_config("{not json"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_run_config("[]"); }) == ErrorKind::Config);
  CHECK(kind_of([] { load_run_config("/nonexistent/config.json"); }) == ErrorKind::Config);
}

TEST_CASE("the bundled fixture config loads") {
  const auto cfg = load_run_config(kFixture / "config.json");
  CHECK(fs::exists(cfg.train_data));
  CHECK(fs::exists(cfg.vectors));
  CHECK(fs::exists(cfg.lexicon));
  CHECK(cfg.recurrent.max_len == 20);
  CHECK(cfg.recurrent.embed_dim == 16);
  CHECK(read_dataset(cfg.train_data).size() == 64);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == kExitConfig);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"train", "--class-weights", "balanced"}).code == kExitConfig);
  const auto help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("verify") != std::string::npos);
  CHECK(cli({"train"}).code == kExitConfig);  // no data
}

TEST_CASE("train, eval and predict end to end") {
  const auto out = scratch("e2e");
  const auto cfg = (kFixture / "config.json").string();

  const auto missing = cli({"train", "--config", cfg, "--data", (out / "nope.csv").string(), "--out-dir", out.string()});
  CHECK(missing.code == kExitData);
  CHECK(missing.err.rfind("vihsd: error[io]: ", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  const auto trained = cli({"train", "--config", cfg, "--model", "all", "--out-dir", out.string(), "--seed", "7"});
  REQUIRE(trained.code == kExitOk);
  for (const char* m : {"textcnn", "bigru-cnn", "bigru-lstm-cnn"}) {
    CHECK(fs::exists(out / m / "history.csv"));
    CHECK(fs::exists(out / m / "report.txt"));
    CHECK(fs::exists(out / m / "checkpoint" / "manifest"));
  }
  CHECK(fs::exists(out / "comparison.txt"));
  CHECK(trained.out.find("bigru-lstm-cnn") != std::string::npos);

  const auto run_dir = (out / "bigru-lstm-cnn").string();
  const auto data = (kFixture / "train.csv").string();
  const auto eval = cli({"eval", "--checkpoint", run_dir, "--data", data, "--output", (out / "eval.csv").string()});
  REQUIRE(eval.code == kExitOk);
  CHECK(eval.out.find("(n=64)") != std::string::npos);
  CHECK(eval.out.find("macro-F1 100.000") != std::string::npos);
  CHECK(read_file(out / "eval.csv").rfind("class,precision,recall,f1,support\n", 0) == 0);

  fs::path empty = out / "empty.csv";
  write_file_atomic(empty, "text,label\n");
  CHECK(cli({"eval", "--checkpoint", run_dir, "--data", empty.string()}).code == kExitData);

  const std::string lines = "Không ai rãnh mà nói chuyện với mày đâu thằng ngũ\ncảm ơn bạn\ncảm ơn bạn\n";
  const auto pred = cli({"predict", "--checkpoint", run_dir}, lines);
  REQUIRE(pred.code == kExitOk);
  const auto parsed = parse_dataset(pred.out);
  REQUIRE(parsed.size() == 3);
  REQUIRE(parsed.labels.has_value());
  for (int y : *parsed.labels) CHECK((y >= 0 && y <= 2));
  std::istringstream rows(pred.out);
  std::vector<std::string> row_lines;
  for (std::string l; std::getline(rows, l);) row_lines.push_back(l);
  CHECK(row_lines[2] == row_lines[3]);

  const auto nothing = cli({"predict", "--checkpoint", run_dir}, "");
  CHECK(nothing.code == kExitOk);
  CHECK(nothing.out.empty());

  const auto from_csv = cli({"predict", "--checkpoint", run_dir, "--input", data, "--output", (out / "p.csv").string()});
  CHECK(from_csv.code == kExitOk);
  CHECK(parse_dataset(read_file(out / "p.csv")).size() == 64);
  CHECK(cli({"predict", "--checkpoint", run_dir, "--input", (out / "nope.csv").string()}).code == kExitData);

  // A vocabulary that does not match the checkpoint is a config-class failure.
  write_file_atomic(out / "bigru-lstm-cnn" / "checkpoint" / "vocab", "[PAD]\n[UNK]\nx\n");
  CHECK(cli({"eval", "--checkpoint", run_dir, "--data", data}).code == kExitConfig);
}

TEST_CASE("diverging training exits with the numeric code") {
  const auto out = scratch("nan");
  const auto cfg_path = out / "config.json";
  const std::string json = std::string(R"({"train_data": ")") + (kFixture / "train.csv").string() +
                           R"(", "model": "textcnn", "model_spec": {"max_len": 10, "embed_dim": 4, "textcnn_filters": 2},
       "training": {"learning_rate": 1e30, "max_epochs": 20, "val_fraction": 0}})";
  write_file_atomic(cfg_path, json);
  const auto r = cli({"train", "--config", cfg_path.string(), "--out-dir", out.string()});
  CHECK(r.code == kExitNumeric);
  CHECK(r.err.find("learning_rate") != std::string::npos);
}

TEST_CASE("verify command") {
  const auto ok = cli({"verify"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("checks passed") != std::string::npos);
  const auto bad = cli({"verify", "--inject-fault", "lstm"});
  CHECK(bad.code == kExitFailure);
  CHECK(bad.err.find("lstm") != std::string::npos);
  CHECK(cli({"verify"}).code == kExitOk);  // the hook is reset afterwards
}
