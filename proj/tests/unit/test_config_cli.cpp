/**
 * @file test_config_cli.cpp
 * @brief Unit tests for configuration layering, the command-line front end and plotting
 *
 * Tests cover:
 * - dump/apply round trip over every key
 * - Environment variable naming and layering order file < env < --set
 * - Rejection of unknown keys, malformed values and invariant violations
 * - Exit codes for usage errors, validation errors and runtime failures
 * - synth-data is byte-identical under a fixed seed
 * - Chart rendering from metrics logs and CMC files
 */

#include <gtest/gtest.h>

#include <cstdlib>
#include <map>

#include "fingergan/cli.hpp"
#include "fingergan/config.hpp"
#include "fingergan/plot.hpp"
#include "../support.hpp"

namespace fingergan {
namespace {

using testing_support::TempDir;

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fingergan");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = testing_support::read_file(e.path());
  }
  return out;
}

// -----------------------------------------------------------------------------
// Configuration
// -----------------------------------------------------------------------------

TEST(Config, DumpApplyRoundTrip) {
  config::RunConfig a;
  config::set(a, "train.eta", "0.125");
  config::set(a, "seed", "42");
  config::set(a, "inference.aggregation", "gaussian");
  config::set(a, "train.no_weight", "true");
  config::set(a, "synth.variance_max", "0.0123456789012345");
  config::RunConfig b;
  config::apply_text(b, config::dump(a), "dump");
  EXPECT_EQ(config::dump(a), config::dump(b));
  for (const auto& k : config::keys()) EXPECT_EQ(config::get(a, k), config::get(b, k)) << k;
}

TEST(Config, EnvNames) {
  EXPECT_EQ(config::env_name("train.eta"), "FGAN_TRAIN_ETA");
  EXPECT_EQ(config::env_name("seed"), "FGAN_SEED");
  EXPECT_EQ(config::env_name("inference.gaussian_sigma"), "FGAN_INFERENCE_GAUSSIAN_SIGMA");
}

TEST(Config, LayeringOrder) {
  config::RunConfig c;
  config::apply_text(c, "train.eta = 0.5\n# comment\n\ntrain.batch_size=3\n", "file");
  std::map<std::string, std::string> env{{"FGAN_TRAIN_ETA", "0.25"}};
  config::apply_env(c, [&](const std::string& n) -> std::optional<std::string> {
    const auto it = env.find(n);
    return it == env.end() ? std::nullopt : std::optional<std::string>(it->second);
  });
  EXPECT_EQ(config::get(c, "train.eta"), "0.25");
  EXPECT_EQ(config::get(c, "train.batch_size"), "3");
  config::set(c, "train.eta", "0.75");
  EXPECT_EQ(config::get(c, "train.eta"), "0.75");
}

TEST(Config, RejectsBadInput) {
  config::RunConfig c;
  EXPECT_THROW(config::set(c, "train.nope", "1"), config::ConfigError);
  EXPECT_THROW(config::set(c, "train.eta", "abc"), config::ConfigError);
  EXPECT_THROW(config::set(c, "train.batch_size", "2.5"), config::ConfigError);
  EXPECT_THROW(config::set(c, "train.no_weight", "maybe"), config::ConfigError);
  EXPECT_THROW(config::apply_text(c, "no equals sign\n", "x"), config::ConfigError);
  config::set(c, "train.batch_size", "0");
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, ValidatePropagatesSeed) {
  config::RunConfig c;
  c.seed = 9;
  c.validate();
  EXPECT_EQ(c.synth.seed, 9u);
  EXPECT_EQ(c.train.seed, 9u);
}

TEST(Config, MissingFileFails) {
  config::RunConfig c;
  TempDir dir;
  EXPECT_ANY_THROW(config::apply_file(c, dir / "none.cfg"));
}

// -----------------------------------------------------------------------------
// Command line
// -----------------------------------------------------------------------------

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}), cli::kValidationError);
  EXPECT_EQ(run_cli({"no-such-command"}), cli::kValidationError);
  EXPECT_EQ(run_cli({"train"}), cli::kValidationError);
  EXPECT_EQ(run_cli({"--set", "train.eta=abc", "--dump-config", "selfcheck"}), cli::kValidationError);
}

TEST(Cli, DumpConfigReflectsOverrides) {
  testing::internal::CaptureStdout();
  const int code = run_cli({"--set", "train.eta=0.5", "--dump-config", "selfcheck"});
  const std::string out = testing::internal::GetCapturedStdout();
  EXPECT_EQ(code, cli::kSuccess);
  EXPECT_NE(out.find("train.eta=0.5"), std::string::npos);
}

TEST(Cli, EnvironmentOverridesConfigFile) {
  TempDir dir;
  testing_support::write_file(dir / "c.cfg", "train.eta=0.5\n");
  setenv("FGAN_TRAIN_ETA", "0.25", 1);
  testing::internal::CaptureStdout();
  const int code = run_cli({"--config", (dir / "c.cfg").string(), "--dump-config", "selfcheck"});
  const std::string out = testing::internal::GetCapturedStdout();
  unsetenv("FGAN_TRAIN_ETA");
  EXPECT_EQ(code, cli::kSuccess);
  EXPECT_NE(out.find("train.eta=0.25"), std::string::npos);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  TempDir dir;
  EXPECT_EQ(run_cli({"train", "--data", (dir / "missing").string(), "--out", (dir / "o").string()}),
            cli::kRuntimeFailure);
  EXPECT_EQ(run_cli({"plot", "--metrics", (dir / "none.tsv").string(), "--out", (dir / "p.png").string()}),
            cli::kRuntimeFailure);
}

TEST(Cli, SynthDataIsByteIdenticalUnderSeed) {
  TempDir dir;
  const std::vector<std::string> common{"--seed", "7", "--prints", "1", "--latents-per-print", "2", "--width", "96",
                                        "--height", "96"};
  auto args_a = std::vector<std::string>{"synth-data", "--out", (dir / "a").string()};
  auto args_b = std::vector<std::string>{"synth-data", "--out", (dir / "b").string()};
  args_a.insert(args_a.end(), common.begin(), common.end());
  args_b.insert(args_b.end(), common.begin(), common.end());
  ASSERT_EQ(run_cli(args_a), cli::kSuccess);
  ASSERT_EQ(run_cli(args_b), cli::kSuccess);
  const auto a = tree(dir / "a"), b = tree(dir / "b");
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.count("manifest.tsv"));
  EXPECT_TRUE(a.count("config.txt"));
}

TEST(Cli, SelfcheckPasses) {
  testing::internal::CaptureStdout();
  const int code = run_cli({"selfcheck"});
  const std::string out = testing::internal::GetCapturedStdout();
  EXPECT_EQ(code, cli::kSuccess) << out;
  EXPECT_EQ(out.find("FAIL"), std::string::npos) << out;
}

// -----------------------------------------------------------------------------
// Plotting
// -----------------------------------------------------------------------------

TEST(Plot, RendersLineChart) {
  TempDir dir;
  plot::Series s{"a", {1, 2, 3}, {0.5, std::nan(""), 0.25}};
  plot::render_line_chart({s}, {"t", "x", "y", 320, 200}, dir / "c.png");
  ASSERT_TRUE(std::filesystem::exists(dir / "c.png"));
  EXPECT_GT(std::filesystem::file_size(dir / "c.png"), 1000u);
}

TEST(Plot, RejectsEmptySeries) {
  TempDir dir;
  plot::Series s{"a", {1}, {std::nan("")}};
  EXPECT_ANY_THROW(plot::render_line_chart({s}, {}, dir / "c.png"));
}

TEST(Plot, CmcFromCsv) {
  TempDir dir;
  testing_support::write_file(dir / "cmc.csv", "rank,accuracy\n1,0.5\n2,0.75\n3,1\n");
  plot::plot_cmc(dir / "cmc.csv", dir / "cmc.png");
  EXPECT_TRUE(std::filesystem::exists(dir / "cmc.png"));
}

}  // namespace
}  // namespace fingergan
