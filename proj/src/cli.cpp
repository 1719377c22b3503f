#include "fingergan/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "fingergan/checkpoint.hpp"
#include "fingergan/config.hpp"
#include "fingergan/dataset.hpp"
#include "fingergan/evaluation.hpp"
#include "fingergan/image_io.hpp"
#include "fingergan/inference.hpp"
#include "fingergan/log.hpp"
#include "fingergan/plot.hpp"
#include "fingergan/selfcheck.hpp"
#include "fingergan/skeleton.hpp"
#include "fingergan/training.hpp"
#include "fingergan/tvdecomp.hpp"

namespace fingergan::cli {
namespace {

namespace fs = std::filesystem;

/// A command-line option that overrides one config key when given.
struct Binding {
  CLI::Option* option = nullptr;
  std::string key;
  std::string value;
  bool flag = false;
};

class Bindings {
 public:
  void value(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    Binding& b = items_.emplace_back();
    b.key = key;
    b.option = app->add_option(name, b.value, help + " [" + key + "]");
  }
  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    Binding& b = items_.emplace_back();
    b.key = key;
    b.flag = true;
    b.option = app->add_flag(name)->description(help + " [" + key + "=true]");
  }
  void apply(config::RunConfig& cfg) const {
    for (const Binding& b : items_) {
      if (b.option->count() > 0) config::set(cfg, b.key, b.flag ? "true" : b.value);
    }
  }

 private:
  std::deque<Binding> items_;  // stable addresses for CLI11's bound strings
};

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Effective configuration recorded next to a command's outputs; reloadable with --config.
void write_run_record(const fs::path& dir, const std::string& command, const config::RunConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.txt");
  out << "# fingergan " << command << "\n" << config::dump(cfg);
  if (!out) throw std::runtime_error("cannot write " + (dir / "config.txt").string());
}

std::map<std::string, MinutiaSet> read_minutia_dir(const fs::path& dir) {
  std::map<std::string, MinutiaSet> out;
  for (const auto& p : files_with_extension(dir, ".txt")) out.emplace(p.stem().string(), read_minutiae(p));
  return out;
}

void cmd_synth(const config::RunConfig& cfg, const fs::path& out) {
  log::info("synth-data: " + std::to_string(cfg.synth.prints) + " prints, seed " + std::to_string(cfg.seed));
  const dataset::Dataset data = dataset::synthesize(cfg.synth);
  dataset::write_dataset(data, out, cfg.synth);
  write_run_record(out, "synth-data", cfg);
  std::cout << "wrote " << data.size() << " examples to " << out.string() << "\n";
}

void cmd_train(const config::RunConfig& cfg, const fs::path& data_dir, const fs::path& out, bool resume,
               const std::string& eval_dir) {
  const dataset::Dataset data = dataset::read_dataset(data_dir);
  training::Trainer trainer(cfg.train, data);
  const fs::path ckpt_dir = out / "checkpoints";
  const fs::path latest = ckpt_dir / "latest.ckpt";
  bool append = false;
  if (resume && fs::exists(latest)) {
    trainer.restore(checkpoint::read_checkpoint(latest));
    append = true;
    log::info("train: resuming at iteration " + std::to_string(trainer.iteration()));
  }
  fs::create_directories(ckpt_dir);
  write_run_record(out, "train", cfg);
  log::info("train: mode " + cfg.train.ablations.mode() + ", seed " + std::to_string(cfg.seed));
  training::MetricsLog metrics(out / "metrics.tsv", cfg.train, append);
  trainer.run(&metrics, ckpt_dir);
  std::cout << "trained to iteration " << trainer.iteration() << "; checkpoint " << latest.string() << "\n";
  if (!eval_dir.empty()) {
    const double l = trainer.evaluate(dataset::read_dataset(eval_dir));
    std::ofstream(out / "eval.txt") << "weighted_l1=" << l << "\n";
    std::cout << "held-out weighted L1 " << l << "\n";
  }
}

void cmd_enhance(const config::RunConfig& cfg, const fs::path& ckpt, const fs::path& in, const fs::path& out,
                 bool binarize, bool decompose) {
  nn::Generator gen = training::load_generator(checkpoint::read_checkpoint(ckpt));
  inference::GeneratorPredictor predictor(gen);
  const auto inputs = files_with_extension(in, ".png");
  if (inputs.empty()) throw std::invalid_argument("enhance: no .png files in " + in.string());
  fs::create_directories(out / "enhanced");
  if (binarize) {
    fs::create_directories(out / "skeletons");
    fs::create_directories(out / "minutiae");
  }
  write_run_record(out, "enhance", cfg);
  for (const auto& path : inputs) {
    GrayImage img = load_gray_image(path);
    if (decompose) img = tv::texture_component(img, cfg.enhance_tv, cfg.synth.pair.scaling);
    const GrayImage enhanced = inference::enhance_full_image(img, predictor, cfg.inference);
    const std::string stem = path.stem().string();
    save_gray_image(enhanced, out / "enhanced" / (stem + ".png"));
    if (binarize) {
      const SkeletonMap skel = skeleton::thin(inference::binarize_output(enhanced));
      save_skeleton(skel, out / "skeletons" / (stem + ".png"));
      write_minutiae(skeleton::extract_minutiae(skel, cfg.synth.pair.minutiae), out / "minutiae" / (stem + ".txt"));
    }
    log::info("enhance: " + stem);
  }
  std::cout << "enhanced " << inputs.size() << " images into " << out.string() << "\n";
}

void cmd_recover(const config::RunConfig& cfg, const fs::path& extracted, const fs::path& genuine, const fs::path& out) {
  const auto ex = read_minutia_dir(extracted);
  if (ex.empty()) throw std::invalid_argument("eval recover: no minutia files in " + extracted.string());
  const auto gen = read_minutia_dir(genuine);
  evaluation::RecoveryReport report;
  for (const auto& [id, set] : ex) {
    const auto it = gen.find(id);
    if (it == gen.end()) throw std::invalid_argument("eval recover: no genuine minutiae for '" + id + "'");
    auto row = evaluation::match_minutiae(set, it->second, cfg.match);
    row.id = id;
    report.add(std::move(row));
  }
  const std::string tsv = report.to_tsv();
  if (out.empty()) {
    std::cout << tsv;
  } else {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream(out) << tsv;
    std::cout << "recovered " << report.total_recovered << " of " << report.total_genuine << " genuine minutiae, "
              << report.total_fake << " fake; report " << out.string() << "\n";
  }
}

/// Gallery entry sharing the probe's id, else the probe's print id.
std::size_t find_mate(const std::vector<std::string>& gallery, const std::string& probe) {
  for (const std::string& key : {probe, dataset::print_id(probe)}) {
    const auto it = std::find(gallery.begin(), gallery.end(), key);
    if (it != gallery.end()) return static_cast<std::size_t>(it - gallery.begin());
  }
  throw std::invalid_argument("eval cmc: probe '" + probe + "' has no mate in the gallery");
}

void cmd_cmc(const config::RunConfig& cfg, const fs::path& probes, const fs::path& gallery, const fs::path& out,
             const fs::path& plot_out) {
  const auto p = read_minutia_dir(probes), g = read_minutia_dir(gallery);
  if (p.empty() || g.empty()) throw std::invalid_argument("eval cmc: empty probe or gallery directory");
  std::vector<std::string> gallery_ids;
  std::vector<const MinutiaSet*> gallery_sets;
  for (const auto& [id, set] : g) {
    gallery_ids.push_back(id);
    gallery_sets.push_back(&set);
  }
  evaluation::ScoreMatrix m;
  for (const auto& [id, set] : p) {
    m.true_mate.push_back(find_mate(gallery_ids, id));
    std::vector<double> row;
    for (const MinutiaSet* gs : gallery_sets) row.push_back(evaluation::similarity_score(set, *gs, cfg.similarity));
    m.scores.push_back(std::move(row));
  }
  const auto curve = evaluation::cmc_curve(m);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream(out) << evaluation::cmc_to_csv(curve);
  const fs::path png = plot_out.empty() ? fs::path(out).replace_extension(".png") : plot_out;
  plot::plot_cmc(out, png);
  std::cout << "rank-1 " << curve.front() << " over " << p.size() << " probes; " << out.string() << ", " << png.string()
            << "\n";
}

int cmd_selfcheck() {
  const auto results = selfcheck::run_all();
  std::size_t failed = 0;
  for (const auto& r : results) {
    failed += !r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.module << ": " << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kSuccess : kRuntimeFailure;
}

log::Level parse_level(const std::string& s) {
  static const std::map<std::string, log::Level> levels{{"debug", log::Level::debug}, {"info", log::Level::info},
                                                        {"warn", log::Level::warn},   {"error", log::Level::error},
                                                        {"off", log::Level::off}};
  const auto it = levels.find(s);
  if (it == levels.end()) throw config::ConfigError("unknown log level '" + s + "'");
  return it->second;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Latent fingerprint enhancement with a skip-connected generator trained adversarially", "fingergan"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file, log_level = "info";
  std::vector<std::string> overrides;
  bool dump_config = false;
  app.add_option("--config", config_file, "key=value configuration file");
  app.add_option("--set", overrides, "override one key, KEY=VALUE (repeatable; highest precedence)");
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");
  app.add_option("--log-level", log_level, "debug|info|warn|error|off")->capture_default_str();

  Bindings bind;
  std::string out, data_dir, checkpoint_path, in_dir, extracted, genuine, probes, gallery, metrics, cmc, plot_out,
      eval_dir;
  bool resume = false, binarize = false, decompose = false;

  auto* synth = app.add_subcommand("synth-data", "synthesize latent/ground-truth training pairs");
  synth->add_option("--out", out, "dataset directory")->required();
  bind.value(synth, "--seed", "seed", "random seed");
  bind.value(synth, "--prints", "synth.prints", "procedural rolled prints");
  bind.value(synth, "--latents-per-print", "synth.latents_per_print", "latents per print");
  bind.value(synth, "--width", "synth.width", "print width");
  bind.value(synth, "--height", "synth.height", "print height");

  auto* train = app.add_subcommand("train", "train the generator (and discriminator)");
  train->add_option("--data", data_dir, "dataset directory from synth-data")->required();
  train->add_option("--out", out, "run directory")->required();
  train->add_flag("--resume", resume, "continue from <out>/checkpoints/latest.ckpt when present");
  train->add_option("--eval-data", eval_dir, "held-out dataset; writes <out>/eval.txt");
  bind.value(train, "--seed", "seed", "random seed");
  bind.value(train, "--iterations", "train.iterations", "total iterations");
  bind.value(train, "--batch-size", "train.batch_size", "batch size");
  bind.value(train, "--patch", "train.patch", "training patch side");
  bind.value(train, "--generator-channels", "train.generator_channels", "generator C1 width");
  bind.value(train, "--discriminator-channels", "train.discriminator_channels", "discriminator C1 width");
  bind.value(train, "--lr", "train.learning_rate", "Adam learning rate");
  bind.value(train, "--eta", "train.eta", "reconstruction weight");
  bind.value(train, "--checkpoint-every", "train.checkpoint_every", "checkpoint interval");
  bind.flag(train, "--no-discriminator", "train.no_discriminator", "train on the reconstruction loss alone");
  bind.flag(train, "--gray-gt", "train.gray_gt", "use the gray rolled print as target");
  bind.flag(train, "--no-weight", "train.no_weight", "uniform reconstruction weights");

  auto* enhance = app.add_subcommand("enhance", "enhance full images with a trained generator");
  enhance->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  enhance->add_option("--in", in_dir, "directory of .png inputs")->required();
  enhance->add_option("--out", out, "output directory")->required();
  enhance->add_flag("--binarize", binarize, "also write skeletons and extracted minutiae");
  enhance->add_flag("--decompose", decompose, "apply the TV decomposition to raw latents first");
  bind.value(enhance, "--window", "inference.window", "sliding window side");
  bind.value(enhance, "--step", "inference.step", "sliding window step");
  bind.value(enhance, "--aggregation", "inference.aggregation", "mean|gaussian");

  auto* eval = app.add_subcommand("eval", "minutia recovery and identification");
  eval->require_subcommand(1);
  auto* recover = eval->add_subcommand("recover", "recovered genuine / introduced fake minutiae");
  recover->add_option("--extracted", extracted, "directory of extracted minutia files")->required();
  recover->add_option("--genuine", genuine, "directory of genuine minutia files, same names")->required();
  recover->add_option("--out", out, "TSV report (stdout when omitted)");
  bind.value(recover, "--loc-radius", "match.loc_radius", "location tolerance, pixels");
  bind.value(recover, "--angle-tol-deg", "match.angle_tol_deg", "angle tolerance, degrees");
  auto* cmc_cmd = eval->add_subcommand("cmc", "cumulative match characteristic");
  cmc_cmd->add_option("--probes", probes, "directory of probe minutia files")->required();
  cmc_cmd->add_option("--gallery", gallery, "directory of gallery minutia files")->required();
  cmc_cmd->add_option("--out", out, "CSV output")->required();
  cmc_cmd->add_option("--plot", plot_out, "curve image (default: CSV path with .png)");
  bind.value(cmc_cmd, "--loc-radius", "similarity.loc_radius", "pairing distance, pixels");

  auto* plot_cmd = app.add_subcommand("plot", "render a metrics log or CMC CSV");
  auto* metrics_opt = plot_cmd->add_option("--metrics", metrics, "training metrics TSV");
  auto* cmc_opt = plot_cmd->add_option("--cmc", cmc, "CMC CSV");
  metrics_opt->excludes(cmc_opt);
  plot_cmd->add_option("--out", out, "image file")->required();

  auto* check = app.add_subcommand("selfcheck", "run the analytic example suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kValidationError;
  }

  config::RunConfig cfg;
  try {
    log::set_level(parse_level(log_level));
    if (!config_file.empty()) config::apply_file(cfg, config_file);
    config::apply_env(cfg, config::process_env);
    bind.apply(cfg);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw config::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      config::set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  }
  if (dump_config) {
    std::cout << config::dump(cfg);
    return kSuccess;
  }

  try {
    if (synth->parsed()) cmd_synth(cfg, out);
    if (train->parsed()) cmd_train(cfg, data_dir, out, resume, eval_dir);
    if (enhance->parsed()) cmd_enhance(cfg, checkpoint_path, in_dir, out, binarize, decompose);
    if (recover->parsed()) cmd_recover(cfg, extracted, genuine, out);
    if (cmc_cmd->parsed()) cmd_cmc(cfg, probes, gallery, out, plot_out);
    if (plot_cmd->parsed()) {
      if (!metrics.empty()) {
        plot::plot_metrics(metrics, out);
      } else if (!cmc.empty()) {
        plot::plot_cmc(cmc, out);
      } else {
        throw std::invalid_argument("plot: give --metrics or --cmc");
      }
      std::cout << "wrote " << out << "\n";
    }
    if (check->parsed()) return cmd_selfcheck();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kSuccess;
}

}  // namespace fingergan::cli
