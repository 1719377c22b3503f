#include "fingergan/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fingergan/image_io.hpp"
#include "fingergan/log.hpp"

namespace fingergan::dataset {
namespace {

namespace fs = std::filesystem;

constexpr const char* kColumns =
    "id\tskeleton\tgray\torient\tweight\tminutiae\tk\ttheta_deg\te_x\te_y\ts_x\ts_y\tvariance\tlambda\tbackground\tcrop_x\t"
    "crop_y";

RealGrid to_float32(const RealGrid& g) {
  RealGrid out(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) out.values()[i] = static_cast<float>(g.values()[i]);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '\t')) out.push_back(cell);
  return out;
}

}  // namespace

std::string print_id(const std::string& example_id) {
  const auto dash = example_id.find('-');
  return dash == std::string::npos ? example_id : example_id.substr(0, dash);
}

Example make_example(std::string id, const synthesis::GroundTruth& gt, const synthesis::LatentSample& latent) {
  Example e;
  e.id = std::move(id);
  e.latent = quantize_8bit(latent.texture).grid();
  e.skeleton = gt.skeleton.as_real();
  e.gray = quantize_8bit(gt.gray).grid();
  RealGrid angle(gt.orientation.width(), gt.orientation.height());
  for (std::size_t i = 0; i < angle.size(); ++i) angle.values()[i] = static_cast<float>(gt.orientation.angle.values()[i]);
  e.orientation = RealGrid(angle.width(), angle.height());
  for (std::size_t i = 0; i < angle.size(); ++i) e.orientation.values()[i] = angle.values()[i] / std::numbers::pi;
  e.weight = to_float32(gt.weight_map);
  e.genuine = latent.genuine;
  e.draw = latent.draw;
  require_same_dims(e.latent, e.skeleton, "make_example");
  return e;
}

void SynthConfig::validate() const {
  if (prints < 1) throw std::invalid_argument("synth: prints must be >= 1");
  if (backgrounds < 1) throw std::invalid_argument("synth: backgrounds must be >= 1");
  if (background_margin < 0) throw std::invalid_argument("synth: background margin must be >= 0");
  if (max_attempts_per_print < 1) throw std::invalid_argument("synth: max attempts must be >= 1");
  print.validate();
  pair.validate();
}

Dataset synthesize(const SynthConfig& cfg) {
  cfg.validate();
  const RandomSource root(cfg.seed);
  std::vector<GrayImage> backgrounds;
  const RandomSource bg_root = root.derive(0);
  for (int b = 0; b < cfg.backgrounds; ++b) {
    RandomSource r = bg_root.derive(static_cast<std::uint64_t>(b));
    backgrounds.push_back(procedural::generate_background(cfg.print.width + cfg.background_margin,
                                                          cfg.print.height + cfg.background_margin, r));
  }

  const RandomSource print_root = root.derive(1);
  Dataset data;
  for (int p = 0; p < cfg.prints; ++p) {
    const RandomSource stream = print_root.derive(static_cast<std::uint64_t>(p));
    GrayImage rolled;
    bool found = false;
    for (int attempt = 0; attempt < cfg.max_attempts_per_print && !found; ++attempt) {
      RandomSource r = stream.derive(static_cast<std::uint64_t>(attempt));
      rolled = procedural::generate_print(cfg.print, r);
      found = synthesis::passes_quality(rolled, cfg.quality);
    }
    if (!found) {
      throw std::runtime_error("synth: print " + std::to_string(p) + " failed the quality filter " +
                               std::to_string(cfg.max_attempts_per_print) + " times");
    }
    const auto samples = synthesis::build_print_samples(rolled, backgrounds, stream.derive(1u << 20), cfg.pair);
    char pid[16];
    std::snprintf(pid, sizeof pid, "p%04d", p);
    for (std::size_t l = 0; l < samples.latents.size(); ++l) {
      char lid[16];
      std::snprintf(lid, sizeof lid, "-l%02zu", l);
      data.examples.push_back(make_example(std::string(pid) + lid, samples.gt, samples.latents[l]));
    }
    log::debug("synth: print " + std::string(pid) + " has " + std::to_string(samples.gt.minutiae.size()) + " minutiae");
  }
  return data;
}

void write_dataset(const Dataset& data, const fs::path& dir, const SynthConfig& cfg) {
  for (const char* sub : {"latents", "skeletons", "grays", "orients", "weights", "minutiae"}) {
    fs::create_directories(dir / sub);
  }
  std::ostringstream manifest;
  manifest << "# texture_offset=" << format_double(cfg.pair.scaling.offset)
           << " texture_scale=" << format_double(cfg.pair.scaling.scale) << " seed=" << cfg.seed
           << " prints=" << cfg.prints << " latents_per_print=" << cfg.pair.latents_per_print << "\n";
  manifest << kColumns << "\n";
  std::string last_print;
  for (const Example& e : data.examples) {
    const std::string p = print_id(e.id);
    save_gray_image(GrayImage::from_grid(e.latent), dir / "latents" / (e.id + ".png"));
    if (p != last_print) {
      save_skeleton(SkeletonMap::threshold(e.skeleton, 0.5, false), dir / "skeletons" / (p + ".png"));
      save_gray_image(GrayImage::from_grid(e.gray), dir / "grays" / (p + ".png"));
      RealGrid angle(e.orientation.width(), e.orientation.height());
      for (std::size_t i = 0; i < angle.size(); ++i) angle.values()[i] = e.orientation.values()[i] * std::numbers::pi;
      write_grid(angle, dir / "orients" / (p + ".grid"));
      write_grid(e.weight, dir / "weights" / (p + ".grid"));
      last_print = p;
    }
    write_minutiae(e.genuine, dir / "minutiae" / (e.id + ".txt"));
    const auto& d = e.draw;
    manifest << e.id << "\tskeletons/" << p << ".png\tgrays/" << p << ".png\torients/" << p << ".grid\tweights/" << p
             << ".grid\tminutiae/" << e.id << ".txt";
    for (double v : {d.distortion.k, d.distortion.theta_deg, d.distortion.e.x, d.distortion.e.y, d.distortion.s_x,
                     d.distortion.s_y, d.variance, d.lambda}) {
      manifest << '\t' << format_double(v);
    }
    manifest << '\t' << d.background_index << '\t' << d.crop_x << '\t' << d.crop_y << "\n";
  }
  std::ofstream out(dir / "manifest.tsv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.tsv").string());
  out << manifest.str();
  if (!out) throw std::runtime_error("failed writing " + (dir / "manifest.tsv").string());
}

Dataset read_dataset(const fs::path& dir) {
  std::ifstream in(dir / "manifest.tsv");
  if (!in) throw std::runtime_error("dataset: no manifest.tsv in " + dir.string());
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  Dataset data;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kColumns) throw std::runtime_error("dataset: unexpected manifest header at line " + std::to_string(lineno));
      header_seen = true;
      continue;
    }
    const auto cells = split_tabs(line);
    if (cells.size() != 17) throw std::runtime_error("dataset: manifest line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " columns");
    Example e;
    e.id = cells[0];
    e.latent = load_gray_image(dir / "latents" / (e.id + ".png")).grid();
    e.skeleton = load_skeleton(dir / cells[1]).as_real();
    e.gray = load_gray_image(dir / cells[2]).grid();
    const RealGrid angle = read_grid(dir / cells[3]);
    e.orientation = RealGrid(angle.width(), angle.height());
    for (std::size_t i = 0; i < angle.size(); ++i) e.orientation.values()[i] = angle.values()[i] / std::numbers::pi;
    e.weight = read_grid(dir / cells[4]);
    e.genuine = read_minutiae(dir / cells[5]);
    auto& d = e.draw;
    d.distortion.k = std::stod(cells[6]);
    d.distortion.theta_deg = std::stod(cells[7]);
    d.distortion.e = {std::stod(cells[8]), std::stod(cells[9])};
    d.distortion.s_x = std::stod(cells[10]);
    d.distortion.s_y = std::stod(cells[11]);
    d.variance = std::stod(cells[12]);
    d.lambda = std::stod(cells[13]);
    d.background_index = std::stoul(cells[14]);
    d.crop_x = std::stoi(cells[15]);
    d.crop_y = std::stoi(cells[16]);
    for (const RealGrid* g : {&e.skeleton, &e.gray, &e.orientation, &e.weight}) {
      require_same_dims(e.latent, *g, ("dataset example " + e.id).c_str());
    }
    data.examples.push_back(std::move(e));
  }
  if (!header_seen) throw std::runtime_error("dataset: manifest.tsv has no header");
  return data;
}

}  // namespace fingergan::dataset
