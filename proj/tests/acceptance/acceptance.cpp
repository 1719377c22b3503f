/**
 * @file acceptance.cpp
 * @brief Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure
 *
 * Criteria:
 *  1 weight map vs direct summation      7 loss gradients vs finite differences
 *  2 distortion analytics                 8 toy training loss reduction, --no-weight trajectory
 *  3 speckle moments                      9 inference tiling
 *  4 TV reconstruction and descent       10 matching, CMC, similarity
 *  5 FOMFE recovery and smoothing        11 CLI end-to-end, deterministic
 *  6 network shapes and parameter counts 12 full vs --no-discriminator on held-out data
 *
 * Every check recomputes its reference independently (tests/oracles.hpp or
 * closed forms written here) and includes the runtime budget.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fingergan/cli.hpp"
#include "fingergan/dataset.hpp"
#include "fingergan/distortion.hpp"
#include "fingergan/evaluation.hpp"
#include "fingergan/inference.hpp"
#include "fingergan/losses.hpp"
#include "fingergan/log.hpp"
#include "fingergan/nn/network.hpp"
#include "fingergan/orientation.hpp"
#include "fingergan/random.hpp"
#include "fingergan/synthesis.hpp"
#include "fingergan/training.hpp"
#include "fingergan/tvdecomp.hpp"
#include "fingergan/weightmap.hpp"
#include "../oracles.hpp"
#include "../support.hpp"

namespace {

using namespace fingergan;
namespace fs = std::filesystem;
using testing_support::TempDir;

constexpr double kPi = std::numbers::pi;

/// Outcome of one criterion; `detail` carries the measured quantities.
struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

GrayImage random_lattice_image(int w, int h, RandomSource& rng) {
  GrayImage img(w, h);
  for (double& v : img.values()) v = snap_intensity(rng.uniform01());
  return img;
}

nn::Tensor random_tensor(int n, int c, int h, int w, RandomSource& rng) {
  nn::Tensor t(n, c, h, w);
  for (float& v : t.data) v = static_cast<float>(rng.uniform01());
  return t;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fingergan");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing_support::read_file(e.path());
  }
  return out;
}

// -----------------------------------------------------------------------------

void weight_map_oracle(Outcome& o) {
  const weightmap::WeightMapParams defaults;
  o.require(defaults.sigma == 8.0 && defaults.r == 17, "defaults sigma=8, r=17");
  double total = 0.0;
  for (int v = -17; v <= 17; ++v) {
    for (int u = -17; u <= 17; ++u) total += oracle::gaussian(u, v, 8.0);
  }
  const double w0 = oracle::gaussian(17, 17, 8.0) / total;
  const double w0_err = std::abs(weightmap::floor_value(defaults) - w0);
  o.require(w0_err <= 1e-15, "floor value");

  RandomSource rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    MaskGrid m(64, 64, 0);
    const auto count = rng.uniform_int(0, 30);
    for (std::int64_t i = 0; i < count; ++i) m(static_cast<int>(rng.uniform_int(0, 63)), static_cast<int>(rng.uniform_int(0, 63))) = 1;
    const RealGrid fast = weightmap::build_weight_map(m, defaults);
    const RealGrid ref = oracle::weight_map(m, 8.0, 17);
    for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast.values()[i] - ref.values()[i]));
  }
  o.require(worst <= 1e-10, "max abs error <= 1e-10");
  o.detail << "w0=" << fmt(w0) << " max_err=" << fmt(worst);
}

void distortion_analytics(Outcome& o) {
  RandomSource rng(102);
  GrayImage img = random_lattice_image(80, 64, rng);
  distortion::DistortionParams id;
  id.k = 1.3;
  id.rotation_center = id.ellipse_center = {40, 32};
  id.s_x = 20;
  id.s_y = 30;
  o.require(distortion::distort_image(img, id) == img, "identity bit-exact");

  double cont = 0.0, mid = 0.0;
  for (double k : {0.25, 0.5, 1.0, 1.7, 2.0}) {
    cont = std::max(cont, std::abs(distortion::gradual_transition(0.0, k) - distortion::gradual_transition(1e-12, k)));
    cont = std::max(cont, std::abs(distortion::gradual_transition(k, k) - distortion::gradual_transition(k - 1e-12, k)));
    cont = std::max(cont, std::abs(distortion::gradual_transition(k + 1e-12, k) - 1.0));
    cont = std::max(cont, std::abs(distortion::gradual_transition(-1e-12, k)));
    mid = std::max(mid, std::abs(distortion::gradual_transition(k / 2, k) - 0.5));
  }
  o.require(cont <= 1e-9, "continuity at h in {0,k}");
  o.require(mid <= 1e-12, "g(k/2) = 0.5");

  // Boundary points with exactly representable coordinates: the axis
  // vertices and Pythagorean-triple points (a/c, b/c) scaled by c.
  double boundary = 0.0;
  const int triples[][3] = {{0, 1, 1}, {1, 0, 1}, {3, 4, 5}, {4, 3, 5}, {5, 12, 13}, {8, 15, 17}, {7, 24, 25}, {20, 21, 29}};
  for (const auto& t : triples) {
    distortion::DistortionParams p;
    p.ellipse_center = {50, 40};
    p.s_x = 2.0 * t[2];
    p.s_y = 3.0 * t[2];
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        const distortion::Vec2 b{50 + sx * 2.0 * t[0], 40 + sy * 3.0 * t[1]};
        boundary = std::max(boundary, std::abs(distortion::ellipse_distance(b, p)));
      }
    }
  }
  o.require(boundary <= 1e-9, "ellipse boundary h = 0");
  o.detail << "continuity=" << fmt(cont) << " midpoint=" << fmt(mid) << " boundary=" << fmt(boundary);
}

void speckle_statistics(Outcome& o) {
  const double var = 0.01;
  RandomSource rng(103);
  constexpr int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = synthesis::speckle_noise(var, rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sample_var = sq / n - mean * mean;
  const double bound = 3.0 * std::sqrt(var / n);
  o.require(std::abs(mean) <= bound, "|mean| <= 3 sqrt(var/n)");
  o.require(std::abs(sample_var - var) <= 0.05 * var, "variance within 5%");
  o.detail << "mean=" << fmt(mean) << " (bound " << fmt(bound) << ") var=" << fmt(sample_var);
}

void tv_decomposition(Outcome& o) {
  RandomSource rng(104);
  tv::TVConfig cfg;
  cfg.tolerance = 1e-14;  // run every iteration
  std::size_t steps = 0;
  double worst_rise = -1e300;
  for (int trial = 0; trial < 5; ++trial) {
    const GrayImage f = random_lattice_image(64, 64, rng);
    const tv::Decomposition d = tv::decompose(f, cfg, true);
    bool exact = true;
    for (std::size_t i = 0; i < f.size(); ++i) exact &= d.cartoon.values()[i] + d.texture.values()[i] == f.values()[i];
    o.require(exact, "cartoon + texture == input");
    for (std::size_t i = 1; i < d.objective.size(); ++i) {
      worst_rise = std::max(worst_rise, d.objective[i] - d.objective[i - 1]);
      ++steps;
    }
    // Final objective against the independent ROF evaluation.
    o.require(std::abs(oracle::rof_objective(d.cartoon, f, cfg.fidelity_weight) - d.objective.back()) <= 1e-8,
              "tracked objective matches direct evaluation");
  }
  o.require(steps > 0 && worst_rise <= 1e-10, "objective nonincreasing (slack 1e-10)");
  o.detail << steps << " steps, largest change " << fmt(worst_rise);
}

orientation::FomfeModel random_model(int order, int w, int h, RandomSource& rng) {
  const int n = orientation::FomfeModel::basis_size(order);
  std::vector<double> c(n), s(n);
  for (int i = 0; i < n; ++i) {
    c[i] = rng.normal(0.0, 0.15);
    s[i] = rng.normal(0.0, 0.15);
  }
  c[0] += 2.0;
  return {order, w, h, c, s};
}

void fomfe_consistency(Outcome& o) {
  RandomSource rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto truth = random_model(4, 96, 80, rng);
    const auto field = orientation::evaluate_fomfe(truth);
    const auto fit = orientation::fit_fomfe(field, {4, 8, 0.0});
    const auto back = orientation::evaluate_fomfe(fit.model);
    for (std::size_t i = 0; i < field.angle.size(); ++i) {
      worst = std::max(worst, orientation_difference(field.angle.values()[i], back.angle.values()[i]));
    }
  }
  o.require(worst <= 1e-6, "recovery <= 1e-6 rad");

  int improved = 0;
  double raw_rms = 0.0, fit_rms = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto clean = orientation::evaluate_fomfe(random_model(4, 96, 96, rng));
    auto noisy = clean;
    for (double& t : noisy.angle.values()) t = wrap_orientation(t + rng.normal(0.0, 5.0 * kPi / 180.0));
    const auto fitted = orientation::evaluate_fomfe(orientation::fit_fomfe(noisy, {4, 4, 0.0}).model);
    double raw = 0.0, smooth = 0.0;
    for (std::size_t i = 0; i < clean.angle.size(); ++i) {
      raw += std::pow(orientation_difference(noisy.angle.values()[i], clean.angle.values()[i]), 2);
      smooth += std::pow(orientation_difference(fitted.angle.values()[i], clean.angle.values()[i]), 2);
    }
    raw = std::sqrt(raw / static_cast<double>(clean.angle.size()));
    smooth = std::sqrt(smooth / static_cast<double>(clean.angle.size()));
    improved += smooth < raw;
    raw_rms += raw / 10;
    fit_rms += smooth / 10;
  }
  o.require(improved == 10, "smoothing reduces RMS error in 10/10 trials");
  o.detail << "max_err=" << fmt(worst) << " rad; noise RMS " << fmt(raw_rms) << " -> " << fmt(fit_rms) << " ("
           << improved << "/10)";
}

void architecture_contract(Outcome& o) {
  RandomSource rng(106);
  nn::Generator g;
  g.init(rng);
  const auto trace = g.trace(random_tensor(1, 1, 192, 192, rng));
  const std::vector<std::tuple<std::string, int, int>> expected{
      {"input", 1, 192}, {"C1", 64, 192},  {"C2", 128, 96}, {"C3", 256, 48}, {"C4", 512, 24}, {"C5", 1024, 12},
      {"DC1", 512, 24},  {"DC2", 256, 48}, {"DC3", 128, 96}, {"DC4", 64, 192}, {"DC5", 1, 192}};
  bool shapes = trace.size() == expected.size();
  for (std::size_t i = 0; shapes && i < trace.size(); ++i) {
    shapes = trace[i].name == std::get<0>(expected[i]) && trace[i].channels == std::get<1>(expected[i]) &&
             trace[i].height == std::get<2>(expected[i]) && trace[i].width == std::get<2>(expected[i]);
  }
  o.require(shapes, "generator trace 192/96/48/24/12 with table widths");

  nn::Discriminator d;
  d.init(rng);
  const nn::Tensor s = d.forward(random_tensor(2, 2, 192, 192, rng), false, false);
  bool scalar = s.n == 2 && s.c == 1 && s.h == 1 && s.w == 1;
  for (float v : s.data) scalar &= v > 0.0f && v < 1.0f;
  o.require(scalar, "discriminator scalar in (0,1)");

  const std::size_t gp = g.parameter_count(), dp = d.parameter_count();
  o.require(gp == oracle::generator_parameters(64), "generator parameter count");
  o.require(dp == oracle::discriminator_parameters(64), "discriminator parameter count");
  o.detail << "G params " << gp << ", D params " << dp << ", D scores " << fmt(s.data[0]) << "/" << fmt(s.data[1]);
}

void gradient_checks(Outcome& o) {
  RandomSource rng(107);
  // Reconstruction: 2 x 8 x 8 tensors; L1 is linear between kinks, so probes
  // stay at least 2h from them.
  const nn::Tensor g = random_tensor(2, 1, 8, 8, rng);
  nn::Tensor w = random_tensor(2, 1, 8, 8, rng), out = random_tensor(2, 1, 8, 8, rng);
  for (float& v : w.data) v += 0.1f;
  const nn::Tensor grad = losses::reconstruction_grad(out, g, w);
  double worst_r = 0.0;
  int probes = 0;
  while (probes < 100) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(out.size()) - 1));
    const float saved = out.data[i];
    if (std::abs(saved - g.data[i]) < 2e-3f) continue;
    const float up = saved + 1e-3f, down = saved - 1e-3f;
    out.data[i] = up;
    const double a = losses::reconstruction_loss(out, g, w);
    out.data[i] = down;
    const double b = losses::reconstruction_loss(out, g, w);
    out.data[i] = saved;
    const double fd = (a - b) / (static_cast<double>(up) - down);
    worst_r = std::max(worst_r, std::abs(fd - grad.data[i]) / std::max(std::abs(fd), 1e-12));
    ++probes;
  }
  o.require(worst_r < 1e-4, "reconstruction rel err < 1e-4");

  // Adversarial: scores of an 8x8 grid of samples; 100 probes over d_loss
  // (real and fake) and both generator forms.
  std::vector<double> real(64), fake(64);
  for (auto& r : real) r = rng.uniform(0.05, 0.95);
  for (auto& f : fake) f = rng.uniform(0.05, 0.95);
  std::vector<double> dr, df;
  losses::d_loss_grad(real, fake, dr, df);
  const auto gns = losses::g_loss_grad(fake, losses::GeneratorAdversarial::non_saturating);
  const auto gs = losses::g_loss_grad(fake, losses::GeneratorAdversarial::saturating);
  const double h = 1e-6;
  double worst_a = 0.0;
  auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(std::abs(fd), 1e-12); };
  for (int p = 0; p < 100; ++p) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, 63));
    auto rp = real, rm = real, fp = fake, fm = fake;
    rp[i] += h;
    rm[i] -= h;
    fp[i] += h;
    fm[i] -= h;
    using losses::adversarial_losses;
    const double fd_r = (adversarial_losses(rp, fake).d_loss - adversarial_losses(rm, fake).d_loss) / (2 * h);
    const double fd_f = (adversarial_losses(real, fp).d_loss - adversarial_losses(real, fm).d_loss) / (2 * h);
    const double fd_gn = (adversarial_losses(real, fp).g_loss - adversarial_losses(real, fm).g_loss) / (2 * h);
    const auto sat = losses::GeneratorAdversarial::saturating;
    const double fd_gs = (adversarial_losses(real, fp, sat).g_loss - adversarial_losses(real, fm, sat).g_loss) / (2 * h);
    worst_a = std::max({worst_a, rel(fd_r, dr[i]), rel(fd_f, df[i]), rel(fd_gn, gns[i]), rel(fd_gs, gs[i])});
  }
  o.require(worst_a < 1e-4, "adversarial rel err < 1e-4");
  o.detail << "reconstruction " << fmt(worst_r) << ", adversarial " << fmt(worst_a);
}

const dataset::Dataset& toy_data() {
  static const dataset::Dataset data = [] {
    dataset::SynthConfig cfg;
    cfg.prints = 4;
    cfg.seed = 1000;
    cfg.print.width = cfg.print.height = 96;
    cfg.pair.latents_per_print = 5;
    return dataset::synthesize(cfg);
  }();
  return data;
}

training::TrainConfig toy_config(std::uint64_t seed) {
  training::TrainConfig t;
  t.generator = {1, 8, 0.2f, 64};
  t.discriminator = {2, 8, 0.2f};
  t.batch_size = 4;
  t.max_iterations = 200;
  t.checkpoint_every = 1000000;
  t.seed = seed;
  return t;
}

std::vector<training::StepMetrics> train_logged(const training::TrainConfig& cfg, const dataset::Dataset& data) {
  TempDir dir;
  {
    training::MetricsLog log(dir / "m.tsv", cfg, false);
    training::Trainer t(cfg, data);
    t.run(&log);
  }
  return training::read_metrics(dir / "m.tsv");
}

double tail_mean(const std::vector<training::StepMetrics>& rows, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) s += rows[i].l_r;
  return s / static_cast<double>(n);
}

void toy_training(Outcome& o) {
  const auto& data = toy_data();
  o.require(data.size() == 20, "20 synthetic pairs");
  const auto full = train_logged(toy_config(1), data);
  auto nw_cfg = toy_config(1);
  nw_cfg.ablations.no_weight = true;
  const auto nw = train_logged(nw_cfg, data);
  o.require(full.size() == 200 && nw.size() == 200, "200 logged iterations");
  const double first = full.front().l_r, final = tail_mean(full, 10);
  o.require(final <= 0.5 * first, "final weighted L1 <= 50% of iteration 1");
  bool differ = false;
  for (std::size_t i = 0; i < std::min(full.size(), nw.size()); ++i) differ |= full[i].l_r != nw[i].l_r;
  o.require(differ, "--no-weight trajectory differs");
  o.detail << "L_r iter1=" << fmt(first) << " final(mean last 10)=" << fmt(final) << " ratio=" << fmt(final / first)
           << "; no-weight iter1=" << fmt(nw.front().l_r) << " final=" << fmt(tail_mean(nw, 10));
}

class CountingStub : public inference::PatchPredictor {
 public:
  nn::Tensor predict(const nn::Tensor& p) override {
    windows += p.n;
    return nn::Tensor(p.n, 1, p.h, p.w, 0.6875f);
  }
  int windows = 0;
};

void inference_tiling(Outcome& o) {
  RandomSource rng(109);
  const GrayImage img = random_lattice_image(200, 200, rng);
  CountingStub stub;
  const inference::InferenceConfig cfg;  // window 192, step 8
  const GrayImage out = inference::enhance_full_image(img, stub, cfg);
  o.require(stub.windows == 4, "4 windows");
  bool constant = out.width() == 200 && out.height() == 200;
  for (double v : out.values()) constant &= v == 0.6875;
  o.require(constant, "stub output exactly constant");

  nn::Generator g({1, 8, 0.2f, 192});
  g.init(rng, 0.05);
  const GrayImage single = random_lattice_image(192, 192, rng);
  inference::GeneratorPredictor pred(g);
  const GrayImage tiled = inference::enhance_full_image(single, pred, cfg);
  nn::Tensor x(1, 1, 192, 192);
  for (int y = 0; y < 192; ++y) {
    for (int xx = 0; xx < 192; ++xx) x.at(0, 0, y, xx) = static_cast<float>(single(xx, y));
  }
  const nn::Tensor direct = g.forward(x, false);
  double diff = 0.0;
  for (int y = 0; y < 192; ++y) {
    for (int xx = 0; xx < 192; ++xx) diff = std::max(diff, std::abs(tiled(xx, y) - direct.at(0, 0, y, xx)));
  }
  o.require(diff == 0.0, "single window equals direct forward");
  o.detail << stub.windows << " windows; single-window max diff " << diff;
}

MinutiaSet random_set(RandomSource& rng, int count, int size) {
  MinutiaSet s;
  while (static_cast<int>(s.size()) < count) {
    const Minutia m{std::round(rng.uniform(0, size)), std::round(rng.uniform(0, size)), rng.uniform(0, 2 * kPi),
                    rng.uniform01() < 0.5 ? MinutiaKind::ending : MinutiaKind::bifurcation};
    try {
      s.add(m);
    } catch (const std::invalid_argument&) {
    }
  }
  return s;
}

void evaluation_machinery(Outcome& o) {
  using namespace evaluation;
  RandomSource rng(110);
  const MatchTolerance tol;
  // Exact, threshold and one-to-one examples.
  const MinutiaSet exact = random_set(rng, 30, 300);
  o.require(match_minutiae(exact, exact).recovered == 30, "exact set fully recovered");
  MinutiaSet g1, at, beyond;
  g1.add({100, 100, 1.0, MinutiaKind::ending});
  at.add({115, 100, 1.0 + kPi / 6, MinutiaKind::ending});
  beyond.add({115.01, 100, 1.0, MinutiaKind::ending});
  o.require(match_minutiae(at, g1).recovered == 1, "threshold inclusive");
  o.require(match_minutiae(beyond, g1).recovered == 0, "beyond threshold rejected");
  MinutiaSet two;
  two.add({101, 100, 1.0, MinutiaKind::ending});
  two.add({99, 100, 1.0, MinutiaKind::ending});
  const RecoveryRow r2 = match_minutiae(two, g1);
  o.require(r2.recovered == 1 && r2.fake == 1, "one-to-one");

  // Brute-force assignment oracle on sparse random sets.
  int agree = 0, trials = 0;
  for (int t = 0; t < 40; ++t) {
    const MinutiaSet g = random_set(rng, 10, 500);
    MinutiaSet e;
    for (const auto& m : g) {
      if (rng.uniform01() < 0.8) {
        try {
          e.add({m.x + rng.uniform(-6, 6), m.y + rng.uniform(-6, 6), wrap_direction(m.angle + rng.uniform(-0.4, 0.4)), m.kind});
        } catch (const std::invalid_argument&) {
        }
      }
    }
    bool sparse = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) sparse &= std::hypot(g[i].x - g[j].x, g[i].y - g[j].y) > 3 * tol.loc_radius;
    }
    if (!sparse) continue;
    ++trials;
    agree += match_minutiae(e, g, tol).recovered ==
             oracle::max_assignment(e.items(), g.items(), tol.loc_radius, tol.angle_tol, tol.require_type);
  }
  o.require(trials > 0 && agree == trials, "matches assignment oracle");

  // CMC against brute-force ranks.
  bool cmc_ok = true;
  for (int t = 0; t < 20; ++t) {
    ScoreMatrix m;
    for (int p = 0; p < 10; ++p) {
      std::vector<double> row(50);
      for (auto& v : row) v = std::round(rng.uniform(0, 20)) / 20;
      m.scores.push_back(row);
      m.true_mate.push_back(static_cast<std::size_t>(rng.uniform_int(0, 49)));
    }
    std::vector<double> expected(50, 0.0);
    for (std::size_t p = 0; p < 10; ++p) {
      const std::size_t rank = oracle::rank_of(m.scores[p], m.true_mate[p]);
      for (std::size_t k = rank; k <= 50; ++k) expected[k - 1] += 1.0;
    }
    const auto curve = cmc_curve(m);
    cmc_ok &= curve.size() == 50;
    for (std::size_t k = 0; cmc_ok && k < 50; ++k) {
      cmc_ok &= std::abs(curve[k] - expected[k] / 10.0) <= 1e-12;
      if (k) cmc_ok &= curve[k] >= curve[k - 1];
    }
  }
  o.require(cmc_ok, "CMC matches brute force and is monotone");

  double worst_sim = 1.0;
  for (int t = 0; t < 10; ++t) {
    const MinutiaSet s = random_set(rng, 25, 250);
    const auto moved = transform(s.items(), rng.uniform(-0.5, 0.5), rng.uniform(-40, 40), rng.uniform(-40, 40));
    MinutiaSet probe;
    for (const auto& m : moved) probe.add(m);
    worst_sim = std::min(worst_sim, similarity_score(probe, s));
  }
  o.require(worst_sim >= 0.9, "planted transform score >= 0.9");
  o.detail << "oracle agreement " << agree << "/" << trials << ", min planted score " << fmt(worst_sim);
}

/// One full CLI pipeline under `root`; returns false with a reason on failure.
bool cli_pipeline(const fs::path& root, std::string& why) {
  const std::string d = (root / "data").string(), r = (root / "run").string(), e = (root / "enh").string();
  const std::vector<std::vector<std::string>> steps{
      {"--log-level", "warn", "synth-data", "--out", d, "--seed", "11", "--prints", "10", "--latents-per-print", "2",
       "--width", "96", "--height", "96"},
      {"--log-level", "warn", "train", "--data", d, "--out", r, "--seed", "11", "--iterations", "500", "--batch-size", "4",
       "--patch", "64", "--generator-channels", "8", "--discriminator-channels", "8", "--checkpoint-every", "250"},
      {"--log-level", "warn", "--set", "inference.window=64", "enhance", "--checkpoint",
       (root / "run" / "checkpoints" / "latest.ckpt").string(), "--in", (root / "data" / "latents").string(), "--out", e,
       "--binarize"},
      {"--log-level", "warn", "eval", "recover", "--extracted", (root / "enh" / "minutiae").string(), "--genuine",
       (root / "data" / "minutiae").string(), "--out", (root / "recovery.tsv").string()},
      {"--log-level", "warn", "plot", "--metrics", (root / "run" / "metrics.tsv").string(), "--out",
       (root / "loss.png").string()},
  };
  for (const auto& s : steps) {
    const int code = run_cli(s);
    if (code != 0) {
      why = "step '" + s[2] + "' exited " + std::to_string(code);
      return false;
    }
  }
  const auto rows = training::read_metrics(root / "run" / "metrics.tsv");
  if (rows.size() != 500) {
    why = "metrics rows " + std::to_string(rows.size());
    return false;
  }
  std::size_t enhanced = 0;
  for (const auto& f : fs::directory_iterator(root / "enh" / "enhanced")) enhanced += f.path().extension() == ".png";
  if (enhanced != 20) {
    why = "enhanced images " + std::to_string(enhanced);
    return false;
  }
  const std::string report = testing_support::read_file(root / "recovery.tsv");
  if (report.find("TOTAL\t") == std::string::npos) {
    why = "recovery report has no TOTAL row";
    return false;
  }
  if (fs::file_size(root / "loss.png") < 1000) {
    why = "plot too small";
    return false;
  }
  return true;
}

void end_to_end(Outcome& o) {
  TempDir a, b;
  std::string why_a, why_b;
  const bool ok_a = cli_pipeline(a.path(), why_a);
  const bool ok_b = ok_a && cli_pipeline(b.path(), why_b);
  o.require(ok_a, "first pipeline: " + why_a);
  o.require(ok_b, "second pipeline: " + why_b);
  if (!ok_a || !ok_b) return;
  const auto ta = tree(a.path()), tb = tree(b.path());
  std::size_t differing = 0;
  for (const auto& [name, bytes] : ta) {
    const auto it = tb.find(name);
    differing += it == tb.end() || it->second != bytes;
  }
  differing += tb.size() > ta.size() ? tb.size() - ta.size() : 0;
  o.require(differing == 0, "byte-identical outputs under a fixed seed");
  const std::string report = testing_support::read_file(a / "recovery.tsv");
  o.detail << ta.size() << " files, " << differing << " differ; " << report.substr(report.find("TOTAL"));
}

void directional_claim(Outcome& o) {
  const auto& data = toy_data();
  dataset::SynthConfig held;
  held.prints = 2;
  held.seed = 2000;
  held.print.width = held.print.height = 96;
  held.pair.latents_per_print = 5;
  const dataset::Dataset heldout = dataset::synthesize(held);
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    training::Trainer full(toy_config(seed), data);
    full.run(nullptr);
    auto nd_cfg = toy_config(seed);
    nd_cfg.ablations.no_discriminator = true;
    training::Trainer nd(nd_cfg, data);
    nd.run(nullptr);
    const double lf = full.evaluate(heldout), ln = nd.evaluate(heldout);
    wins += lf < ln;
    o.detail << "seed " << seed << ": full " << fmt(lf) << " vs no-disc " << fmt(ln) << "; ";
  }
  o.require(wins >= 3, "full lower in >= 3 of 5 seeds");
  o.detail << "full wins " << wins << "/5";
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> check;
};

}  // namespace

int main() {
  log::set_level(log::Level::warn);
  const std::vector<Criterion> criteria{
      {1, "weight map vs direct summation", 10, weight_map_oracle},
      {2, "distortion analytics", 5, distortion_analytics},
      {3, "speckle statistics", 10, speckle_statistics},
      {4, "TV reconstruction and monotone objective", 30, tv_decomposition},
      {5, "FOMFE recovery and smoothing", 30, fomfe_consistency},
      {6, "architecture contract", 10, architecture_contract},
      {7, "loss gradients vs finite differences", 60, gradient_checks},
      {8, "toy training loss reduction", 600, toy_training},
      {9, "inference tiling", 10, inference_tiling},
      {10, "evaluation machinery", 60, evaluation_machinery},
      {11, "end-to-end CLI pipeline", 1200, end_to_end},
      {12, "full vs no-discriminator on held-out data", 0, directional_claim},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime budget " + fmt(c.budget_s) + " s");
    failed += !o.pass;
    std::printf("%s criterion %d: %s (%s; %.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
