#include "fingergan/selfcheck.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>

#include "fingergan/config.hpp"
#include "fingergan/distortion.hpp"
#include "fingergan/evaluation.hpp"
#include "fingergan/image_io.hpp"
#include "fingergan/inference.hpp"
#include "fingergan/losses.hpp"
#include "fingergan/minutia.hpp"
#include "fingergan/nn/network.hpp"
#include "fingergan/orientation.hpp"
#include "fingergan/skeleton.hpp"
#include "fingergan/synthesis.hpp"
#include "fingergan/training.hpp"
#include "fingergan/tvdecomp.hpp"
#include "fingergan/weightmap.hpp"

namespace fingergan::selfcheck {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool ok = false;
  std::string detail;
};

Outcome expect(bool ok, const std::string& detail = {}) { return {ok, detail}; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Suite {
 public:
  void check(const std::string& module, const std::string& name, const std::function<Outcome()>& fn) {
    CheckResult r{module, name, false, {}};
    try {
      const Outcome o = fn();
      r.passed = o.ok;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    results_.push_back(std::move(r));
  }
  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
};

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "fingergan-selfcheck-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("selfcheck: cannot create a temporary directory");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

GrayImage random_image(int w, int h, RandomSource& rng) {
  RealGrid g(w, h);
  for (double& v : g.values()) v = snap_intensity(rng.uniform01());
  return GrayImage::from_grid(std::move(g));
}

double max_abs_diff(const RealGrid& a, const RealGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

/// Ridge pattern 0.5 + 0.4 cos(2 pi f n.p) whose ridges run along `angle`.
GrayImage sinusoid(int w, int h, double angle, double period) {
  RealGrid g(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double t = -x * std::sin(angle) + y * std::cos(angle);
      g(x, y) = snap_intensity(0.5 + 0.4 * std::cos(2.0 * kPi * t / period));
    }
  }
  return GrayImage::from_grid(std::move(g));
}

/// Quarter turn: out(x, y) = in(y, w - 1 - x) on a square grid.
template <class T>
Grid<T> rotate90(const Grid<T>& in) {
  Grid<T> out(in.height(), in.width());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out(x, y) = in(y, in.width() - 1 - x);
  }
  return out;
}

double contrast(const RealGrid& g, int margin) {
  double lo = 1e300, hi = -1e300;
  for (int y = margin; y < g.height() - margin; ++y) {
    for (int x = margin; x < g.width() - margin; ++x) {
      lo = std::min(lo, g(x, y));
      hi = std::max(hi, g(x, y));
    }
  }
  return hi - lo;
}

orientation::FomfeModel random_model(int order, int w, int h, RandomSource& rng) {
  const int n = orientation::FomfeModel::basis_size(order);
  std::vector<double> c(n), s(n);
  for (int i = 0; i < n; ++i) {
    c[i] = rng.normal(0.0, 0.15);
    s[i] = rng.normal(0.0, 0.15);
  }
  c[0] += 2.0;
  return orientation::FomfeModel(order, w, h, std::move(c), std::move(s));
}

void image_io_checks(Suite& s) {
  s.check("image_io", "8-bit levels 255, 0, 128 map to 1, 0, 128/255", [] {
    TempDir dir;
    RealGrid g(3, 1);
    g(0, 0) = 1.0;
    g(1, 0) = 0.0;
    g(2, 0) = 128.0 / 255.0;
    save_gray_image(GrayImage::from_grid(g), dir.path() / "levels.png");
    const GrayImage back = load_gray_image(dir.path() / "levels.png");
    return expect(back(0, 0) == 1.0 && back(1, 0) == 0.0 && std::abs(back(2, 0) - 128.0 / 255.0) <= 1e-9);
  });
  s.check("image_io", "constant 0.5 round trip within 1/255", [] {
    TempDir dir;
    const GrayImage img(32, 32, 0.5);
    save_gray_image(img, dir.path() / "c.png");
    const double err = max_abs_diff(load_gray_image(dir.path() / "c.png"), img);
    return expect(err <= 1.0 / 255.0, "max error " + num(err));
  });
  s.check("image_io", "binary skeleton round trip is exact", [] {
    TempDir dir;
    RandomSource rng(11);
    SkeletonMap sk(40, 30);
    for (auto& v : sk.values()) v = rng.uniform01() < 0.3 ? 1 : 0;
    save_skeleton(sk, dir.path() / "s.png");
    return expect(load_skeleton(dir.path() / "s.png") == sk);
  });
  s.check("image_io", "random 192x192 round trip within 1/255", [] {
    TempDir dir;
    RandomSource rng(12);
    const GrayImage img = random_image(192, 192, rng);
    save_gray_image(img, dir.path() / "r.png");
    const double err = max_abs_diff(load_gray_image(dir.path() / "r.png"), img);
    return expect(err <= 1.0 / 255.0, "max error " + num(err));
  });
}

void minutia_checks(Suite& s) {
  s.check("minutia", "\"10 20 90 E\" parses to (10, 20, pi/2, ending)", [] {
    const MinutiaSet m = parse_minutiae("10 20 90 E\n");
    return expect(m.size() == 1 && m[0].x == 10.0 && m[0].y == 20.0 && std::abs(m[0].angle - kPi / 2) < 1e-12 &&
                  m[0].kind == MinutiaKind::ending);
  });
  s.check("minutia", "angle 360 is rejected", [] {
    try {
      parse_minutiae("10 20 360 E\n");
    } catch (const std::exception&) {
      return expect(true);
    }
    return expect(false, "accepted");
  });
  s.check("minutia", "empty text gives an empty set", [] { return expect(parse_minutiae("").empty()); });
}

void distortion_checks(Suite& s) {
  using namespace distortion;
  DistortionParams p;
  p.k = 4.0;
  p.ellipse_center = {50.0, 40.0};
  p.s_x = 10.0;
  p.s_y = 6.0;
  s.check("distortion", "ellipse boundary point has h = 0", [p] {
    const double h = ellipse_distance({60.0, 40.0}, p);
    return expect(std::abs(h) <= 1e-12, "h = " + num(h));
  });
  s.check("distortion", "o_e + (2 s_x, 0) has h = sqrt(3)", [p] {
    const double h = ellipse_distance({70.0, 40.0}, p);
    return expect(std::abs(h - std::sqrt(3.0)) <= 1e-12, "h = " + num(h));
  });
  s.check("distortion", "ellipse centre has h < 0", [p] { return expect(ellipse_distance({50.0, 40.0}, p) < 0.0); });
  s.check("distortion", "transition is 0, 0.5, 1 at h = 0, k/2, k", [] {
    const double k = 3.0;
    return expect(gradual_transition(0.0, k) == 0.0 && std::abs(gradual_transition(k / 2, k) - 0.5) <= 1e-12 &&
                  gradual_transition(k, k) == 1.0);
  });
  s.check("distortion", "theta = 0, e = 0 gives zero displacement", [p] {
    DistortionParams q = p;
    RandomSource rng(3);
    for (int i = 0; i < 100; ++i) {
      const Vec2 d = displacement({rng.uniform(-100, 100), rng.uniform(-100, 100)}, q);
      if (d.x != 0.0 || d.y != 0.0) return expect(false);
    }
    return expect(true);
  });
  s.check("distortion", "theta = 0, e = (5, -3) is a pure translation", [p] {
    DistortionParams q = p;
    q.e = {5.0, -3.0};
    RandomSource rng(4);
    for (int i = 0; i < 100; ++i) {
      const Vec2 d = displacement({rng.uniform(-100, 100), rng.uniform(-100, 100)}, q);
      if (std::abs(d.x - 5.0) > 1e-12 || std::abs(d.y + 3.0) > 1e-12) return expect(false);
    }
    return expect(true);
  });
  s.check("distortion", "theta = 90 deg about the origin moves (1, 0) by R p - p", [p] {
    DistortionParams q = p;
    q.theta_deg = 90.0;
    const Vec2 d = displacement({1.0, 0.0}, q);
    // R = [[0, 1], [-1, 0]]: R (1,0) = (0, -1).
    return expect(std::abs(d.x + 1.0) <= 1e-12 && std::abs(d.y + 1.0) <= 1e-12, num(d.x) + "," + num(d.y));
  });
  s.check("distortion", "zero-displacement warp returns the image exactly", [p] {
    RandomSource rng(5);
    const GrayImage img = random_image(48, 40, rng);
    return expect(distort_image(img, p) == img);
  });
  s.check("distortion", "fixed seed draws an identical parameter sequence", [] {
    RandomSource a(9), b(9);
    for (int i = 0; i < 5; ++i) {
      const auto x = sample_distortion({}, a, 128, 128), y = sample_distortion({}, b, 128, 128);
      if (x.k != y.k || x.theta_deg != y.theta_deg || x.e.x != y.e.x || x.s_x != y.s_x || x.s_y != y.s_y) {
        return expect(false);
      }
    }
    return expect(true);
  });
}

synthesis::SynthesisRanges identity_ranges() {
  synthesis::SynthesisRanges r;
  r.distortion.theta_min_deg = r.distortion.theta_max_deg = 0.0;
  r.distortion.e_min = r.distortion.e_max = 0.0;
  r.variance_min = r.variance_max = 0.0;
  r.lambda_min = r.lambda_max = 0.0;
  return r;
}

void synthesis_checks(Suite& s) {
  s.check("synthesis", "zero speckle variance leaves the image unchanged", [] {
    RandomSource rng(21), noise(22);
    const GrayImage img = random_image(32, 32, rng);
    return expect(synthesis::add_speckle(img, {0.0}, noise) == img);
  });
  s.check("synthesis", "speckle mean and variance over 1e6 draws", [] {
    const double var = 0.01;
    RandomSource rng(23);
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = synthesis::speckle_noise(var, rng);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n, emp = sq / n - mean * mean;
    return expect(std::abs(mean) <= 3.0 * std::sqrt(var / n) && std::abs(emp - var) <= 0.05 * var,
                  "mean " + num(mean) + ", variance " + num(emp));
  });
  s.check("synthesis", "fusion with lambda 0 and 1 returns b'' and d", [] {
    RandomSource rng(24);
    const GrayImage b = random_image(16, 16, rng), d = random_image(16, 16, rng);
    return expect(synthesis::fuse_background(b, {0.0, d}) == b && synthesis::fuse_background(b, {1.0, d}) == d);
  });
  s.check("synthesis", "lambda 0.5 fuses 0.2 and 0.8 to 0.5", [] {
    const GrayImage b(1, 1, 0.2), d(1, 1, 0.8);
    const double v = synthesis::fuse_background(b, {0.5, d})(0, 0);
    return expect(std::abs(v - 0.5) <= 1e-15, num(v));
  });
  s.check("synthesis", "identity parameters reproduce the rolled print", [] {
    RandomSource rng(25);
    const GrayImage rolled = random_image(40, 40, rng), bg(48, 48, 0.3);
    RandomSource r(26);
    return expect(synthesis::synthesize_latent(rolled, identity_ranges(), {bg}, r).image == rolled);
  });
  s.check("synthesis", "lambda 0.8 on black print and white background gives 0.8", [] {
    auto ranges = identity_ranges();
    ranges.lambda_min = ranges.lambda_max = 0.8;
    const GrayImage rolled(32, 32, 0.0), bg(32, 32, 1.0);
    RandomSource r(27);
    const GrayImage c = synthesis::synthesize_latent(rolled, ranges, {bg}, r).image;
    double err = 0.0;
    for (const double v : c.values()) err = std::max(err, std::abs(v - 0.8));
    return expect(err <= 1e-12, "max error " + num(err));
  });
  s.check("synthesis", "fixed seed synthesizes an identical latent", [] {
    RandomSource rng(28);
    const GrayImage rolled = random_image(40, 40, rng), bg = random_image(64, 64, rng);
    RandomSource a(29), b(29);
    return expect(synthesis::synthesize_latent(rolled, {}, {bg}, a).image ==
                  synthesis::synthesize_latent(rolled, {}, {bg}, b).image);
  });
}

void tv_checks(Suite& s) {
  s.check("tv", "constant image has zero texture", [] {
    const auto d = tv::decompose(GrayImage(32, 32, 0.37));
    const GrayImage scaled = d.scaled_texture();
    bool ok = true;
    for (std::size_t i = 0; i < d.texture.size(); ++i) {
      ok = ok && d.texture.values()[i] == 0.0 && scaled.values()[i] == 0.5;
    }
    return expect(ok && d.cartoon == GrayImage(32, 32, 0.37));
  });
  s.check("tv", "cartoon + texture reconstructs the input exactly", [] {
    RandomSource rng(31);
    const GrayImage img = random_image(64, 64, rng);
    const auto d = tv::decompose(img);
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (d.cartoon.values()[i] + d.texture.values()[i] != img.values()[i]) return expect(false);
    }
    return expect(true);
  });
  s.check("tv", "ROF objective is nonincreasing", [] {
    RandomSource rng(32);
    const auto d = tv::decompose(random_image(64, 64, rng), {}, true);
    double worst = 0.0;
    for (std::size_t i = 1; i < d.objective.size(); ++i) worst = std::max(worst, d.objective[i] - d.objective[i - 1]);
    return expect(d.objective.size() > 1 && worst <= 1e-10, "largest increase " + num(worst));
  });
  s.check("tv", "large fidelity weight keeps the cartoon at the input", [] {
    RandomSource rng(33);
    const GrayImage img = random_image(32, 32, rng);
    tv::TVConfig cfg;
    cfg.fidelity_weight = 1e6;
    const double err = max_abs_diff(tv::decompose(img, cfg).cartoon, img);
    return expect(err <= 1e-5, "max error " + num(err));
  });
}

void gabor_checks(Suite& s) {
  skeleton::GaborConfig fixed;
  fixed.frequency_mode = skeleton::FrequencyMode::fixed;
  fixed.fixed_frequency = 1.0 / 9.0;
  s.check("gabor", "sinusoid contrast does not drop", [fixed] {
    const GrayImage img = sinusoid(96, 96, kPi / 6, 9.0);
    const OrientationField field(96, 96, kPi / 6);
    const GrayImage out = skeleton::enhance_gabor(img, field, fixed);
    const double cin = contrast(img, 16), cout = contrast(out, 16);
    return expect(cout >= cin, "contrast " + num(cin) + " -> " + num(cout));
  });
  s.check("gabor", "constant image stays constant", [fixed] {
    const GrayImage out = skeleton::enhance_gabor(GrayImage(64, 64, 0.6), OrientationField(64, 64, 0.4), fixed);
    const double c = contrast(out, 0);
    return expect(c <= 1e-9, "range " + num(c));
  });
  s.check("gabor", "quarter-turn equivariance within 0.02 RMS", [fixed] {
    const int n = 96;
    const GrayImage img = sinusoid(n, n, 0.3, 9.0);
    const OrientationField field(n, n, 0.3);
    const GrayImage out = skeleton::enhance_gabor(img, field, fixed);
    const GrayImage rimg = GrayImage::from_grid(rotate90<double>(img));
    const OrientationField rfield(n, n, wrap_orientation(0.3 + kPi / 2));
    const GrayImage rout = skeleton::enhance_gabor(rimg, rfield, fixed);
    const RealGrid expected = rotate90<double>(out);
    double se = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) se += std::pow(expected.values()[i] - rout.values()[i], 2);
    const double rms = std::sqrt(se / static_cast<double>(expected.size()));
    return expect(rms <= 0.02, "RMS " + num(rms));
  });
}

SkeletonMap draw_line(SkeletonMap s, int x0, int y0, int x1, int y1) {
  const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
  for (int i = 0; i <= steps; ++i) {
    const int x = x0 + (steps ? (x1 - x0) * i / steps : 0), y = y0 + (steps ? (y1 - y0) * i / steps : 0);
    s(x, y) = 1;
  }
  return s;
}

std::pair<int, int> count_kinds(const MinutiaSet& m) {
  int e = 0, b = 0;
  for (const auto& x : m) (x.kind == MinutiaKind::ending ? e : b)++;
  return {e, b};
}

void skeleton_checks(Suite& s) {
  s.check("skeleton", "5-pixel bar thins to a connected 1-pixel centreline", [] {
    SkeletonMap bar(60, 30);
    for (int y = 13; y <= 17; ++y) {
      for (int x = 10; x <= 49; ++x) bar(x, y) = 1;
    }
    const SkeletonMap t = skeleton::thin(bar);
    int columns_ok = 0, inner = 0;
    for (int x = 14; x <= 45; ++x) {
      int c = 0;
      for (int y = 0; y < 30; ++y) c += t(x, y);
      ++inner;
      columns_ok += c == 1;
    }
    return expect(columns_ok == inner, std::to_string(columns_ok) + "/" + std::to_string(inner) + " single-pixel columns");
  });
  s.check("skeleton", "blank image gives an empty skeleton", [] {
    return expect(skeleton::skeletonize(GrayImage(40, 40, 1.0)).ridge_count() == 0);
  });
  s.check("skeleton", "thinning a thin map is the identity", [] {
    SkeletonMap y = draw_line(SkeletonMap(60, 60), 30, 31, 30, 50);
    y = draw_line(y, 30, 30, 15, 15);
    y = draw_line(y, 30, 30, 45, 15);
    y = draw_line(y, 5, 55, 55, 55);
    return expect(skeleton::thin(y) == y);
  });
  skeleton::MinutiaConfig raw;
  raw.raw = true;
  s.check("skeleton", "straight segment has exactly two endings", [raw] {
    const auto m = skeleton::extract_minutiae(draw_line(SkeletonMap(50, 40), 10, 20, 40, 20), raw);
    const auto [e, b] = count_kinds(m);
    return expect(e == 2 && b == 0, std::to_string(e) + " endings, " + std::to_string(b) + " bifurcations");
  });
  s.check("skeleton", "Y junction has one bifurcation and three endings", [raw] {
    SkeletonMap y = draw_line(SkeletonMap(60, 60), 30, 31, 30, 50);
    y = draw_line(y, 30, 30, 15, 15);
    y = draw_line(y, 30, 30, 45, 15);
    const auto [e, b] = count_kinds(skeleton::extract_minutiae(y, raw));
    return expect(e == 3 && b == 1, std::to_string(e) + " endings, " + std::to_string(b) + " bifurcations");
  });
  s.check("skeleton", "empty skeleton has no minutiae",
          [] { return expect(skeleton::extract_minutiae(SkeletonMap(30, 30)).empty()); });
  s.check("skeleton", "minutia map of an empty set is zero", [] {
    const MaskGrid m = skeleton::minutia_map(MinutiaSet(20, 20), 20, 20);
    return expect(std::all_of(m.values().begin(), m.values().end(), [](auto v) { return v == 0; }));
  });
  s.check("skeleton", "three distinct minutiae sum to 3", [] {
    MinutiaSet set(20, 20);
    set.add({1, 1, 0, MinutiaKind::ending});
    set.add({5, 9, 1, MinutiaKind::bifurcation});
    set.add({17, 3, 2, MinutiaKind::ending});
    const MaskGrid m = skeleton::minutia_map(set, 20, 20);
    return expect(std::accumulate(m.values().begin(), m.values().end(), 0) == 3);
  });
  s.check("skeleton", "duplicate minutia location is rejected", [] {
    MinutiaSet set(20, 20);
    set.add({4, 4, 0, MinutiaKind::ending});
    try {
      set.add({4, 4, 1, MinutiaKind::bifurcation});
    } catch (const std::invalid_argument&) {
      return expect(true);
    }
    return expect(false, "accepted");
  });
}

double interior_max_error(const OrientationField& f, double truth, int block) {
  double worst = 0.0;
  for (int y = block; y < f.height() - block; ++y) {
    for (int x = block; x < f.width() - block; ++x) {
      if (!f.valid(x, y)) return 1e9;
      worst = std::max(worst, orientation_difference(f.angle(x, y), truth));
    }
  }
  return worst;
}

void orientation_checks(Suite& s) {
  const double deg = kPi / 180.0;
  s.check("orientation", "30 deg sinusoid estimated within 2 deg", [deg] {
    const auto raw = orientation::estimate_raw_orientation(sinusoid(128, 128, 30 * deg, 9.0).grid());
    const double err = interior_max_error(raw.field, 30 * deg, raw.block);
    return expect(err <= 2 * deg, "max error " + num(err / deg) + " deg");
  });
  s.check("orientation", "constant image is invalid everywhere", [] {
    const auto raw = orientation::estimate_raw_orientation(GrayImage(64, 64, 0.5).grid());
    return expect(raw.field.valid_count() == 0);
  });
  s.check("orientation", "quarter turn shifts angles by 90 deg", [deg] {
    const GrayImage img = sinusoid(128, 128, 20 * deg, 9.0);
    const auto a = orientation::estimate_raw_orientation(img.grid());
    const auto b = orientation::estimate_raw_orientation(rotate90<double>(img.grid()));
    const RealGrid expected = rotate90<double>(a.field.angle);
    double worst = 0.0;
    for (int y = 16; y < 112; ++y) {
      for (int x = 16; x < 112; ++x) {
        worst = std::max(worst, orientation_difference(b.field.angle(x, y), expected(x, y) + kPi / 2));
      }
    }
    return expect(worst <= 2 * deg, "max error " + num(worst / deg) + " deg");
  });
  s.check("fomfe", "field from a random order-4 model is recovered within 1e-6 rad", [] {
    RandomSource rng(41);
    const auto truth = random_model(4, 96, 96, rng);
    const OrientationField field = orientation::evaluate_fomfe(truth);
    const auto fit = orientation::fit_fomfe(field, {4, 8, 1e-12});
    const OrientationField back = orientation::evaluate_fomfe(fit.model);
    double worst = 0.0;
    for (std::size_t i = 0; i < field.angle.size(); ++i) {
      worst = std::max(worst, orientation_difference(field.angle.values()[i], back.angle.values()[i]));
    }
    return expect(worst <= 1e-6, "max error " + num(worst) + " rad");
  });
  s.check("fomfe", "constant field is reproduced within 1e-8 rad", [] {
    const auto fit = orientation::fit_fomfe(OrientationField(64, 64, 1.1), {4, 4, 1e-8});
    const OrientationField back = orientation::evaluate_fomfe(fit.model);
    double worst = 0.0;
    for (const double a : back.angle.values()) worst = std::max(worst, orientation_difference(a, 1.1));
    return expect(worst <= 1e-8, "max error " + num(worst) + " rad");
  });
  s.check("fomfe", "angles theta and theta + pi fit the same model", [] {
    RandomSource rng(42);
    OrientationField a(64, 64);
    for (double& v : a.angle.values()) v = rng.uniform(0.0, kPi);
    OrientationField b = a;
    for (double& v : b.angle.values()) v += kPi;
    const auto fa = orientation::fit_fomfe(a, {4, 4, 1e-8}), fb = orientation::fit_fomfe(b, {4, 4, 1e-8});
    const OrientationField ea = orientation::evaluate_fomfe(fa.model), eb = orientation::evaluate_fomfe(fb.model);
    double worst = 0.0;
    for (std::size_t i = 0; i < ea.angle.size(); ++i) {
      worst = std::max(worst, orientation_difference(ea.angle.values()[i], eb.angle.values()[i]));
    }
    return expect(worst <= 1e-9, "max angle difference " + num(worst) + " rad");
  });
  s.check("fomfe", "model at sample points matches the fit residuals", [] {
    RandomSource rng(43);
    OrientationField f(64, 64);
    for (double& v : f.angle.values()) v = rng.uniform(0.0, kPi);
    const auto fit = orientation::fit_fomfe(f, {4, 4, 1e-8});
    double worst = 0.0;
    for (std::size_t i = 0; i < fit.samples.size(); ++i) {
      const auto [c, sn] = fit.model.vector_at(fit.samples[i].x, fit.samples[i].y);
      worst = std::max({worst, std::abs(c - fit.samples[i].target_cos - fit.residual_cos[i]),
                        std::abs(sn - fit.samples[i].target_sin - fit.residual_sin[i])});
    }
    return expect(worst <= 1e-9, "max mismatch " + num(worst));
  });
  s.check("fomfe", "smoothing 5 deg noise lowers RMS error", [deg] {
    RandomSource rng(44);
    const OrientationField clean = orientation::evaluate_fomfe(random_model(4, 96, 96, rng));
    OrientationField noisy = clean;
    for (std::size_t i = 0; i < clean.angle.size(); ++i) {
      noisy.angle.values()[i] = wrap_orientation(clean.angle.values()[i] + rng.uniform(-5 * deg, 5 * deg));
    }
    const OrientationField fitted = orientation::evaluate_fomfe(orientation::fit_fomfe(noisy, {4, 4, 1e-8}).model);
    double raw = 0.0, smooth = 0.0;
    for (std::size_t i = 0; i < clean.angle.size(); ++i) {
      raw += std::pow(orientation_difference(noisy.angle.values()[i], clean.angle.values()[i]), 2);
      smooth += std::pow(orientation_difference(fitted.angle.values()[i], clean.angle.values()[i]), 2);
    }
    return expect(smooth < raw, "RMS " + num(std::sqrt(raw / clean.angle.size()) / deg) + " -> " +
                                    num(std::sqrt(smooth / clean.angle.size()) / deg) + " deg");
  });
  s.check("fomfe", "constant model evaluates to a constant field", [] {
    const int n = orientation::FomfeModel::basis_size(2);
    std::vector<double> c(n, 0.0), sn(n, 0.0);
    c[0] = std::cos(1.0);
    sn[0] = std::sin(1.0);
    const OrientationField f = orientation::evaluate_fomfe(orientation::FomfeModel(2, 32, 32, c, sn));
    double worst = 0.0;
    for (const double a : f.angle.values()) worst = std::max(worst, std::abs(a - 0.5));
    return expect(worst <= 1e-12, "max error " + num(worst));
  });
}

/// Double-loop evaluation of the normalized Gaussian correlation.
RealGrid naive_weights(const MaskGrid& m, const weightmap::WeightMapParams& p) {
  const double s2 = p.sigma * p.sigma;
  auto wg = [&](int u, int v) { return std::exp(-(u * u + v * v) / (2 * s2)) / (2 * kPi * s2); };
  double total = 0.0;
  for (int v = -p.r; v <= p.r; ++v) {
    for (int u = -p.r; u <= p.r; ++u) total += wg(u, v);
  }
  const double floor = wg(p.r, p.r) / total;
  RealGrid out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      double acc = 0.0;
      for (int v = -p.r; v <= p.r; ++v) {
        for (int u = -p.r; u <= p.r; ++u) {
          if (m.contains(x + u, y + v) && m(x + u, y + v)) acc += wg(u, v);
        }
      }
      out(x, y) = acc != 0.0 ? acc / total : floor;
    }
  }
  return out;
}

void weightmap_checks(Suite& s) {
  const weightmap::WeightMapParams p;
  s.check("weightmap", "defaults sigma = 8, r = 17", [p] { return expect(p.sigma == 8.0 && p.r == 17); });
  s.check("weightmap", "w_g(0,0) = 1/(128 pi)", [p] {
    const double v = weightmap::gaussian_kernel(p)(p.r, p.r);
    return expect(std::abs(v - 1.0 / (128.0 * kPi)) <= 1e-15, num(v));
  });
  s.check("weightmap", "kernel is radially symmetric", [p] {
    const RealGrid k = weightmap::gaussian_kernel(p);
    for (int v = -p.r; v <= p.r; ++v) {
      for (int u = -p.r; u <= p.r; ++u) {
        const double a = k(u + p.r, v + p.r);
        if (a != k(-u + p.r, -v + p.r) || a != k(v + p.r, u + p.r)) return expect(false);
      }
    }
    return expect(true);
  });
  s.check("weightmap", "corner value below the centre value", [p] {
    const RealGrid k = weightmap::gaussian_kernel(p);
    return expect(k(2 * p.r, 2 * p.r) < k(p.r, p.r));
  });
  s.check("weightmap", "empty minutia map gives the floor everywhere", [p] {
    const RealGrid w = weightmap::build_weight_map(MaskGrid(40, 40, 0), p);
    const double w0 = weightmap::floor_value(p);
    return expect(std::all_of(w.values().begin(), w.values().end(), [w0](double v) { return v == w0; }),
                  "w0 = " + num(w0));
  });
  s.check("weightmap", "single minutia matches the double-loop evaluation", [p] {
    MaskGrid m(64, 64, 0);
    m(20, 30) = 1;
    const RealGrid w = weightmap::build_weight_map(m, p);
    const double err = max_abs_diff(w, naive_weights(m, p));
    const bool peak = std::abs(w(20, 30) - weightmap::gaussian_kernel(p)(p.r, p.r) / weightmap::kernel_sum(p)) <= 1e-15;
    const bool outside = w(20 + p.r + 1, 30) == weightmap::floor_value(p);
    return expect(err <= 1e-10 && peak && outside, "max error " + num(err));
  });
  s.check("weightmap", "overlapping minutiae superpose", [p] {
    MaskGrid a(64, 64, 0), b(64, 64, 0), ab(64, 64, 0);
    a(25, 30) = ab(25, 30) = 1;
    b(35, 34) = ab(35, 34) = 1;
    const RealGrid wa = weightmap::correlate(a, p), wb = weightmap::correlate(b, p), wab = weightmap::correlate(ab, p);
    double err = 0.0;
    for (std::size_t i = 0; i < wab.size(); ++i) {
      err = std::max(err, std::abs(wab.values()[i] - wa.values()[i] - wb.values()[i]));
    }
    return expect(err <= 1e-15, "max error " + num(err));
  });
}

std::size_t conv_params(int k, int in, int out) { return static_cast<std::size_t>(k) * k * in * out + out; }

nn::Tensor random_tensor(int n, int c, int h, int w, RandomSource& rng) {
  nn::Tensor t(n, c, h, w);
  for (float& v : t.data) v = static_cast<float>(rng.uniform01());
  return t;
}

void network_checks(Suite& s) {
  s.check("network", "generator output shape equals input shape", [] {
    nn::Generator g({1, 4, 0.2f, 64});
    RandomSource rng(51);
    g.init(rng);
    const nn::Tensor y = g.forward(random_tensor(2, 1, 64, 64, rng), false);
    return expect(y.n == 2 && y.c == 1 && y.h == 64 && y.w == 64, y.shape_string());
  });
  s.check("network", "generator outputs lie in (0,1)", [] {
    nn::Generator g({1, 4, 0.2f, 64});
    RandomSource rng(52);
    g.init(rng);
    const nn::Tensor y = g.forward(random_tensor(2, 1, 64, 64, rng), true);
    return expect(std::all_of(y.data.begin(), y.data.end(), [](float v) { return v > 0.0f && v < 1.0f; }));
  });
  s.check("network", "discriminator scores lie in (0,1) and depend on channel order", [] {
    nn::Discriminator d({2, 4, 0.2f});
    RandomSource rng(53);
    d.init(rng, 0.1);
    const nn::Tensor x = random_tensor(2, 2, 64, 64, rng);
    nn::Tensor swapped(2, 2, 64, 64);
    for (int n = 0; n < 2; ++n) {
      for (int y = 0; y < 64; ++y) {
        for (int xx = 0; xx < 64; ++xx) {
          swapped.at(n, 0, y, xx) = x.at(n, 1, y, xx);
          swapped.at(n, 1, y, xx) = x.at(n, 0, y, xx);
        }
      }
    }
    const nn::Tensor a = d.forward(x, false, false), b = d.forward(swapped, false, false);
    const bool range = std::all_of(a.data.begin(), a.data.end(), [](float v) { return v > 0.0f && v < 1.0f; });
    return expect(range && a.data != b.data);
  });
  s.check("network", "generator C1.conv1 holds 640 parameters", [] {
    nn::Generator g;
    for (nn::Param* p : g.params()) {
      if (p->name == "G.C1.conv1.weight") {
        const std::size_t w = p->size();
        for (nn::Param* q : g.params()) {
          if (q->name == "G.C1.conv1.bias") return expect(w + q->size() == 640, std::to_string(w + q->size()));
        }
      }
    }
    return expect(false, "parameter not found");
  });
  s.check("network", "parameter counts match the block-by-block sum", [] {
    const int b = 64;
    std::size_t g = conv_params(3, 1, b) + conv_params(3, b, b) + 4 * b;
    for (int k = 2; k <= 4; ++k) {
      const int ch = b << (k - 1);
      g += conv_params(2, ch / 2, ch) + conv_params(3, ch, ch) + 4 * ch;
    }
    g += conv_params(2, 8 * b, 16 * b) + 2 * 16 * b;
    for (int i = 1; i <= 4; ++i) {
      const int width = 16 * b >> i;
      g += conv_params(2, 2 * width, width) + conv_params(3, 2 * width, width) + 4 * width;
    }
    g += conv_params(3, b, 1) + 2;
    std::size_t d = 0;
    const int ch[] = {2, b, b, 2 * b, 2 * b, 4 * b, 4 * b};
    for (int i = 0; i < 6; ++i) d += conv_params(4, ch[i], ch[i + 1]) + 2 * ch[i + 1];
    d += conv_params(3, 4 * b, 1) + 2;
    nn::Generator gen;
    nn::Discriminator disc;
    return expect(gen.parameter_count() == g && disc.parameter_count() == d,
                  "G " + std::to_string(gen.parameter_count()) + ", D " + std::to_string(disc.parameter_count()));
  });
  s.check("network", "doubling channel widths roughly quadruples the count", [] {
    nn::Generator a({1, 16, 0.2f, 192}), b({1, 32, 0.2f, 192});
    const double r = static_cast<double>(b.parameter_count()) / static_cast<double>(a.parameter_count());
    return expect(r > 3.9 && r < 4.0, "ratio " + num(r));
  });
}

void loss_checks(Suite& s) {
  s.check("losses", "identical output and target give zero L_r", [] {
    RandomSource rng(61);
    const nn::Tensor g = random_tensor(2, 1, 8, 8, rng), w = random_tensor(2, 1, 8, 8, rng);
    return expect(losses::reconstruction_loss(g, g, w) == 0.0);
  });
  s.check("losses", "w = 1 and error 0.5 on N pixels give 0.5 N", [] {
    const nn::Tensor out(1, 1, 8, 8, 0.25f), g(1, 1, 8, 8, 0.75f), w(1, 1, 8, 8, 1.0f);
    const double l = losses::reconstruction_loss(out, g, w);
    return expect(l == 32.0, num(l));
  });
  s.check("losses", "doubling w doubles L_r", [] {
    RandomSource rng(62);
    const nn::Tensor out = random_tensor(2, 1, 8, 8, rng), g = random_tensor(2, 1, 8, 8, rng);
    const nn::Tensor w = random_tensor(2, 1, 8, 8, rng);
    nn::Tensor w2 = w;
    for (float& v : w2.data) v *= 2.0f;
    const double a = losses::reconstruction_loss(out, g, w), b = losses::reconstruction_loss(out, g, w2);
    return expect(std::abs(b - 2.0 * a) <= 1e-12 * std::abs(b), num(a) + " -> " + num(b));
  });
  s.check("losses", "scores 0.5 give d_loss = 2 log 2", [] {
    const double v = losses::adversarial_losses({0.5, 0.5}, {0.5, 0.5}).d_loss;
    return expect(std::abs(v - 2.0 * std::log(2.0)) <= 1e-12, num(v));
  });
  s.check("losses", "perfect discriminator drives d_loss to 0", [] {
    const double e = losses::kScoreEpsilon;
    const double v = losses::adversarial_losses({1.0 - e}, {e}).d_loss;
    return expect(v >= 0.0 && v <= 1e-6, num(v));
  });
  s.check("losses", "g_loss falls strictly as D(fake) rises", [] {
    double prev = 1e300;
    for (double f = 0.05; f < 1.0; f += 0.05) {
      const double g = losses::adversarial_losses({0.5}, {f}).g_loss;
      if (!(g < prev)) return expect(false, "at D(fake) = " + num(f));
      prev = g;
    }
    return expect(true);
  });
  s.check("losses", "eta 0.001, g_adv 1, L_r 100 gives 1.1", [] {
    const double v = losses::total_generator_loss(1.0, 100.0, {});
    return expect(std::abs(v - 1.1) <= 1e-12, num(v));
  });
  s.check("losses", "L_r = 0 leaves g_adv", [] { return expect(losses::total_generator_loss(0.7, 0.0, {}) == 0.7); });
}

dataset::Dataset tiny_dataset() {
  dataset::SynthConfig cfg;
  cfg.prints = 1;
  cfg.seed = 71;
  cfg.print.width = cfg.print.height = 96;
  cfg.pair.latents_per_print = 2;
  cfg.backgrounds = 1;
  return dataset::synthesize(cfg);
}

training::TrainConfig tiny_train_config(int iterations) {
  training::TrainConfig t;
  t.generator = {1, 4, 0.2f, 64};
  t.discriminator = {2, 4, 0.2f};
  t.batch_size = 2;
  t.max_iterations = iterations;
  t.seed = 72;
  return t;
}

bool same_params(nn::Generator& a, nn::Generator& b) {
  const auto pa = a.params(), pb = b.params();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->value != pb[i]->value) return false;
  }
  return true;
}

void training_checks(Suite& s) {
  const auto data = std::make_shared<dataset::Dataset>(tiny_dataset());
  s.check("training", "equal seeds give identical weights after two steps", [data] {
    training::Trainer a(tiny_train_config(2), *data), b(tiny_train_config(2), *data);
    a.run(nullptr);
    b.run(nullptr);
    return expect(same_params(a.generator(), b.generator()));
  });
  s.check("training", "resumed run continues the counter and matches a straight run", [data] {
    training::Trainer first(tiny_train_config(2), *data);
    first.run(nullptr);
    training::Trainer resumed(tiny_train_config(4), *data);
    resumed.restore(first.to_checkpoint());
    const bool counter = resumed.iteration() == 2;
    resumed.run(nullptr);
    training::Trainer straight(tiny_train_config(4), *data);
    straight.run(nullptr);
    return expect(counter && resumed.iteration() == 4 && same_params(resumed.generator(), straight.generator()));
  });
  s.check("training", "metrics log has one row per iteration", [data] {
    TempDir dir;
    const auto cfg = tiny_train_config(3);
    {
      training::MetricsLog log(dir.path() / "m.tsv", cfg, false);
      training::Trainer t(cfg, *data);
      t.run(&log);
    }
    const auto rows = training::read_metrics(dir.path() / "m.tsv");
    return expect(rows.size() == 3 && rows.back().iteration == 3, std::to_string(rows.size()) + " rows");
  });
}

/// Predicts the same value everywhere.
class ConstantPredictor : public inference::PatchPredictor {
 public:
  explicit ConstantPredictor(float v) : v_(v) {}
  nn::Tensor predict(const nn::Tensor& p) override { return nn::Tensor(p.n, 1, p.h, p.w, v_); }

 private:
  float v_;
};

void inference_checks(Suite& s) {
  s.check("inference", "200x200 with window 192 and step 8 tiles 4 windows", [] {
    const auto t = inference::tile_axis(200, 192, 8);
    const MaskGrid cov = inference::coverage(200, 200, {});
    const auto [lo, hi] = std::minmax_element(cov.values().begin(), cov.values().end());
    return expect(t.origins == std::vector<int>{0, 8} && *lo == 1 && *hi == 4,
                  std::to_string(t.origins.size() * t.origins.size()) + " windows");
  });
  s.check("inference", "constant predictor gives a constant output", [] {
    RandomSource rng(81);
    ConstantPredictor stub(0.7f);
    const GrayImage out = inference::enhance_full_image(random_image(200, 200, rng), stub, {});
    const double v = static_cast<double>(0.7f);
    return expect(std::all_of(out.values().begin(), out.values().end(), [v](double x) { return x == v; }));
  });
  s.check("inference", "192x192 input equals one direct forward pass", [] {
    nn::Generator g({1, 4, 0.2f, 192});
    RandomSource rng(82);
    g.init(rng);
    const GrayImage img = random_image(192, 192, rng);
    inference::GeneratorPredictor pred(g);
    const GrayImage out = inference::enhance_full_image(img, pred, {});
    nn::Tensor x(1, 1, 192, 192);
    for (int y = 0; y < 192; ++y) {
      for (int xx = 0; xx < 192; ++xx) x.at(0, 0, y, xx) = static_cast<float>(img(xx, y));
    }
    const nn::Tensor direct = g.forward(x, false);
    for (int y = 0; y < 192; ++y) {
      for (int xx = 0; xx < 192; ++xx) {
        if (out(xx, y) != static_cast<double>(direct.at(0, 0, y, xx))) return expect(false);
      }
    }
    return expect(true);
  });
}

MinutiaSet random_minutiae(int n, int size, RandomSource& rng) {
  MinutiaSet m(size, size);
  while (static_cast<int>(m.size()) < n) {
    const Minutia x{std::floor(rng.uniform(40, size - 40)), std::floor(rng.uniform(40, size - 40)),
                    rng.uniform(0.0, 2 * kPi), rng.uniform01() < 0.5 ? MinutiaKind::ending : MinutiaKind::bifurcation};
    if (std::none_of(m.begin(), m.end(), [&](const Minutia& o) { return o.x == x.x && o.y == x.y; })) m.add(x);
  }
  return m;
}

MinutiaSet from_vector(const std::vector<Minutia>& v) {
  MinutiaSet m;
  for (Minutia x : v) {
    x.angle = wrap_direction(x.angle);
    m.add(x);
  }
  return m;
}

void evaluation_checks(Suite& s) {
  s.check("evaluation", "exact copy recovers every minutia", [] {
    RandomSource rng(91);
    const MinutiaSet g = random_minutiae(20, 256, rng);
    const auto row = evaluation::match_minutiae(g, g);
    return expect(row.recovered == 20 && row.fake == 0);
  });
  s.check("evaluation", "displacement of loc_radius + 1 is not recovered", [] {
    MinutiaSet g(100, 100), e(100, 100);
    g.add({30, 30, 1.0, MinutiaKind::ending});
    e.add({46, 30, 1.0, MinutiaKind::ending});
    const auto row = evaluation::match_minutiae(e, g);
    return expect(row.recovered == 0 && row.fake == 1);
  });
  s.check("evaluation", "two candidates for one genuine minutia pair one to one", [] {
    MinutiaSet g(100, 100), e(100, 100);
    g.add({50, 50, 1.0, MinutiaKind::ending});
    e.add({52, 50, 1.0, MinutiaKind::ending});
    e.add({45, 50, 1.1, MinutiaKind::ending});
    const auto row = evaluation::match_minutiae(e, g);
    return expect(row.recovered == 1 && row.fake == 1 && row.pairs.front().extracted == 0);
  });
  s.check("evaluation", "self-match scores 1", [] {
    RandomSource rng(92);
    const MinutiaSet m = random_minutiae(25, 300, rng);
    const double v = evaluation::similarity_score(m, m);
    return expect(v == 1.0, num(v));
  });
  s.check("evaluation", "10 deg rotation and (7,-4) shift scores at least 0.9", [] {
    RandomSource rng(93);
    const MinutiaSet m = random_minutiae(30, 300, rng);
    const MinutiaSet t = from_vector(evaluation::transform(m.items(), 10.0 * kPi / 180.0, 7.0, -4.0));
    const double v = evaluation::similarity_score(m, t);
    return expect(v >= 0.9, num(v));
  });
  s.check("evaluation", "independent random sets score at most 0.2", [] {
    RandomSource rng(94);
    const MinutiaSet a = random_minutiae(30, 512, rng), b = random_minutiae(30, 512, rng);
    const double v = evaluation::similarity_score(a, b);
    return expect(v <= 0.2, num(v));
  });
  s.check("evaluation", "strictly highest mate scores gives rank-1 of 1", [] {
    evaluation::ScoreMatrix m{{{0.9, 0.1, 0.2}, {0.3, 0.8, 0.1}}, {0, 1}};
    return expect(evaluation::cmc_curve(m).front() == 1.0);
  });
  s.check("evaluation", "mates ranked second give rank-1 0 and rank-2 1", [] {
    evaluation::ScoreMatrix m{{{0.9, 0.5, 0.2}, {0.3, 0.8, 0.9}}, {1, 1}};
    const auto c = evaluation::cmc_curve(m);
    return expect(c[0] == 0.0 && c[1] == 1.0);
  });
  s.check("evaluation", "planted ranks on a random 10x50 matrix", [] {
    RandomSource rng(95);
    evaluation::ScoreMatrix m;
    std::vector<std::size_t> planted;
    for (int p = 0; p < 10; ++p) {
      std::vector<double> row(50);
      for (double& v : row) v = rng.uniform01();
      std::vector<std::size_t> order(50);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return row[a] > row[b]; });
      const std::size_t rank = 2 * p + 1;
      m.scores.push_back(row);
      m.true_mate.push_back(order[rank - 1]);
      planted.push_back(rank);
    }
    const auto c = evaluation::cmc_curve(m);
    for (std::size_t k = 1; k <= 50; ++k) {
      const double expected =
          static_cast<double>(std::count_if(planted.begin(), planted.end(), [k](auto r) { return r <= k; })) / 10.0;
      if (c[k - 1] != expected) return expect(false, "rank " + std::to_string(k));
    }
    return expect(true);
  });
}

void config_checks(Suite& s) {
  s.check("cli", "defaults carry the published values", [] {
    config::RunConfig c;
    const bool ok = config::get(c, "train.eta") == "0.001" && config::get(c, "train.learning_rate") == "0.001" &&
                    config::get(c, "weight.sigma") == "8" && config::get(c, "weight.r") == "17" &&
                    config::get(c, "inference.window") == "192" && config::get(c, "inference.step") == "8" &&
                    config::get(c, "synth.lambda_min") == "0.20000000000000001" &&
                    config::get(c, "synth.lambda_max") == "0.80000000000000004";
    return expect(ok);
  });
  s.check("cli", "dumped config reloads to the same config", [] {
    config::RunConfig a;
    config::set(a, "train.eta", "0.0123");
    config::set(a, "seed", "99");
    config::set(a, "inference.aggregation", "gaussian");
    config::set(a, "match.angle_tol_deg", "25");
    config::RunConfig b;
    config::apply_text(b, config::dump(a), "dump");
    return expect(config::dump(b) == config::dump(a));
  });
}

}  // namespace

std::vector<CheckResult> run_all() {
  Suite s;
  image_io_checks(s);
  minutia_checks(s);
  distortion_checks(s);
  synthesis_checks(s);
  tv_checks(s);
  gabor_checks(s);
  skeleton_checks(s);
  orientation_checks(s);
  weightmap_checks(s);
  network_checks(s);
  loss_checks(s);
  training_checks(s);
  inference_checks(s);
  evaluation_checks(s);
  config_checks(s);
  return s.take();
}

}  // namespace fingergan::selfcheck
