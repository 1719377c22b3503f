#include "fingergan/synthesis.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fingergan::synthesis {
namespace {

constexpr int kMaskErosion = 3;

MaskGrid erode(const MaskGrid& mask, int radius) {
  cv::Mat m(mask.height(), mask.width(), CV_8U, const_cast<std::uint8_t*>(mask.data()));
  cv::Mat out;
  cv::erode(m, out, cv::getStructuringElement(cv::MORPH_ELLIPSE, {2 * radius + 1, 2 * radius + 1}), {-1, -1}, 1,
            cv::BORDER_CONSTANT, 0);
  MaskGrid result(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) result(x, y) = out.at<std::uint8_t>(y, x);
  }
  return result;
}

}  // namespace

void SpeckleParams::validate() const {
  if (!(variance >= 0.0) || !std::isfinite(variance)) throw std::invalid_argument("speckle: variance must be >= 0");
}

double speckle_noise(double variance, RandomSource& rng) {
  const double a = std::sqrt(3.0 * variance);
  return rng.uniform(-a, a);
}

GrayImage add_speckle(const GrayImage& img, const SpeckleParams& params, RandomSource& rng) {
  params.validate();
  RealGrid out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double b = img.values()[i];
    out.values()[i] = b + speckle_noise(params.variance, rng) * b;
  }
  return GrayImage::clamped(std::move(out));
}

void FusionParams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("fusion: lambda must lie in [0,1]");
}

GrayImage fuse_background(const GrayImage& speckled, const FusionParams& params) {
  params.validate();
  require_same_dims(speckled, params.background, "fuse_background");
  RealGrid out(speckled.width(), speckled.height());
  const double l = params.lambda;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values()[i] = (1.0 - l) * speckled.values()[i] + l * params.background.values()[i];
  }
  return GrayImage::clamped(std::move(out));
}

void SynthesisRanges::validate() const {
  distortion.validate();
  if (!(variance_min >= 0.0 && variance_min <= variance_max)) {
    throw std::invalid_argument("synthesis: need 0 <= variance_min <= variance_max");
  }
  if (!(lambda_min >= 0.0 && lambda_min <= lambda_max && lambda_max <= 1.0)) {
    throw std::invalid_argument("synthesis: need 0 <= lambda_min <= lambda_max <= 1");
  }
}

GrayImage crop(const GrayImage& img, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > img.width() || y + height > img.height()) {
    throw std::invalid_argument("crop: window outside the image");
  }
  RealGrid out(width, height);
  for (int yy = 0; yy < height; ++yy) {
    for (int xx = 0; xx < width; ++xx) out(xx, yy) = img(x + xx, y + yy);
  }
  return GrayImage::from_grid(std::move(out));
}

LatentSynthesis synthesize_latent(const GrayImage& rolled, const SynthesisRanges& ranges,
                                  const std::vector<GrayImage>& backgrounds, RandomSource& rng) {
  ranges.validate();
  if (backgrounds.empty()) throw std::invalid_argument("synthesize_latent: no background crops available");
  const int w = rolled.width(), h = rolled.height();

  LatentSynthesis out;
  LatentDraw& d = out.draw;
  d.distortion = distortion::sample_distortion(ranges.distortion, rng, w, h);
  d.variance = rng.uniform(ranges.variance_min, ranges.variance_max);
  d.lambda = rng.uniform(ranges.lambda_min, ranges.lambda_max);
  d.background_index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(backgrounds.size()) - 1));
  const GrayImage& bg = backgrounds[d.background_index];
  if (bg.width() < w || bg.height() < h) {
    throw std::invalid_argument("synthesize_latent: background " + std::to_string(d.background_index) + " (" +
                                std::to_string(bg.width()) + "x" + std::to_string(bg.height()) +
                                ") is smaller than the print");
  }
  d.crop_x = static_cast<int>(rng.uniform_int(0, bg.width() - w));
  d.crop_y = static_cast<int>(rng.uniform_int(0, bg.height() - h));

  const GrayImage distorted = distortion::distort_image(rolled, d.distortion);
  const GrayImage speckled = add_speckle(distorted, {d.variance}, rng);
  out.image = fuse_background(speckled, {d.lambda, crop(bg, d.crop_x, d.crop_y, w, h)});
  return out;
}

double mean_coherence(const GrayImage& img, const QualityConfig& cfg) {
  const auto raw = orientation::estimate_raw_orientation(img.grid(), cfg.orientation);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < raw.coherence.size(); ++i) {
    if (raw.field.mask.values()[i]) {
      sum += raw.coherence.values()[i];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

bool passes_quality(const GrayImage& img, const QualityConfig& cfg) {
  return mean_coherence(img, cfg) >= cfg.min_mean_coherence;
}

void PairConfig::validate() const {
  ranges.validate();
  tv.validate();
  gabor.validate();
  weights.validate();
  if (latents_per_print < 1) throw std::invalid_argument("pair config: latents_per_print must be >= 1");
}

GroundTruth build_ground_truth(const GrayImage& rolled, const PairConfig& cfg) {
  cfg.validate();
  GroundTruth gt;
  gt.texture = tv::decompose(rolled, cfg.tv).scaled_texture(cfg.scaling);
  const OrientationField orient = orientation::estimate_dense_orientation(gt.texture.grid(), cfg.enhance_orientation);
  gt.enhanced = skeleton::enhance_gabor(gt.texture, orient, cfg.gabor);
  gt.skeleton = skeleton::skeletonize(gt.enhanced, cfg.binarize);
  // Weak responses along the mask edge binarize into a spurious outline.
  const MaskGrid inner = erode(orient.mask, kMaskErosion);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (!inner.values()[i]) gt.skeleton.values()[i] = 0;
  }

  const auto raw = orientation::estimate_raw_orientation(gt.skeleton, cfg.gt_orientation);
  const auto fit = orientation::fit_fomfe(raw.field, cfg.fomfe);
  gt.orientation = orientation::evaluate_fomfe(fit.model);

  gt.minutiae = skeleton::extract_minutiae(gt.skeleton, cfg.minutiae);
  gt.weight_map = weightmap::build_weight_map(
      skeleton::minutia_map(gt.minutiae, rolled.width(), rolled.height()), cfg.weights);

  RealGrid gray(rolled.width(), rolled.height());
  for (std::size_t i = 0; i < gray.size(); ++i) gray.values()[i] = 1.0 - rolled.values()[i];
  gt.gray = GrayImage::from_grid(std::move(gray));
  return gt;
}

LatentSample build_latent(const GrayImage& rolled, const GroundTruth& gt, const std::vector<GrayImage>& backgrounds,
                          RandomSource& rng, const PairConfig& cfg) {
  LatentSample s;
  auto synth = synthesize_latent(rolled, cfg.ranges, backgrounds, rng);
  s.latent = std::move(synth.image);
  s.draw = synth.draw;
  s.texture = tv::decompose(s.latent, cfg.tv).scaled_texture(cfg.scaling);

  s.genuine = MinutiaSet(rolled.width(), rolled.height());
  for (const auto& m : gt.minutiae) {
    const distortion::Vec2 p = distortion::forward_map({m.x, m.y}, s.draw.distortion);
    const distortion::Vec2 q =
        distortion::forward_map({m.x + 2.0 * std::cos(m.angle), m.y + 2.0 * std::sin(m.angle)}, s.draw.distortion);
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= rolled.width() - 1.0 && p.y <= rolled.height() - 1.0)) continue;
    Minutia mapped = m;
    mapped.x = p.x;
    mapped.y = p.y;
    mapped.angle = wrap_direction(std::atan2(q.y - p.y, q.x - p.x));
    const bool taken = std::any_of(s.genuine.begin(), s.genuine.end(),
                                   [&](const Minutia& o) { return o.x == mapped.x && o.y == mapped.y; });
    if (!taken) s.genuine.add(mapped);
  }
  return s;
}

TrainingPair build_training_pair(const GrayImage& rolled, const std::vector<GrayImage>& backgrounds, RandomSource& rng,
                                 const PairConfig& cfg) {
  GroundTruth gt = build_ground_truth(rolled, cfg);
  LatentSample s = build_latent(rolled, gt, backgrounds, rng, cfg);
  return {std::move(s.texture), std::move(gt.skeleton), std::move(gt.orientation), std::move(gt.weight_map)};
}

PrintSamples build_print_samples(const GrayImage& rolled, const std::vector<GrayImage>& backgrounds,
                                 const RandomSource& rng, const PairConfig& cfg) {
  PrintSamples out;
  out.gt = build_ground_truth(rolled, cfg);
  for (int i = 0; i < cfg.latents_per_print; ++i) {
    RandomSource child = rng.derive(static_cast<std::uint64_t>(i));
    out.latents.push_back(build_latent(rolled, out.gt, backgrounds, child, cfg));
  }
  return out;
}

}  // namespace fingergan::synthesis
