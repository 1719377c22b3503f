#include "fingergan/plot.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fingergan/evaluation.hpp"
#include "fingergan/training.hpp"

namespace fingergan::plot {
namespace {

const cv::Scalar kPalette[] = {{200, 80, 30}, {40, 40, 200}, {40, 150, 40}, {150, 40, 150}, {30, 150, 200}};

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void render_line_chart(const std::vector<Series>& series, const ChartConfig& cfg, const std::filesystem::path& out) {
  if (cfg.width < 200 || cfg.height < 150) throw std::invalid_argument("plot: canvas too small");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot: series '" + s.label + "' has mismatched x/y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) throw std::invalid_argument("plot: nothing to draw");
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }

  cv::Mat img(cfg.height, cfg.width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int left = 70, right = cfg.width - 20, top = 40, bottom = cfg.height - 50;
  auto px = [&](double x) { return left + static_cast<int>(std::lround((x - x0) / (x1 - x0) * (right - left))); };
  auto py = [&](double y) { return bottom - static_cast<int>(std::lround((y - y0) / (y1 - y0) * (bottom - top))); };

  const cv::Scalar axis(0, 0, 0), grid(225, 225, 225);
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
    cv::line(img, {px(xv), top}, {px(xv), bottom}, grid, 1);
    cv::line(img, {left, py(yv)}, {right, py(yv)}, grid, 1);
    cv::putText(img, tick(xv), {px(xv) - 15, bottom + 18}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1, cv::LINE_AA);
    cv::putText(img, tick(yv), {5, py(yv) + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1, cv::LINE_AA);
  }
  cv::rectangle(img, {left, top}, {right, bottom}, axis, 1);
  cv::putText(img, cfg.title, {left, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.6, axis, 1, cv::LINE_AA);
  cv::putText(img, cfg.x_label, {(left + right) / 2 - 30, cfg.height - 12}, cv::FONT_HERSHEY_SIMPLEX, 0.5, axis, 1,
              cv::LINE_AA);
  cv::putText(img, cfg.y_label, {left + 5, top + 15}, cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1, cv::LINE_AA);

  int legend_y = top + 35;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const cv::Scalar colour = kPalette[k % std::size(kPalette)];
    std::vector<cv::Point> pts;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (std::isfinite(series[k].x[i]) && std::isfinite(series[k].y[i])) pts.emplace_back(px(series[k].x[i]), py(series[k].y[i]));
    }
    if (pts.size() == 1) cv::circle(img, pts[0], 3, colour, cv::FILLED);
    if (pts.size() > 1) cv::polylines(img, pts, false, colour, 1, cv::LINE_AA);
    cv::line(img, {right - 150, legend_y - 4}, {right - 125, legend_y - 4}, colour, 2);
    cv::putText(img, series[k].label, {right - 120, legend_y}, cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1, cv::LINE_AA);
    legend_y += 18;
  }
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  if (!cv::imwrite(out.string(), img)) throw std::runtime_error("plot: cannot write " + out.string());
}

void plot_metrics(const std::filesystem::path& metrics_tsv, const std::filesystem::path& out) {
  const auto rows = training::read_metrics(metrics_tsv);
  if (rows.empty()) throw std::runtime_error("plot: metrics log " + metrics_tsv.string() + " has no rows");
  Series lr{"L_r", {}, {}}, dl{"d_loss", {}, {}}, ga{"g_adv", {}, {}};
  for (const auto& r : rows) {
    const auto it = static_cast<double>(r.iteration);
    lr.x.push_back(it);
    lr.y.push_back(r.l_r);
    dl.x.push_back(it);
    dl.y.push_back(r.d_loss);
    ga.x.push_back(it);
    ga.y.push_back(r.g_adv);
  }
  render_line_chart({lr, dl, ga}, {"training (" + training::metrics_mode(metrics_tsv) + ")", "iteration", "loss"}, out);
}

void plot_cmc(const std::filesystem::path& cmc_csv, const std::filesystem::path& out) {
  std::ifstream in(cmc_csv);
  if (!in) throw std::runtime_error("plot: cannot open " + cmc_csv.string());
  std::stringstream text;
  text << in.rdbuf();
  const auto curve = evaluation::read_cmc_csv(text.str());
  Series s{"CMC", {}, {}};
  for (std::size_t k = 0; k < curve.size(); ++k) {
    s.x.push_back(static_cast<double>(k + 1));
    s.y.push_back(curve[k]);
  }
  render_line_chart({s}, {"CMC", "rank", "identification rate"}, out);
}

}  // namespace fingergan::plot
