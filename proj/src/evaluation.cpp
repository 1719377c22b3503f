#include "fingergan/evaluation.hpp"

#include "fingergan/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fingergan::evaluation {
namespace {

std::vector<MatchedPair> greedy_pairs(const std::vector<Minutia>& extracted, const std::vector<Minutia>& genuine,
                                      const MatchTolerance& tol) {
  std::vector<MatchedPair> candidates;
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    for (std::size_t j = 0; j < genuine.size(); ++j) {
      if (!compatible(extracted[i], genuine[j], tol)) continue;
      candidates.push_back({i, j, std::hypot(extracted[i].x - genuine[j].x, extracted[i].y - genuine[j].y)});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.extracted != b.extracted) return a.extracted < b.extracted;
    return a.genuine < b.genuine;
  });
  std::vector<bool> used_e(extracted.size(), false), used_g(genuine.size(), false);
  std::vector<MatchedPair> out;
  for (const auto& c : candidates) {
    if (used_e[c.extracted] || used_g[c.genuine]) continue;
    used_e[c.extracted] = used_g[c.genuine] = true;
    out.push_back(c);
  }
  return out;
}

}  // namespace

void MatchTolerance::validate() const {
  if (!(loc_radius >= 0.0) || !(angle_tol >= 0.0)) throw std::invalid_argument("match tolerance: values must be >= 0");
}

double angle_difference(double a, double b) noexcept {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

bool compatible(const Minutia& e, const Minutia& g, const MatchTolerance& tol) noexcept {
  if (tol.require_type && e.kind != g.kind) return false;
  const double dx = e.x - g.x, dy = e.y - g.y;
  if (dx * dx + dy * dy > tol.loc_radius * tol.loc_radius) return false;
  return angle_difference(e.angle, g.angle) <= tol.angle_tol;
}

RecoveryRow match_minutiae(const MinutiaSet& extracted, const MinutiaSet& genuine, const MatchTolerance& tol) {
  tol.validate();
  RecoveryRow row;
  row.extracted = extracted.size();
  row.genuine = genuine.size();
  row.pairs = greedy_pairs(extracted.items(), genuine.items(), tol);
  row.recovered = row.pairs.size();
  row.fake = row.extracted - row.recovered;
  return row;
}

void RecoveryReport::add(RecoveryRow row) {
  total_recovered += row.recovered;
  total_fake += row.fake;
  total_genuine += row.genuine;
  total_extracted += row.extracted;
  rows.push_back(std::move(row));
}

std::string RecoveryReport::to_tsv() const {
  std::ostringstream out;
  out << "id\tgenuine\textracted\trecovered_genuine\tintroduced_fake\n";
  for (const auto& r : rows) {
    out << r.id << '\t' << r.genuine << '\t' << r.extracted << '\t' << r.recovered << '\t' << r.fake << '\n';
  }
  out << "TOTAL\t" << total_genuine << '\t' << total_extracted << '\t' << total_recovered << '\t' << total_fake << '\n';
  return out.str();
}

std::vector<Minutia> transform(const std::vector<Minutia>& mins, double rotation, double tx, double ty) {
  const double c = std::cos(rotation), s = std::sin(rotation);
  std::vector<Minutia> out;
  out.reserve(mins.size());
  for (const auto& m : mins) {
    Minutia t = m;
    t.x = c * m.x - s * m.y + tx;
    t.y = s * m.x + c * m.y + ty;
    t.angle = wrap_direction(m.angle + rotation);
    out.push_back(t);
  }
  return out;
}

double similarity_score(const MinutiaSet& probe, const MinutiaSet& gallery, const SimilarityConfig& cfg) {
  cfg.tolerance.validate();
  if (!(cfg.rotation_step_deg > 0.0)) throw std::invalid_argument("similarity: rotation step must be > 0");
  if (probe.empty() || gallery.empty()) return 0.0;
  const double step = cfg.rotation_step_deg * std::numbers::pi / 180.0;
  std::size_t best = 0;
  for (const auto& p : probe) {
    for (const auto& g : gallery) {
      if (cfg.tolerance.require_type && p.kind != g.kind) continue;
      double rot = g.angle - p.angle;
      rot = std::atan2(std::sin(rot), std::cos(rot));
      rot = std::round(rot / step) * step;
      const double c = std::cos(rot), s = std::sin(rot);
      const double tx = g.x - (c * p.x - s * p.y), ty = g.y - (s * p.x + c * p.y);
      const auto moved = transform(probe.items(), rot, tx, ty);
      best = std::max(best, greedy_pairs(moved, gallery.items(), cfg.tolerance).size());
    }
  }
  return static_cast<double>(best) / std::sqrt(static_cast<double>(probe.size()) * static_cast<double>(gallery.size()));
}

void ScoreMatrix::validate() const {
  if (scores.size() != true_mate.size()) throw std::invalid_argument("score matrix: one true mate per probe required");
  const std::size_t g = scores.empty() ? 0 : scores.front().size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != g) throw std::invalid_argument("score matrix: ragged rows");
    if (true_mate[i] >= g) throw std::invalid_argument("score matrix: true mate index out of range");
    for (const double v : scores[i]) {
      if (!std::isfinite(v)) throw std::invalid_argument("score matrix: non-finite score");
    }
  }
}

std::size_t mate_rank(const ScoreMatrix& m, std::size_t probe) {
  const auto& row = m.scores.at(probe);
  const std::size_t mate = m.true_mate.at(probe);
  std::size_t rank = 1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > row[mate] || (row[j] == row[mate] && j < mate)) ++rank;
  }
  return rank;
}

std::vector<double> cmc_curve(const ScoreMatrix& m) {
  m.validate();
  if (m.scores.empty()) return {};
  const std::size_t g = m.scores.front().size();
  std::vector<std::size_t> hits(g + 1, 0);
  for (std::size_t i = 0; i < m.scores.size(); ++i) ++hits[mate_rank(m, i)];
  std::vector<double> curve(g, 0.0);
  std::size_t cumulative = 0;
  for (std::size_t k = 1; k <= g; ++k) {
    cumulative += hits[k];
    curve[k - 1] = static_cast<double>(cumulative) / static_cast<double>(m.scores.size());
  }
  return curve;
}

std::string cmc_to_csv(const std::vector<double>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "rank,accuracy\n";
  for (std::size_t k = 0; k < curve.size(); ++k) out << (k + 1) << ',' << curve[k] << '\n';
  return out.str();
}

std::vector<double> read_cmc_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> curve;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "rank,accuracy") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("cmc csv: malformed line " + std::to_string(lineno));
    if (std::stoul(line.substr(0, comma)) != curve.size() + 1) {
      throw std::runtime_error("cmc csv: ranks must run 1, 2, ... (line " + std::to_string(lineno) + ")");
    }
    curve.push_back(std::stod(line.substr(comma + 1)));
  }
  return curve;
}

}  // namespace fingergan::evaluation
