#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fingergan/minutia.hpp"

namespace fingergan::evaluation {

struct MatchTolerance {
  double loc_radius = 15.0;               ///< pixels, inclusive
  double angle_tol = 0.5235987755982988;  ///< radians (pi/6), inclusive
  bool require_type = true;

  void validate() const;
};

/// Smallest absolute difference of two directions, in [0, pi].
double angle_difference(double a, double b) noexcept;

/// Whether extracted minutia `e` may pair with genuine minutia `g`.
bool compatible(const Minutia& e, const Minutia& g, const MatchTolerance& tol) noexcept;

struct MatchedPair {
  std::size_t extracted = 0;
  std::size_t genuine = 0;
  double distance = 0.0;
};

struct RecoveryRow {
  std::string id;
  std::size_t extracted = 0;
  std::size_t genuine = 0;
  std::size_t recovered = 0;  ///< recovered genuine minutiae
  std::size_t fake = 0;       ///< introduced fake minutiae, extracted - recovered
  std::vector<MatchedPair> pairs;
};

/// Greedy one-to-one pairing: compatible candidate pairs sorted by distance
/// (ties by extracted index, then genuine index) are accepted while both
/// ends are free.
RecoveryRow match_minutiae(const MinutiaSet& extracted, const MinutiaSet& genuine, const MatchTolerance& tol = {});

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
  std::size_t total_recovered = 0;
  std::size_t total_fake = 0;
  std::size_t total_genuine = 0;
  std::size_t total_extracted = 0;

  void add(RecoveryRow row);
  /// TSV: id, genuine, extracted, recovered_genuine, introduced_fake; then a TOTAL row.
  std::string to_tsv() const;
};

struct SimilarityConfig {
  MatchTolerance tolerance{15.0, 0.5235987755982988, false};
  double rotation_step_deg = 2.0;  ///< anchor rotations are snapped to this grid
};

/// Alignment search: every (probe, gallery) minutia pair anchors a rotation
/// (their angle difference snapped to the step grid) and the translation
/// taking the rotated probe anchor onto the gallery anchor. The score is the
/// best greedy pair count over anchors divided by sqrt(|probe| |gallery|);
/// 0 when either set is empty.
double similarity_score(const MinutiaSet& probe, const MinutiaSet& gallery, const SimilarityConfig& cfg = {});

/// Rigid transform about the origin followed by translation; angles shift by
/// the rotation. Points are not required to stay inside the image.
std::vector<Minutia> transform(const std::vector<Minutia>& mins, double rotation, double tx, double ty);

struct ScoreMatrix {
  std::vector<std::vector<double>> scores;  ///< probes x gallery
  std::vector<std::size_t> true_mate;       ///< gallery index per probe

  void validate() const;
};

/// 1-based rank of the true mate: one plus the gallery entries scoring
/// higher, or equal with a smaller index.
std::size_t mate_rank(const ScoreMatrix& m, std::size_t probe);

/// accuracy[k-1] = fraction of probes whose mate rank is <= k, k = 1..gallery size.
std::vector<double> cmc_curve(const ScoreMatrix& m);
/// CSV "rank,accuracy".
std::string cmc_to_csv(const std::vector<double>& curve);
std::vector<double> read_cmc_csv(const std::string& text);

}  // namespace fingergan::evaluation
