#include "fingergan/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fingergan {

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

double RandomSource::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomSource::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::int64_t RandomSource::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

double RandomSource::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  double u1;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

RandomSource RandomSource::derive(std::uint64_t index) const {
  return RandomSource(mix_seed(seed_ ^ mix_seed(index + 0x632be59bd9b4e019ULL)));
}

std::string RandomSource::serialize_state() const {
  std::ostringstream out;
  out << seed_ << ' ' << has_spare_ << ' ';
  out.precision(17);
  out << spare_ << ' ' << engine_;
  return out.str();
}

void RandomSource::restore_state(const std::string& state) {
  std::istringstream in(state);
  if (!(in >> seed_ >> has_spare_ >> spare_ >> engine_)) {
    throw std::runtime_error("corrupt random-source state");
  }
}

}  // namespace fingergan
