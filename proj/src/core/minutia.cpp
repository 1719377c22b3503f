#include "fingergan/minutia.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fingergan {

char kind_code(MinutiaKind kind) noexcept { return kind == MinutiaKind::ending ? 'E' : 'B'; }

void MinutiaSet::add(const Minutia& m) {
  if (!std::isfinite(m.x) || !std::isfinite(m.y)) throw std::invalid_argument("minutia coordinates must be finite");
  if (!(m.angle >= 0.0 && m.angle < 2.0 * std::numbers::pi)) {
    throw std::invalid_argument("minutia angle outside [0,2pi)");
  }
  if (width_ > 0 && height_ > 0 && (m.x < 0.0 || m.y < 0.0 || m.x >= width_ || m.y >= height_)) {
    throw std::invalid_argument("minutia (" + std::to_string(m.x) + "," + std::to_string(m.y) +
                                ") outside image bounds");
  }
  for (const auto& other : items_) {
    if (other.x == m.x && other.y == m.y) {
      throw std::invalid_argument("duplicate minutia location (" + std::to_string(m.x) + "," +
                                  std::to_string(m.y) + ")");
    }
  }
  items_.push_back(m);
}

MinutiaSet parse_minutiae(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  MinutiaSet set;
  bool body_started = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream hdr(line.substr(first + 1));
      std::string key;
      int w = 0, h = 0;
      if (hdr >> key && key == "size") {
        if (body_started || !(hdr >> w >> h) || w < 1 || h < 1) {
          throw std::runtime_error("minutia file line " + std::to_string(line_no) + ": malformed size header");
        }
        set = MinutiaSet(w, h);
      }
      continue;
    }
    body_started = true;
    std::istringstream rec(line);
    double x = 0, y = 0, deg = 0;
    std::string kind, extra;
    if (!(rec >> x >> y >> deg >> kind) || (rec >> extra) || (kind != "E" && kind != "B")) {
      throw std::runtime_error("minutia file line " + std::to_string(line_no) + ": expected `x y angle_degrees E|B`");
    }
    if (!(deg >= 0.0 && deg < 360.0)) {
      throw std::runtime_error("minutia file line " + std::to_string(line_no) + ": angle " + std::to_string(deg) +
                               " outside [0,360)");
    }
    Minutia m{x, y, deg * std::numbers::pi / 180.0, kind == "E" ? MinutiaKind::ending : MinutiaKind::bifurcation};
    // Degree values just below 360 can round up to 2pi.
    if (m.angle >= 2.0 * std::numbers::pi) m.angle = 0.0;
    try {
      set.add(m);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("minutia file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

MinutiaSet read_minutiae(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open minutia file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_minutiae(buf.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string format_minutiae(const MinutiaSet& set) {
  std::ostringstream out;
  if (set.width() > 0 && set.height() > 0) out << "# size " << set.width() << ' ' << set.height() << '\n';
  out << std::setprecision(10);
  for (const auto& m : set) {
    double deg = m.angle * 180.0 / std::numbers::pi;
    if (deg >= 360.0) deg = 0.0;
    out << m.x << ' ' << m.y << ' ' << deg << ' ' << kind_code(m.kind) << '\n';
  }
  return out.str();
}

void write_minutiae(const MinutiaSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write minutia file " + path.string());
  out << format_minutiae(set);
  if (!out) throw std::runtime_error("failed writing minutia file " + path.string());
}

}  // namespace fingergan
