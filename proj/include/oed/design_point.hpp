#ifndef OED_DESIGN_POINT_HPP
#define OED_DESIGN_POINT_HPP

#include <array>
#include <cmath>
#include <stdexcept>

namespace oed {

// A point of the design space: either a plain observation time (1-D) or a
// (temperature, time) pair (2-D). Coordinates are ordered so that
// lexicographic comparison sorts by temperature first, then time.
class DesignPoint {
 public:
  DesignPoint() = default;

  static DesignPoint time(double t) {
    DesignPoint p;
    p.dim_ = 1;
    p.c_ = {t, 0.0};
    return p;
  }

  static DesignPoint temp_time(double temperature, double t) {
    DesignPoint p;
    p.dim_ = 2;
    p.c_ = {temperature, t};
    return p;
  }

  int dim() const { return dim_; }

  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  // Observation time (last coordinate).
  double obs_time() const { return c_[static_cast<std::size_t>(dim_ - 1)]; }

  double temperature() const {
    if (dim_ != 2) throw std::logic_error("DesignPoint: no temperature coordinate");
    return c_[0];
  }

  friend bool operator==(const DesignPoint& a, const DesignPoint& b) {
    return a.dim_ == b.dim_ && a.c_ == b.c_;
  }

  // Lexicographic order; used for deterministic tie-breaking.
  friend bool operator<(const DesignPoint& a, const DesignPoint& b) {
    if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[static_cast<std::size_t>(i)] != b.c_[static_cast<std::size_t>(i)])
        return a.c_[static_cast<std::size_t>(i)] < b.c_[static_cast<std::size_t>(i)];
    }
    return false;
  }

 private:
  std::array<double, 2> c_{0.0, 0.0};
  int dim_ = 1;
};

}  // namespace oed

#endif
