#pragma once

#include <cstdint>
#include <vector>

namespace liftlab {

// compensated (Kahan) accumulator for expectations over explicit pmfs
struct KahanSum {
  double total = 0.0;
  double compensation = 0.0;

  void add(double value) {
    const double y = value - compensation;
    const double t = total + y;
    compensation = (t - total) - y;
    total = t;
  }
  double value() const { return total; }
};

inline double kahan_sum(const std::vector<double>& values) {
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value();
}

}  // namespace liftlab
