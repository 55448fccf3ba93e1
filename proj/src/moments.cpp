#include "zz/moments.hpp"

#include <algorithm>
#include <stdexcept>

namespace zz {

std::vector<double> TrajectoryMoments::mean() const {
  if (!(duration > 0.0)) throw std::invalid_argument("moments: zero duration");
  std::vector<double> out(m1.size());
  for (std::size_t i = 0; i < m1.size(); ++i) out[i] = m1[i] / duration;
  return out;
}

std::vector<double> TrajectoryMoments::variance() const {
  const std::vector<double> mu = mean();
  std::vector<double> out(m2.size());
  for (std::size_t i = 0; i < m2.size(); ++i)
    out[i] = std::max(m2[i] / duration - mu[i] * mu[i], 0.0);
  return out;
}

TrajectoryMoments& TrajectoryMoments::operator+=(const TrajectoryMoments& other) {
  if (other.m1.size() != m1.size())
    throw std::invalid_argument("moments: dimension mismatch");
  duration += other.duration;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    m1[i] += other.m1[i];
    m2[i] += other.m2[i];
  }
  return *this;
}

void accumulate_segment(TrajectoryMoments& moments, std::span<const double> xi,
                        std::span<const double> velocity, double tau) {
  if (!(tau > 0.0)) return;
  const std::size_t p = moments.m1.size();
  for (std::size_t i = 0; i < p; ++i) {
    const double x = xi[i];
    const double v = velocity[i];
    moments.m1[i] += (x + 0.5 * v * tau) * tau;
    moments.m2[i] += (x * x + x * v * tau + v * v * tau * tau / 3.0) * tau;
  }
  moments.duration += tau;
}

}  // namespace zz
