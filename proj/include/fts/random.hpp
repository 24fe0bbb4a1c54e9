#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace fts {

/// splitmix64 finaliser; derives independent per-task seeds from a root seed
/// so parallel Monte Carlo stays reproducible regardless of worker count.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept;

/// Standard normal draws from mt19937_64 via Box-Muller. The transform is
/// written out here rather than using std::normal_distribution, whose output
/// is implementation-defined, so seeds reproduce across standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()();
  double uniform();  // (0, 1]
  /// Fills a vector with N(0, scale^2) draws.
  Eigen::VectorXd draw(Eigen::Index n, double scale = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fts
