#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "clindiag/encoding.hpp"

namespace clindiag {

/// SplitMix64. Every random stream in the project is derived from one 64-bit
/// seed through this generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent engine for `stream` under `seed`.
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream);

namespace streams {
inline constexpr std::uint64_t kDirection = 1;
inline constexpr std::uint64_t kSamples = 2;
inline constexpr std::uint64_t kOverlap = 3;
inline constexpr std::uint64_t kHoldout = 4;
}  // namespace streams

struct CohortSpec {
  Eigen::Index n_per_class = 104;
  Eigen::Index dims = 2;
  double separation = 6.0;
  double overlap = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr const char* kSynthLabelColumn = "diagnosis";
inline constexpr const char* kSynthPositive = "patient";
inline constexpr const char* kSynthNegative = "normal";

/// Two unit-variance Gaussian clusters centred at +/-(separation/2) u for a
/// seeded random unit vector u. In each class round(overlap * n) points are
/// drawn from the opposite cluster instead. Patients come first.
LabeledDataset synth_cohort(const CohortSpec& spec);

/// CSV with columns f1..fd and a final `diagnosis` column.
std::string synth_csv(const CohortSpec& spec);
/// Numeric schema matching synth_csv output.
EncodingSchema synth_schema(Eigen::Index dims);

/// Seeded shuffle split: the first round(fraction * n) shuffled indices form
/// the held-out part. Both index lists are returned sorted.
struct HoldoutSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};
HoldoutSplit holdout_split(Eigen::Index n, double fraction, std::uint64_t seed);

}  // namespace clindiag
