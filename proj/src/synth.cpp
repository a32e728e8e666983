#include "clindiag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clindiag/csv.hpp"
#include "clindiag/error.hpp"
#include "clindiag/model_io.hpp"

namespace clindiag {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 mix(seed);
  std::uint64_t derived = mix.next();
  for (std::uint64_t s = 0; s < stream; ++s) derived = mix.next();
  std::seed_seq seq{static_cast<std::uint32_t>(derived), static_cast<std::uint32_t>(derived >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void CohortSpec::validate() const {
  if (n_per_class < 1) throw Error(ErrorCode::InvalidArgument, "n_per_class must be at least 1");
  if (dims < 1) throw Error(ErrorCode::InvalidArgument, "dims must be at least 1");
  if (!(separation > 0.0) || !std::isfinite(separation))
    throw Error(ErrorCode::InvalidArgument, "separation must be positive");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw Error(ErrorCode::InvalidArgument, "overlap must lie in [0, 1]");
}

LabeledDataset synth_cohort(const CohortSpec& spec) {
  spec.validate();
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto dir_engine = make_engine(spec.seed, streams::kDirection);
  Eigen::VectorXd u(spec.dims);
  do {
    for (Eigen::Index k = 0; k < spec.dims; ++k) u(k) = gauss(dir_engine);
  } while (u.norm() < 1e-12);
  u.normalize();
  const Eigen::VectorXd centre = 0.5 * spec.separation * u;

  // Which rows of each class are drawn from the other cluster.
  const auto n = spec.n_per_class;
  const auto swapped = static_cast<Eigen::Index>(std::llround(spec.overlap * static_cast<double>(n)));
  auto overlap_engine = make_engine(spec.seed, streams::kOverlap);
  std::vector<bool> from_other(static_cast<std::size_t>(2 * n), false);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), cls * n);
    std::shuffle(idx.begin(), idx.end(), overlap_engine);
    for (Eigen::Index k = 0; k < swapped; ++k) from_other[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = true;
  }

  auto sample_engine = make_engine(spec.seed, streams::kSamples);
  LabeledDataset out;
  out.vectors.resize(2 * n, spec.dims);
  out.labels.resize(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const bool patient = i < n;
    const bool positive_cluster = patient != from_other[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < spec.dims; ++k)
      out.vectors(i, k) = (positive_cluster ? centre(k) : -centre(k)) + gauss(sample_engine);
    out.labels(i) = patient ? 1.0 : -1.0;
  }
  return out;
}

std::string synth_csv(const CohortSpec& spec) {
  const LabeledDataset data = synth_cohort(spec);
  std::string text;
  for (Eigen::Index k = 0; k < spec.dims; ++k) text += "f" + std::to_string(k + 1) + ",";
  text += std::string(kSynthLabelColumn) + "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index k = 0; k < spec.dims; ++k) text += format_exact(data.vectors(i, k)) + ",";
    text += (data.labels(i) > 0 ? kSynthPositive : kSynthNegative);
    text += "\n";
  }
  return text;
}

EncodingSchema synth_schema(Eigen::Index dims) {
  EncodingSchema schema;
  for (Eigen::Index k = 0; k < dims; ++k) schema.features.push_back(FeatureSpec::numeric("f" + std::to_string(k + 1)));
  schema.label_rule = {kSynthLabelColumn, kSynthPositive, kSynthNegative};
  return schema;
}

HoldoutSplit holdout_split(Eigen::Index n, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 0.9)) throw Error(ErrorCode::InvalidArgument, "holdout fraction must lie in [0, 0.9]");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto engine = make_engine(seed, streams::kHoldout);
  std::shuffle(idx.begin(), idx.end(), engine);
  const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  HoldoutSplit split;
  split.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace clindiag
