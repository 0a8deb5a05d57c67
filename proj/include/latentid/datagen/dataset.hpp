#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "latentid/ndmath/matrix.hpp"
#include "latentid/ndmath/rng.hpp"

namespace latentid {

/// Observations with segment labels and, for synthetic data, the sources
/// that generated them.
struct LabeledDataset {
  Matrix x;
  std::vector<std::size_t> u;
  std::size_t n_labels = 0;
  std::optional<Matrix> s;

  std::size_t size() const noexcept { return x.rows(); }
  /// Throws InvalidArgument when a label is out of range, a segment is empty
  /// or row counts disagree.
  void validate() const;
};

LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

/// Stratified split: per segment a share of `fraction` goes to `train`
/// (largest-remainder rounding so the total is round(fraction·n)), every
/// segment keeps at least one row on each side. Index lists are sorted.
DatasetSplit split_dataset(const LabeledDataset& ds, double fraction, RngStream& rng);

}  // namespace latentid
