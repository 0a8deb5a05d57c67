#include "latentid/datagen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "latentid/error.hpp"

namespace latentid {

void LabeledDataset::validate() const {
  if (x.rows() != u.size()) throw InvalidArgument("dataset: X rows and label count differ");
  if (s && s->rows() != x.rows()) throw InvalidArgument("dataset: S rows and X rows differ");
  if (n_labels == 0) throw InvalidArgument("dataset: no labels");
  std::vector<std::size_t> counts(n_labels, 0);
  for (std::size_t v : u) {
    if (v >= n_labels) throw InvalidArgument("dataset: label " + std::to_string(v) + " out of range");
    ++counts[v];
  }
  for (std::size_t k = 0; k < n_labels; ++k)
    if (counts[k] == 0) throw InvalidArgument("dataset: segment " + std::to_string(k) + " is empty");
}

LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
  LabeledDataset out;
  out.x = select_rows(ds.x, rows);
  out.u.reserve(rows.size());
  for (std::size_t r : rows) out.u.push_back(ds.u.at(r));
  out.n_labels = ds.n_labels;
  if (ds.s) out.s = select_rows(*ds.s, rows);
  return out;
}

DatasetSplit split_dataset(const LabeledDataset& ds, double fraction, RngStream& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split_dataset: fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> members(ds.n_labels);
  for (std::size_t i = 0; i < ds.u.size(); ++i) {
    if (ds.u[i] >= ds.n_labels) throw InvalidArgument("split_dataset: label out of range");
    members[ds.u[i]].push_back(i);
  }
  const std::size_t k = members.size();
  std::vector<std::size_t> take(k);
  std::vector<double> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t n = members[g].size();
    if (n < 2) throw InvalidArgument("split_dataset: segment " + std::to_string(g) + " has fewer than 2 points");
    const double exact = fraction * static_cast<double>(n);
    take[g] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(exact)), 1, n - 1);
    remainder[g] = exact - static_cast<double>(take[g]);
    assigned += take[g];
  }
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.u.size())));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t g : order) {
    if (assigned >= target) break;
    if (take[g] + 1 < members[g].size()) {
      ++take[g];
      ++assigned;
    }
  }

  DatasetSplit split;
  for (std::size_t g = 0; g < k; ++g) {
    auto& m = members[g];
    for (std::size_t i = m.size(); i > 1; --i) std::swap(m[i - 1], m[rng.uniform_int(i)]);
    split.train.insert(split.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take[g]));
    split.eval.insert(split.eval.end(), m.begin() + static_cast<std::ptrdiff_t>(take[g]), m.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.eval.begin(), split.eval.end());
  return split;
}

}  // namespace latentid
