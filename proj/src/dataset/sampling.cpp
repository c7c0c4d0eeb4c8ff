#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "rfs/dataset.hpp"
#include "rfs/error.hpp"
#include "rfs/random.hpp"

namespace rfs::data {

namespace {

using Cells = std::array<std::vector<std::size_t>, 4>;

Cells split_cells(const Labels& y, const GroupVector& s) {
  if (y.size() != s.size()) throw DataError("labels and groups differ in length");
  Cells cells;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if ((y[i] != 0 && y[i] != 1) || (s[i] != 0 && s[i] != 1)) throw DataError("labels and groups must be binary");
    cells[static_cast<std::size_t>(2 * s[i] + y[i])].push_back(static_cast<std::size_t>(i));
  }
  return cells;
}

}  // namespace

MarginalTable marginals(const Labels& y, const GroupVector& s) {
  if (y.size() == 0) throw DataError("marginals of an empty dataset");
  const Cells cells = split_cells(y, s);
  MarginalTable t;
  const double n = static_cast<double>(y.size());
  for (std::size_t c = 0; c < 4; ++c) t.p[c] = static_cast<double>(cells[c].size()) / n;
  return t;
}

MarginalTable marginals(const Dataset& d) { return marginals(d.y, d.s); }

std::vector<std::size_t> subsample_preserving_indices(const Labels& y, const GroupVector& s,
                                                      std::size_t n_target, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(y.size());
  if (n_target > n) throw DataError("subsample target exceeds dataset size");
  const Cells cells = split_cells(y, s);

  // Largest-remainder apportionment of n_target over the four cells.
  std::array<std::size_t, 4> size{};
  std::array<double, 4> rem{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    const double exact = static_cast<double>(n_target) * static_cast<double>(cells[c].size()) / static_cast<double>(n);
    size[c] = static_cast<std::size_t>(std::floor(exact));
    rem[c] = exact - static_cast<double>(size[c]);
    assigned += size[c];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n_target; ++k) {
    ++size[order[k % 4]];
    ++assigned;
  }
  for (std::size_t c = 0; c < 4; ++c) {
    if (size[c] == 0 && !cells[c].empty() && n_target > 0) {
      spdlog::warn("subsample: cell (s={}, y={}) rounds to 0 rows; keeping 1", c / 2, c % 2);
      auto largest = std::max_element(size.begin(), size.end()) - size.begin();
      --size[static_cast<std::size_t>(largest)];
      size[c] = 1;
    }
  }

  std::vector<std::size_t> out;
  out.reserve(n_target);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<std::size_t> idx = cells[c];
    Rng rng(derive_seed(seed, 0x5ab5, c));
    rng.shuffle(idx);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(size[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dataset subsample_preserving(const Dataset& d, std::size_t n_target, std::uint64_t seed) {
  return d.subset(subsample_preserving_indices(d.y, d.s, n_target, seed));
}

std::vector<std::size_t> drop_subgroup_fraction_indices(const Labels& y, const GroupVector& s,
                                                        double q, std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("drop fraction q must lie in [0, 1]");
  const Cells cells = split_cells(y, s);
  std::vector<std::size_t> victims = cells[2];  // (s = 1, y = 0)
  const auto n_drop = static_cast<std::size_t>(std::floor(q * static_cast<double>(victims.size())));
  Rng rng(derive_seed(seed, 0xd409));
  rng.shuffle(victims);
  std::vector<bool> dropped(static_cast<std::size_t>(y.size()), false);
  for (std::size_t k = 0; k < n_drop; ++k) dropped[victims[k]] = true;

  std::vector<std::size_t> keep;
  keep.reserve(static_cast<std::size_t>(y.size()) - n_drop);
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    if (!dropped[i]) keep.push_back(i);
  }
  return keep;
}

Dataset drop_subgroup_fraction(const Dataset& d, double q, std::uint64_t seed) {
  return d.subset(drop_subgroup_fraction_indices(d.y, d.s, q, seed));
}

std::vector<Fold> kfold_split(const Labels& y, const GroupVector& s, int k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(y.size());
  if (k < 2) throw ConfigError("k-fold split needs k >= 2");
  if (n < static_cast<std::size_t>(k)) throw DataError("k-fold split needs at least k rows");
  const Cells cells = split_cells(y, s);

  // Shuffle within each cell, concatenate the cells and deal positions
  // round-robin: folds differ by at most one row overall and per cell.
  std::vector<std::size_t> sequence;
  sequence.reserve(n);
  for (std::size_t c = 0; c < 4; ++c) {
    if (!cells[c].empty() && cells[c].size() < static_cast<std::size_t>(k)) {
      spdlog::warn("k-fold: cell (s={}, y={}) has {} rows for {} folds", c / 2, c % 2, cells[c].size(), k);
    }
    std::vector<std::size_t> idx = cells[c];
    Rng rng(derive_seed(seed, 0xf01d, c));
    rng.shuffle(idx);
    sequence.insert(sequence.end(), idx.begin(), idx.end());
  }

  std::vector<int> fold_of(n);
  for (std::size_t p = 0; p < n; ++p) fold_of[sequence[p]] = static_cast<int>(p % static_cast<std::size_t>(k));

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < k; ++f) {
      (f == fold_of[i] ? folds[static_cast<std::size_t>(f)].test : folds[static_cast<std::size_t>(f)].train).push_back(i);
    }
  }
  return folds;
}

std::vector<Fold> kfold_split(const Dataset& d, int k, std::uint64_t seed) {
  return kfold_split(d.y, d.s, k, seed);
}

}  // namespace rfs::data
