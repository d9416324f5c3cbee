#include "awmeta/tail_counts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <boost/sort/spreadsort/integer_sort.hpp>

#include "awmeta/types.hpp"

namespace awmeta {

namespace {

struct KeyIndex {
  std::uint64_t key;
  std::uint32_t index;
};

struct KeyShift {
  std::uint64_t operator()(const KeyIndex& x, unsigned offset) const { return x.key >> offset; }
};

struct KeyLess {
  bool operator()(const KeyIndex& a, const KeyIndex& b) const { return a.key < b.key; }
};

std::vector<KeyIndex> sorted_pairs(std::span<const double> reference) {
  if (reference.size() >= std::numeric_limits<std::uint32_t>::max())
    throw InvalidInput("tail counts: reference set too large");
  std::vector<KeyIndex> pairs(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i)
    pairs[i] = {order_key(reference[i]), static_cast<std::uint32_t>(i)};
  boost::sort::spreadsort::integer_sort(pairs.begin(), pairs.end(), KeyShift{}, KeyLess{});
  return pairs;
}

}  // namespace

std::uint64_t order_key(double x) {
  if (std::isnan(x)) throw InvalidInput("tail counts: NaN statistic");
  const auto bits = std::bit_cast<std::uint64_t>(x + 0.0);
  constexpr std::uint64_t sign = 1ULL << 63;
  return (bits & sign) ? ~bits : (bits | sign);
}

TailCounts upper_tail_counts(std::span<const double> reference, std::span<const double> queries) {
  const auto pairs = sorted_pairs(reference);
  const auto n = static_cast<std::uint32_t>(pairs.size());
  TailCounts out;
  out.pool.resize(n);
  std::vector<std::uint64_t> keys(n);
  std::uint32_t group_start = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    keys[i] = pairs[i].key;
    if (i > 0 && pairs[i].key != pairs[i - 1].key) group_start = i;
    out.pool[pairs[i].index] = n - group_start;
  }
  out.queries.resize(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto it = std::lower_bound(keys.begin(), keys.end(), order_key(queries[q]));
    out.queries[q] = static_cast<std::uint32_t>(keys.end() - it);
  }
  return out;
}

TailCounts lower_tail_counts(std::span<const double> reference, std::span<const double> queries) {
  const auto pairs = sorted_pairs(reference);
  const auto n = static_cast<std::uint32_t>(pairs.size());
  TailCounts out;
  out.pool.resize(n);
  std::vector<std::uint64_t> keys(n);
  std::uint32_t i = n;
  while (i > 0) {
    // Walk tie groups from the top; each member counts up to its group end.
    std::uint32_t end = i;
    std::uint32_t start = i - 1;
    while (start > 0 && pairs[start - 1].key == pairs[end - 1].key) --start;
    for (std::uint32_t j = start; j < end; ++j) {
      keys[j] = pairs[j].key;
      out.pool[pairs[j].index] = end;
    }
    i = start;
  }
  out.queries.resize(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto it = std::upper_bound(keys.begin(), keys.end(), order_key(queries[q]));
    out.queries[q] = static_cast<std::uint32_t>(it - keys.begin());
  }
  return out;
}

SortedReference::SortedReference(std::span<const double> reference) {
  keys_.resize(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) keys_[i] = order_key(reference[i]);
  boost::sort::spreadsort::integer_sort(keys_.begin(), keys_.end());
}

std::uint32_t SortedReference::count_at_least(double x) const {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), order_key(x));
  return static_cast<std::uint32_t>(keys_.end() - it);
}

std::uint32_t SortedReference::count_at_most(double x) const {
  const auto it = std::upper_bound(keys_.begin(), keys_.end(), order_key(x));
  return static_cast<std::uint32_t>(it - keys_.begin());
}

}  // namespace awmeta
