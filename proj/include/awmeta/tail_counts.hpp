#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace awmeta {

/// Tail counts against a pooled reference set.
///   pool[i]    = #{j : reference[j] OP reference[i]}
///   queries[q] = #{j : reference[j] OP query[q]}
/// with OP being >= (upper tail) or <= (lower tail). Pool counts are always
/// at least 1 because every element meets itself.
struct TailCounts {
  std::vector<std::uint32_t> pool;
  std::vector<std::uint32_t> queries;
};

TailCounts upper_tail_counts(std::span<const double> reference, std::span<const double> queries);
TailCounts lower_tail_counts(std::span<const double> reference, std::span<const double> queries);

/// Sorted reference set answering upper/lower tail count queries by binary search.
class SortedReference {
 public:
  SortedReference() = default;
  explicit SortedReference(std::span<const double> reference);

  std::size_t size() const { return keys_.size(); }
  std::uint32_t count_at_least(double x) const;
  std::uint32_t count_at_most(double x) const;

 private:
  std::vector<std::uint64_t> keys_;
};

/// Order-preserving map from doubles to unsigned keys; -0.0 and +0.0 map
/// to the same key. NaN is rejected with InvalidInput.
std::uint64_t order_key(double x);

}  // namespace awmeta
