#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqdetect/jpeg/types.hpp"

namespace dqd {

// IJG scaling of the baseline luminance table. Throws std::out_of_range
// outside 1..100.
QMatrix standardQMatrix(int qualityFactor);

enum class QOrigin { Standard, Custom };

struct QPoolEntry {
  std::string id;
  QMatrix matrix;
  QOrigin origin = QOrigin::Custom;
};

class PoolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Named collection of distinct Q-matrices with unique ids.
class QMatrixPool {
 public:
  QMatrixPool() = default;
  explicit QMatrixPool(std::vector<QPoolEntry> entries);  // validates, throws PoolError

  // Adds an entry; returns false (and adds nothing) if the matrix is already present.
  bool add(QPoolEntry entry);

  const std::vector<QPoolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const QPoolEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::string toJson() const;
  static QMatrixPool fromJson(const std::string& text);

 private:
  std::vector<QPoolEntry> entries_;
};

QMatrixPool loadPool(const std::filesystem::path& path);
void savePool(const QMatrixPool& pool, const std::filesystem::path& path);

// Deterministic disjoint partition: `trainCount` entries go to the first pool.
std::pair<QMatrixPool, QMatrixPool> splitPool(const QMatrixPool& pool, std::uint64_t seed,
                                              std::size_t trainCount);

// Each step shifted independently by one of {-2..2}, clamped to [1,255].
QMatrix perturb(const QMatrix& base, class Rng& rng);

// Standard QF 51..100 followed by `perturbedCount` seeded perturbations of
// random standard tables, deduplicated.
QMatrixPool defaultPool(std::uint64_t seed, std::size_t perturbedCount = 50);

// Small pool for desk-scale experiments: `count` matrices, half standard
// tables at evenly spread quality factors in [qfLow, qfHigh] and half
// perturbations of the standard tables in between.
QMatrixPool deskPool(std::uint64_t seed, std::size_t count, int qfLow = 50, int qfHigh = 90);

// Pool of uniform matrices, one per step value.
QMatrixPool uniformPool(const std::vector<int>& steps, const std::string& prefix = "u");

}  // namespace dqd
