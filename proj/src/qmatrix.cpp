#include "dqdetect/qmatrix.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/rng.hpp"

namespace dqd {

QMatrix standardQMatrix(int qualityFactor) {
  if (qualityFactor < 1 || qualityFactor > 100) {
    throw std::out_of_range("quality factor must be in 1..100, got " + std::to_string(qualityFactor));
  }
  const int scale = qualityFactor < 50 ? 5000 / qualityFactor : 200 - 2 * qualityFactor;
  std::array<int, kBlockArea> steps{};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    steps[i] = std::clamp((kBaseLuminanceTable[i] * scale + 50) / 100, 1, 255);
  }
  return QMatrix(steps);
}

QMatrixPool::QMatrixPool(std::vector<QPoolEntry> entries) {
  std::set<std::string> ids;
  std::map<std::array<std::uint16_t, kBlockArea>, std::string> seen;
  for (const auto& e : entries) {
    if (!ids.insert(e.id).second) throw PoolError("duplicate pool id '" + e.id + "'");
    auto [it, inserted] = seen.emplace(e.matrix.steps(), e.id);
    if (!inserted) {
      throw PoolError("duplicate matrices in pool: '" + it->second + "' and '" + e.id + "'");
    }
  }
  entries_ = std::move(entries);
}

bool QMatrixPool::add(QPoolEntry entry) {
  for (const auto& e : entries_) {
    if (e.matrix == entry.matrix) return false;
    if (e.id == entry.id) throw PoolError("duplicate pool id '" + entry.id + "'");
  }
  entries_.push_back(std::move(entry));
  return true;
}

std::string QMatrixPool::toJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries_) {
    arr.push_back({{"id", e.id},
                   {"origin", e.origin == QOrigin::Standard ? "standard" : "custom"},
                   {"steps", e.matrix.toVector()}});
  }
  return arr.dump(1);
}

QMatrixPool QMatrixPool::fromJson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw PoolError(std::string("pool parse error: ") + e.what());
  }
  if (!doc.is_array()) throw PoolError("pool file must be a JSON array");
  std::vector<QPoolEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "pool entry " + std::to_string(i);
    if (!item.is_object() || !item.contains("id") || !item.contains("steps")) {
      throw PoolError(where + ": expected object with 'id' and 'steps'");
    }
    QPoolEntry e;
    if (item["id"].is_string()) {
      e.id = item["id"].get<std::string>();
    } else if (item["id"].is_number_integer()) {
      e.id = std::to_string(item["id"].get<long long>());
    } else {
      throw PoolError(where + ": id must be a string or integer");
    }
    const auto& steps = item["steps"];
    if (!steps.is_array() || steps.size() != kBlockArea) {
      throw PoolError(where + " ('" + e.id + "'): steps must be an array of 64 integers");
    }
    std::vector<int> values;
    for (const auto& s : steps) {
      if (!s.is_number_integer()) throw PoolError(where + " ('" + e.id + "'): non-integer step");
      values.push_back(s.get<int>());
    }
    try {
      e.matrix = QMatrix(values);
    } catch (const std::invalid_argument& err) {
      throw PoolError(where + " ('" + e.id + "'): " + err.what());
    }
    e.origin = item.value("origin", std::string("custom")) == "standard" ? QOrigin::Standard
                                                                         : QOrigin::Custom;
    entries.push_back(std::move(e));
  }
  return QMatrixPool(std::move(entries));
}

QMatrixPool loadPool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PoolError("cannot open pool file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return QMatrixPool::fromJson(ss.str());
}

void savePool(const QMatrixPool& pool, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PoolError("cannot write pool file " + path.string());
  out << pool.toJson() << '\n';
}

std::pair<QMatrixPool, QMatrixPool> splitPool(const QMatrixPool& pool, std::uint64_t seed,
                                              std::size_t trainCount) {
  if (trainCount >= pool.size()) {
    throw PoolError("train count " + std::to_string(trainCount) + " must be below pool size " +
                    std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(trainCount));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(trainCount), order.end());
  // Keep the original pool order inside each half.
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  std::vector<QPoolEntry> a, b;
  for (auto i : train) a.push_back(pool[i]);
  for (auto i : test) b.push_back(pool[i]);
  return {QMatrixPool(std::move(a)), QMatrixPool(std::move(b))};
}

QMatrix perturb(const QMatrix& base, Rng& rng) {
  std::array<int, kBlockArea> steps{};
  for (int i = 0; i < kBlockArea; ++i) {
    steps[static_cast<std::size_t>(i)] =
        std::clamp(base[i] + static_cast<int>(rng.uniformInt(-2, 2)), 1, 255);
  }
  return QMatrix(steps);
}

QMatrixPool defaultPool(std::uint64_t seed, std::size_t perturbedCount) {
  QMatrixPool pool;
  for (int qf = 51; qf <= 100; ++qf) {
    pool.add({"qf" + std::to_string(qf), standardQMatrix(qf), QOrigin::Standard});
  }
  Rng rng(seed);
  std::size_t made = 0;
  while (made < perturbedCount) {
    const int qf = static_cast<int>(rng.uniformInt(51, 99));
    if (pool.add({"p" + std::to_string(made) + "_qf" + std::to_string(qf),
                  perturb(standardQMatrix(qf), rng), QOrigin::Custom})) {
      ++made;
    }
  }
  return pool;
}

QMatrixPool deskPool(std::uint64_t seed, std::size_t count, int qfLow, int qfHigh) {
  if (count < 2) throw PoolError("desk pool needs at least 2 matrices");
  QMatrixPool pool;
  Rng rng(seed);
  const double span = qfHigh - qfLow;
  // Interleave: standard tables at even slots, perturbed ones between them.
  for (std::size_t i = 0; i < count; ++i) {
    const int qf = qfLow + static_cast<int>(std::lround(span * static_cast<double>(i) /
                                                        static_cast<double>(count - 1)));
    if (i % 2 == 0) {
      if (!pool.add({"qf" + std::to_string(qf), standardQMatrix(qf), QOrigin::Standard})) {
        throw PoolError("desk pool quality factors collide; widen the range");
      }
    } else {
      while (!pool.add({"p" + std::to_string(i) + "_qf" + std::to_string(qf),
                        perturb(standardQMatrix(qf), rng), QOrigin::Custom})) {
      }
    }
  }
  return pool;
}

QMatrixPool uniformPool(const std::vector<int>& steps, const std::string& prefix) {
  QMatrixPool pool;
  for (int s : steps) {
    if (!pool.add({prefix + std::to_string(s), QMatrix::uniform(s), QOrigin::Custom})) {
      throw PoolError("repeated uniform step " + std::to_string(s));
    }
  }
  return pool;
}

}  // namespace dqd
