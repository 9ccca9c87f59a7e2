#pragma once

#include <chunkstore/chunkstore.hpp>

#include <map>
#include <memory>

namespace chunkstore::perf {

// Toy model plus datastore over random pairs, cached by corpus size.
struct Workload {
  std::vector<SentencePair> pairs;
  std::unique_ptr<ToyModel> model;
  std::unique_ptr<Datastore> ds;
};

inline const Workload& workload(std::size_t n_pairs) {
  static std::map<std::size_t, std::unique_ptr<Workload>> cache;
  auto& slot = cache[n_pairs];
  if (!slot) {
    slot = std::make_unique<Workload>();
    slot->pairs = random_pairs(n_pairs, 2000, 10, 30, 17);
    slot->model = std::make_unique<ToyModel>(train_toy(slot->pairs, 2000));
    slot->ds = std::make_unique<Datastore>(build_datastore(*slot->model, slot->pairs));
  }
  return *slot;
}

inline std::vector<float> query_for(const Workload& w, std::size_t i) {
  const auto key = w.ds->key((i * 7919) % w.ds->entry_count());
  std::vector<float> q(key.begin(), key.end());
  for (std::size_t d = 0; d < q.size(); ++d) q[d] += 0.01f * static_cast<float>(d % 3);
  return q;
}

}  // namespace chunkstore::perf
