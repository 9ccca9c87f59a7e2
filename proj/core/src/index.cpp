#include "chunkstore/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "chunkstore/distance.hpp"
#include "chunkstore/error.hpp"

namespace chunkstore {

namespace {

constexpr char kIvfMagic[] = "CKIV";

struct Candidate {
  float distance;
  EntryId id;
};

// Max-heap on (distance, id): the top is the current worst kept candidate.
struct WorseFirst {
  bool operator()(const Candidate& a, const Candidate& b) const {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  }
};

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(float distance, EntryId id) {
    if (heap_.size() < k_) {
      heap_.push({distance, id});
    } else if (distance < heap_.top().distance ||
               (distance == heap_.top().distance && id < heap_.top().id)) {
      heap_.pop();
      heap_.push({distance, id});
    }
  }

  std::vector<Neighbor> take() {
    std::vector<Neighbor> out(heap_.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = {heap_.top().id, static_cast<double>(heap_.top().distance)};
      heap_.pop();
    }
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<Candidate, std::vector<Candidate>, WorseFirst> heap_;
};

void check_query(const Datastore& ds, std::uint64_t count, std::span<const float> query,
                 std::size_t k) {
  if (query.size() != ds.d_key()) {
    throw Error(Errc::kDimensionMismatch, "query has dimension " + std::to_string(query.size()) +
                                              ", keys have " + std::to_string(ds.d_key()));
  }
  if (count == 0) throw Error(Errc::kEmptyIndex, "index holds no entries");
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be >= 1");
}

std::uint32_t nearest_of(const float* point, const std::vector<float>& centroids,
                         std::size_t dim) {
  const std::size_t n = centroids.size() / dim;
  std::uint32_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < n; ++c) {
    const float d = sq_l2_f32(point, centroids.data() + c * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

}  // namespace

FlatIndex::FlatIndex(const Datastore& ds) : ds_(&ds), count_(ds.entry_count()) {}

std::vector<Neighbor> FlatIndex::search(std::span<const float> query, std::size_t k) const {
  check_query(*ds_, count_, query, k);
  const std::size_t dim = ds_->d_key();
  const float* keys = ds_->keys().data();
  TopK top(k);
  for (EntryId id = 0; id < count_; ++id) {
    top.offer(sq_l2_f32(query.data(), keys + id * dim, dim), id);
  }
  return top.take();
}

void FlatIndex::refresh() { count_ = ds_->entry_count(); }

std::vector<float> kmeans(std::span<const float> points, std::size_t dim, std::size_t n_clusters,
                          std::uint64_t seed, std::uint32_t iters) {
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
  if (n_clusters == 0 || n < n_clusters) {
    throw Error(Errc::kTooFewEntries, std::to_string(n) + " points for " +
                                          std::to_string(n_clusters) + " clusters");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const float* data = points.data();

  // k-means++ seeding.
  std::vector<float> centroids;
  centroids.reserve(n_clusters * dim);
  const std::size_t first = static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  centroids.insert(centroids.end(), data + first * dim, data + (first + 1) * dim);
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) {
    closest[i] = sq_l2_f32(data + i * dim, centroids.data(), dim);
  }
  for (std::size_t c = 1; c < n_clusters; ++c) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= closest[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = c % n;
    }
    centroids.insert(centroids.end(), data + pick * dim, data + (pick + 1) * dim);
    const float* added = centroids.data() + c * dim;
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min<double>(closest[i], sq_l2_f32(data + i * dim, added, dim));
    }
  }

  std::vector<std::uint32_t> assign(n);
  std::vector<double> sums(n_clusters * dim);
  std::vector<std::size_t> sizes(n_clusters);
  for (std::uint32_t it = 0; it < iters; ++it) {
    bool changed = it == 0;
    std::vector<float> own_dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t c = nearest_of(data + i * dim, centroids, dim);
      changed = changed || c != assign[i];
      assign[i] = c;
      own_dist[i] = sq_l2_f32(data + i * dim, centroids.data() + c * dim, dim);
    }
    if (!changed) break;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assign[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[assign[i] * dim + j] += data[i * dim + j];
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (sizes[c] == 0) {
        // Re-seed from the point currently farthest from its centroid.
        const auto far = static_cast<std::size_t>(
            std::max_element(own_dist.begin(), own_dist.end()) - own_dist.begin());
        std::copy(data + far * dim, data + (far + 1) * dim, centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
        own_dist[far] = 0.0f;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        centroids[c * dim + j] = static_cast<float>(sums[c * dim + j] / static_cast<double>(sizes[c]));
      }
    }
  }
  return centroids;
}

IvfIndex IvfIndex::build(const Datastore& ds, const IvfOptions& options) {
  const std::uint64_t n = ds.entry_count();
  std::uint32_t n_clusters = options.n_clusters;
  if (n_clusters == 0) {
    n_clusters = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  }
  if (n == 0 || n < n_clusters) {
    throw Error(Errc::kTooFewEntries,
                std::to_string(n) + " entries for " + std::to_string(n_clusters) + " clusters");
  }
  const std::size_t dim = ds.d_key();

  // Evenly spaced training subset, capped per centroid.
  const std::uint64_t cap = static_cast<std::uint64_t>(n_clusters) *
                            std::max<std::uint32_t>(options.max_points_per_centroid, 1);
  const std::uint64_t n_train = std::min(n, cap);
  std::vector<float> train;
  std::span<const float> train_view(ds.keys().data(), n * dim);
  if (n_train < n) {
    train.resize(n_train * dim);
    for (std::uint64_t j = 0; j < n_train; ++j) {
      const auto src = ds.key(j * n / n_train);
      std::copy(src.begin(), src.end(), train.begin() + static_cast<std::ptrdiff_t>(j * dim));
    }
    train_view = train;
  }

  IvfIndex index(ds);
  index.n_clusters_ = n_clusters;
  index.centroids_ = kmeans(train_view, dim, n_clusters, options.seed, options.kmeans_iters);
  index.lists_.assign(n_clusters, {});
  index.set_nprobe(options.nprobe == 0 ? std::max<std::uint32_t>(1, n_clusters / 10)
                                       : options.nprobe);
  index.refresh();
  return index;
}

std::uint32_t IvfIndex::nearest_centroid(const float* key) const {
  return nearest_of(key, centroids_, ds_->d_key());
}

void IvfIndex::set_nprobe(std::uint32_t nprobe) {
  nprobe_ = std::clamp<std::uint32_t>(nprobe, 1, std::max<std::uint32_t>(n_clusters_, 1));
}

void IvfIndex::refresh() {
  const std::uint64_t n = ds_->entry_count();
  for (EntryId id = count_; id < n; ++id) {
    lists_[nearest_centroid(ds_->key(id).data())].push_back(id);
  }
  count_ = n;
}

std::vector<Neighbor> IvfIndex::search(std::span<const float> query, std::size_t k) const {
  check_query(*ds_, count_, query, k);
  const std::size_t dim = ds_->d_key();
  std::vector<std::pair<float, std::uint32_t>> order(n_clusters_);
  for (std::uint32_t c = 0; c < n_clusters_; ++c) {
    order[c] = {sq_l2_f32(query.data(), centroids_.data() + c * dim, dim), c};
  }
  const std::size_t probe = std::min<std::size_t>(nprobe_, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(probe), order.end());

  const float* keys = ds_->keys().data();
  TopK top(k);
  for (std::size_t p = 0; p < probe; ++p) {
    for (EntryId id : lists_[order[p].second]) {
      top.offer(sq_l2_f32(query.data(), keys + id * dim, dim), id);
    }
  }
  return top.take();
}

void IvfIndex::write_section(std::ostream& out) const {
  detail::BinaryWriter w(out);
  w.magic({kIvfMagic, 4});
  w.put<std::uint32_t>(n_clusters_);
  w.put<std::uint32_t>(nprobe_);
  w.put<std::uint32_t>(ds_->d_key());
  w.put<std::uint64_t>(count_);
  w.put_span<float>(centroids_);
  for (const auto& list : lists_) {
    w.put<std::uint64_t>(list.size());
    w.put_span<EntryId>(list);
  }
  w.check("ivf section");
}

IvfIndex IvfIndex::read_section(std::istream& in, const Datastore& ds) {
  detail::BinaryReader r(in, "ivf section");
  IvfIndex index(ds);
  index.n_clusters_ = r.get<std::uint32_t>();
  const auto nprobe = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint32_t>();
  index.count_ = r.get<std::uint64_t>();
  if (dim != ds.d_key() || index.count_ > ds.entry_count()) {
    throw Error(Errc::kDimensionMismatch, "IVF section does not match the datastore");
  }
  index.centroids_ = r.get_vector<float>(static_cast<std::uint64_t>(index.n_clusters_) * dim);
  index.lists_.resize(index.n_clusters_);
  std::uint64_t listed = 0;
  for (auto& list : index.lists_) {
    list = r.get_vector<EntryId>(r.get<std::uint64_t>());
    listed += list.size();
    for (EntryId id : list) {
      if (id >= index.count_) throw Error(Errc::kInvalidArgument, "IVF list id out of range");
    }
  }
  if (listed != index.count_) throw Error(Errc::kInvalidArgument, "IVF lists do not cover entries");
  index.set_nprobe(nprobe);
  // Entries appended after the section was written become searchable here.
  index.refresh();
  return index;
}

void save_store(const std::string& path, const Datastore& ds, const IvfIndex* ivf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  ds.write(out);
  if (ivf) ivf->write_section(out);
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

std::optional<IvfIndex> load_ivf(const std::string& path, const Datastore& ds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path);
  const Datastore on_disk = Datastore::read(in);
  if (on_disk.entry_count() != ds.entry_count() || on_disk.d_key() != ds.d_key()) {
    throw Error(Errc::kInvalidArgument, "datastore does not match " + path);
  }
  detail::BinaryReader r(in, "ivf section");
  if (!r.try_magic({kIvfMagic, 4})) return std::nullopt;
  return IvfIndex::read_section(in, ds);
}

}  // namespace chunkstore
