#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chunkstore/datastore.hpp"

namespace chunkstore {

/// A datastore entry returned by a search, with its squared L2 distance.
struct Neighbor {
  EntryId id = 0;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// Top-k search over datastore keys. Results are sorted by ascending
/// distance, ties by smaller entry id. Searches may run concurrently;
/// refresh() needs exclusive access.
class Index {
 public:
  virtual ~Index() = default;

  /// Throws DimensionMismatch, EmptyIndex, InvalidArgument (k == 0).
  virtual std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const = 0;
  /// Makes entries appended to the datastore since the last refresh searchable.
  virtual void refresh() = 0;
  virtual std::uint64_t size() const noexcept = 0;
  virtual const Datastore& datastore() const noexcept = 0;
};

/// Exact scan over every key. Holds a reference to the datastore, which
/// must outlive the index.
class FlatIndex final : public Index {
 public:
  explicit FlatIndex(const Datastore& ds);

  std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const override;
  void refresh() override;
  std::uint64_t size() const noexcept override { return count_; }
  const Datastore& datastore() const noexcept override { return *ds_; }

 private:
  const Datastore* ds_;
  std::uint64_t count_;
};

struct IvfOptions {
  /// 0 selects ceil(sqrt(entry_count)).
  std::uint32_t n_clusters = 0;
  /// 0 selects max(1, n_clusters / 10).
  std::uint32_t nprobe = 0;
  std::uint64_t seed = 1;
  std::uint32_t kmeans_iters = 20;
  /// k-means trains on at most this many keys per centroid (evenly spaced).
  std::uint32_t max_points_per_centroid = 256;
};

/// Inverted-file index: k-means coarse quantizer over the keys, exact scan
/// inside the `nprobe` clusters closest to the query.
class IvfIndex final : public Index {
 public:
  /// Throws TooFewEntries when the datastore has fewer entries than clusters.
  static IvfIndex build(const Datastore& ds, const IvfOptions& options = {});

  std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const override;
  void refresh() override;
  std::uint64_t size() const noexcept override { return count_; }
  const Datastore& datastore() const noexcept override { return *ds_; }

  std::uint32_t n_clusters() const noexcept { return n_clusters_; }
  std::uint32_t nprobe() const noexcept { return nprobe_; }
  void set_nprobe(std::uint32_t nprobe);

  const std::vector<float>& centroids() const noexcept { return centroids_; }
  const std::vector<std::vector<EntryId>>& lists() const noexcept { return lists_; }

  /// Trailing `CKIV` section of a datastore file.
  void write_section(std::ostream& out) const;
  /// Reads the section body (after the magic) for `ds`.
  static IvfIndex read_section(std::istream& in, const Datastore& ds);

 private:
  IvfIndex(const Datastore& ds) : ds_(&ds) {}
  std::uint32_t nearest_centroid(const float* key) const;

  const Datastore* ds_;
  std::uint64_t count_ = 0;
  std::uint32_t n_clusters_ = 0;
  std::uint32_t nprobe_ = 1;
  std::vector<float> centroids_;  // n_clusters x d_key
  std::vector<std::vector<EntryId>> lists_;
};

/// Lloyd's k-means with k-means++ seeding over `count` row-major points.
/// Empty clusters are re-seeded from the point farthest from its centroid.
std::vector<float> kmeans(std::span<const float> points, std::size_t dim, std::size_t n_clusters,
                          std::uint64_t seed, std::uint32_t iters);

/// Writes the datastore followed by an optional IVF section.
void save_store(const std::string& path, const Datastore& ds, const IvfIndex* ivf = nullptr);

/// Reads the IVF section trailing a datastore file, if any. `ds` must be the
/// datastore loaded from the same file and must outlive the index.
std::optional<IvfIndex> load_ivf(const std::string& path, const Datastore& ds);

}  // namespace chunkstore
