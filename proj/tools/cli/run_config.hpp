#pragma once

#include <chunkstore/chunkstore.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chunkstore::cli {

/// Invalid run configuration. The message starts with the offending field
/// path, e.g. "decode.k: expected an integer >= 1".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct PathsSection {
  std::string vocab;
  std::string model;
  std::string datastore;
  std::string train_source;
  std::string train_target;
  /// Corpus indexed by build-datastore; the training corpus when empty.
  std::string datastore_source;
  std::string datastore_target;
  std::string test_source;
  std::string test_target;
  /// Hypotheses, one per line. Optional for translate.
  std::string output;
};

struct ModelSection {
  std::uint32_t d_full = 64;
  double alpha = 0.1;
};

struct DatastoreSection {
  std::uint32_t chunk_size = 16;
  std::uint32_t d_key = 32;
  std::uint32_t d_cache = 16;
  std::uint64_t pca_sample = 100000;
  std::string index = "flat";  // flat | ivf
  std::uint32_t n_clusters = 0;
  std::uint32_t nprobe = 0;
  std::uint32_t kmeans_iters = 20;
};

struct DecodeSection {
  std::string strategy = "cache:sentence_level";
  std::uint32_t beam = 5;
  std::uint32_t batch = 8;
  std::uint32_t max_len = 200;
  std::uint32_t max_source_len = 1024;
  std::uint32_t k = 8;
  double lambda = 0.7;
  double temp = 10.0;
  double lambda_cache = 0.5;
  double temp_cache = 1.0;
  ScheduleConfig schedule = ScheduleConfig::geometric(2, 16);
  std::optional<std::uint64_t> cache_capacity;
};

struct OnTheFlySection {
  double warm_fraction = 0.10;
  std::uint64_t update_block = 250;
  std::uint64_t report_block = 4000;
};

struct AblateSection {
  std::vector<std::string> strategies{"cache:sentence_level"};
  std::vector<std::string> schedules{"fixed:6", "fixed:8", "geometric:2:8", "geometric:2:16",
                                     "geometric:2:32"};
  std::vector<std::uint32_t> k{8};
};

struct SyntheticSection {
  std::string domain = "d0";
  std::uint32_t source_words = 400;
  std::uint32_t target_words = 400;
  std::uint32_t phrases = 300;
  double zipf = 1.0;
  std::uint64_t train_count = 2000;
  std::uint64_t test_count = 200;
};

struct RunConfig {
  std::uint64_t seed = 1;
  /// Decode worker threads; 0 uses CHUNKSTORE_THREADS or the core count.
  std::uint64_t threads = 0;
  PathsSection paths;
  ModelSection model;
  DatastoreSection datastore;
  DecodeSection decode;
  OnTheFlySection onthefly;
  AblateSection ablate;
  SyntheticSection synthetic;

  /// Parses a JSON document; unknown keys and wrong types throw ConfigError.
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text() const;

  /// Semantic checks that do not depend on the command.
  void validate() const;

  DecodeConfig decode_config() const;
  DatastoreOptions datastore_options() const;
  IvfOptions ivf_options() const;
  StreamConfig stream_config() const;
};

/// Flag values; unset flags leave the configuration untouched.
struct Overrides {
  std::optional<std::string> strategy;
  std::optional<std::string> schedule;
  std::optional<std::uint32_t> i_min;
  std::optional<std::uint32_t> i_max;
  std::optional<std::uint32_t> chunk_size;
  std::optional<std::uint32_t> k;
  std::optional<double> lambda;
  std::optional<double> temp;
  std::optional<double> lambda_cache;
  std::optional<double> temp_cache;
  std::optional<std::uint32_t> beam;
  std::optional<std::uint32_t> batch;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> index;
  std::optional<std::uint32_t> nprobe;

  void apply(RunConfig& config) const;
};

/// Throws ConfigError naming `field` when `path` is empty or missing on disk.
void require_file(const std::string& field, const std::string& path);
/// Throws ConfigError naming `field` when `path` is empty.
void require_path(const std::string& field, const std::string& path);

Strategy strategy_from(const std::string& field, const std::string& text);
ScheduleConfig schedule_from(const std::string& field, const std::string& text);

}  // namespace chunkstore::cli
