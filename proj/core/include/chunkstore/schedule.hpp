#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chunkstore {

enum class ScheduleMode { kFixed, kGeometric };

/// When the decoder searches the datastore. Positions are 1-based counts of
/// generated target tokens; position 1 always retrieves.
struct ScheduleConfig {
  ScheduleMode mode = ScheduleMode::kGeometric;
  std::uint32_t interval = 6;  // kFixed
  std::uint32_t i_min = 2;     // kGeometric
  std::uint32_t i_max = 16;    // kGeometric
  /// Use only the first i_k positions of each chunk retrieved at step k.
  bool vary_chunk = false;

  static ScheduleConfig fixed(std::uint32_t i);
  static ScheduleConfig geometric(std::uint32_t i_min, std::uint32_t i_max);

  /// Throws InvalidArgument.
  void validate() const;
  /// "fixed(6)" / "geometric(2,16)".
  std::string describe() const;
};

/// Parses "fixed:<i>" or "geometric:<i_min>:<i_max>".
std::optional<ScheduleConfig> parse_schedule(const std::string& text);

/// Interval after a retrieval at position t_k:
/// floor(min(i_max, i_min * 2^(r * t_k))) with r = (i_max / 2) / src_len,
/// clamped to at least 1.
std::uint32_t next_interval(std::uint64_t t_k, std::uint32_t i_min, std::uint32_t i_max,
                            std::size_t src_len);

/// Interval the config yields after a retrieval at `t_k`.
std::uint32_t interval_after(const ScheduleConfig& config, std::uint64_t t_k,
                             std::size_t src_len);

/// All retrieval positions <= horizon.
std::vector<std::uint64_t> schedule_steps(const ScheduleConfig& config, std::size_t src_len,
                                          std::uint64_t horizon);

/// Chunk positions to use after a retrieval whose following interval is
/// `i_k`. Throws VaryExceedsStored when vary_chunk is set and i_k > c_default.
std::uint32_t chunk_size_at(const ScheduleConfig& config, std::uint32_t c_default,
                            std::uint32_t i_k);

/// Incremental schedule walker for one source sentence.
class ScheduleState {
 public:
  ScheduleState(const ScheduleConfig& config, std::size_t src_len);

  /// Must be called with strictly increasing positions starting at 1.
  /// Returns true when `position` is a retrieval step and advances.
  bool fires(std::uint64_t position);

  std::uint64_t last_retrieval() const noexcept { return last_; }
  std::uint64_t next_retrieval() const noexcept { return next_; }
  /// Interval following the most recent retrieval.
  std::uint32_t current_interval() const noexcept { return interval_; }

 private:
  ScheduleConfig config_;
  std::size_t src_len_;
  std::uint64_t last_ = 0;
  std::uint64_t next_ = 1;
  std::uint32_t interval_ = 0;
};

}  // namespace chunkstore
