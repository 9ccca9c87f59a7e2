#include "chunkstore/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chunkstore/error.hpp"

namespace chunkstore {

ScheduleConfig ScheduleConfig::fixed(std::uint32_t i) {
  ScheduleConfig c;
  c.mode = ScheduleMode::kFixed;
  c.interval = i;
  return c;
}

ScheduleConfig ScheduleConfig::geometric(std::uint32_t i_min, std::uint32_t i_max) {
  ScheduleConfig c;
  c.mode = ScheduleMode::kGeometric;
  c.i_min = i_min;
  c.i_max = i_max;
  return c;
}

void ScheduleConfig::validate() const {
  if (mode == ScheduleMode::kFixed && interval < 1) {
    throw Error(Errc::kInvalidArgument, "fixed schedule interval must be >= 1");
  }
  if (mode == ScheduleMode::kGeometric && (i_min < 1 || i_min > i_max)) {
    throw Error(Errc::kInvalidArgument, "geometric schedule needs 1 <= i_min <= i_max");
  }
}

std::string ScheduleConfig::describe() const {
  std::ostringstream out;
  if (mode == ScheduleMode::kFixed) {
    out << "fixed(" << interval << ")";
  } else {
    out << "geometric(" << i_min << "," << i_max << ")";
  }
  if (vary_chunk) out << "+vary_chunk";
  return out.str();
}

std::optional<ScheduleConfig> parse_schedule(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ':')) parts.push_back(part);
  auto number = [](const std::string& s) -> std::optional<std::uint32_t> {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return static_cast<std::uint32_t>(std::stoul(s));
  };
  if (parts.size() == 2 && parts[0] == "fixed") {
    if (auto i = number(parts[1])) return ScheduleConfig::fixed(*i);
  }
  if (parts.size() == 3 && parts[0] == "geometric") {
    auto lo = number(parts[1]);
    auto hi = number(parts[2]);
    if (lo && hi) return ScheduleConfig::geometric(*lo, *hi);
  }
  return std::nullopt;
}

std::uint32_t next_interval(std::uint64_t t_k, std::uint32_t i_min, std::uint32_t i_max,
                            std::size_t src_len) {
  const double rate = 0.5 * static_cast<double>(i_max) / static_cast<double>(std::max<std::size_t>(src_len, 1));
  const double grown = static_cast<double>(i_min) * std::exp2(rate * static_cast<double>(t_k));
  const double capped = std::min(static_cast<double>(i_max), grown);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::floor(capped)));
}

std::uint32_t interval_after(const ScheduleConfig& config, std::uint64_t t_k,
                             std::size_t src_len) {
  if (config.mode == ScheduleMode::kFixed) return std::max<std::uint32_t>(1, config.interval);
  return next_interval(t_k, config.i_min, config.i_max, src_len);
}

std::vector<std::uint64_t> schedule_steps(const ScheduleConfig& config, std::size_t src_len,
                                          std::uint64_t horizon) {
  std::vector<std::uint64_t> steps;
  for (std::uint64_t t = 1; t <= horizon; t += interval_after(config, t, src_len)) {
    steps.push_back(t);
  }
  return steps;
}

std::uint32_t chunk_size_at(const ScheduleConfig& config, std::uint32_t c_default,
                            std::uint32_t i_k) {
  if (!config.vary_chunk) return c_default;
  if (i_k > c_default) {
    throw Error(Errc::kVaryExceedsStored, "interval " + std::to_string(i_k) +
                                              " exceeds stored chunk size " +
                                              std::to_string(c_default));
  }
  return std::max<std::uint32_t>(1, i_k);
}

ScheduleState::ScheduleState(const ScheduleConfig& config, std::size_t src_len)
    : config_(config), src_len_(src_len) {
  config_.validate();
}

bool ScheduleState::fires(std::uint64_t position) {
  if (position != next_) return false;
  last_ = position;
  interval_ = interval_after(config_, position, src_len_);
  next_ = position + interval_;
  return true;
}

}  // namespace chunkstore
