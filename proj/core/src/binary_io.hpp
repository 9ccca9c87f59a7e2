#pragma once

// Little-endian binary stream helpers shared by the model and datastore
// serializers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chunkstore/error.hpp"

namespace chunkstore::detail {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }

  template <typename T>
  void put(T value) {
    raw(&value, sizeof(T));
  }

  template <typename T>
  void put_span(std::span<const T> values) {
    raw(values.data(), values.size_bytes());
  }

  void check(const std::string& what) const {
    if (!out_) throw Error(Errc::kIoError, "write failed: " + what);
  }

 private:
  void raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

  void expect_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (in_.gcount() != static_cast<std::streamsize>(got.size())) {
      throw Error(Errc::kTruncatedFile, context_ + ": missing magic");
    }
    if (got != tag) {
      throw Error(Errc::kBadMagic, context_ + ": expected magic " + std::string(tag));
    }
  }

  /// True if another `tag` section follows; consumes it. False at clean EOF.
  bool try_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    const auto n = in_.gcount();
    if (n == 0) return false;
    if (n != static_cast<std::streamsize>(got.size())) {
      throw Error(Errc::kTruncatedFile, context_ + ": partial trailing section");
    }
    if (got != tag) {
      throw Error(Errc::kBadMagic, context_ + ": unexpected trailing section");
    }
    return true;
  }

  template <typename T>
  T get() {
    T value{};
    raw(&value, sizeof(T));
    return value;
  }

  template <typename T>
  std::vector<T> get_vector(std::uint64_t count) {
    // Refuse absurd sizes before allocating; a truncated or corrupt header
    // would otherwise request gigabytes.
    constexpr std::uint64_t kMaxBytes = std::uint64_t{1} << 40;
    if (count > kMaxBytes / sizeof(T)) {
      throw Error(Errc::kTruncatedFile, context_ + ": implausible array length");
    }
    std::vector<T> values(static_cast<std::size_t>(count));
    raw(values.data(), values.size() * sizeof(T));
    return values;
  }

  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(Errc::kTruncatedFile, context_ + ": unexpected end of file");
    }
  }

  std::istream& in_;
  std::string context_;
};

}  // namespace chunkstore::detail
