#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chunkstore {

enum class Errc {
  kEmptyNeighborSet,
  kNonPositiveTemperature,
  kLambdaOutOfRange,
  kDimensionMismatch,
  kEmptyCorpus,
  kPrefixMissingBOS,
  kChunkSizeZero,
  kReducedDimExceedsFull,
  kTooFewSamples,
  kEmptyAppend,
  kIoError,
  kBadMagic,
  kVersionMismatch,
  kTruncatedFile,
  kEmptyIndex,
  kTooFewEntries,
  kSentinelDereference,
  kEmptyCache,
  kVaryExceedsStored,
  kSourceTooLong,
  kLengthMismatch,
  kInvalidArgument,
  kInvalidVocab,
};

std::string_view errc_name(Errc code) noexcept;

/// Library error. Every failure surfaced by chunkstore carries one of the
/// Errc codes above; the message adds context for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace chunkstore
