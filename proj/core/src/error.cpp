#include "chunkstore/error.hpp"

namespace chunkstore {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kEmptyNeighborSet: return "EmptyNeighborSet";
    case Errc::kNonPositiveTemperature: return "NonPositiveTemperature";
    case Errc::kLambdaOutOfRange: return "LambdaOutOfRange";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kEmptyCorpus: return "EmptyCorpus";
    case Errc::kPrefixMissingBOS: return "PrefixMissingBOS";
    case Errc::kChunkSizeZero: return "ChunkSizeZero";
    case Errc::kReducedDimExceedsFull: return "ReducedDimExceedsFull";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kEmptyAppend: return "EmptyAppend";
    case Errc::kIoError: return "IoError";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kTruncatedFile: return "TruncatedFile";
    case Errc::kEmptyIndex: return "EmptyIndex";
    case Errc::kTooFewEntries: return "TooFewEntries";
    case Errc::kSentinelDereference: return "SentinelDereference";
    case Errc::kEmptyCache: return "EmptyCache";
    case Errc::kVaryExceedsStored: return "VaryExceedsStored";
    case Errc::kSourceTooLong: return "SourceTooLong";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kInvalidVocab: return "InvalidVocab";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace chunkstore
