#ifndef GFD_ERRORS_HPP
#define GFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfd {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration problems: bad keys, bad values, missing paths named in a config.
struct ConfigError : Error {
  using Error::Error;
};

// Data problems: unreadable or malformed inputs, shapes that cannot be processed.
struct DataError : Error {
  using Error::Error;
};

// Numeric problems: non-finite values, degenerate systems.
struct NumericError : Error {
  using Error::Error;
};

#define GFD_DEFINE_ERROR(NAME, BASE)                  \
  struct NAME : BASE {                                \
    explicit NAME(const std::string& msg)             \
        : BASE(std::string(#NAME ": ") + msg) {}      \
  }

// signal ingest
GFD_DEFINE_ERROR(MalformedRow, DataError);
GFD_DEFINE_ERROR(EmptyFile, DataError);
GFD_DEFINE_ERROR(NonFiniteSample, NumericError);
GFD_DEFINE_ERROR(InvalidSpec, ConfigError);
GFD_DEFINE_ERROR(NegativeSigma, ConfigError);

// spectral
GFD_DEFINE_ERROR(TooShort, DataError);
GFD_DEFINE_ERROR(NonFinite, NumericError);
GFD_DEFINE_ERROR(SegmentTooShort, DataError);

// segmentation
GFD_DEFINE_ERROR(WindowExceedsSignal, DataError);
GFD_DEFINE_ERROR(EmptySearchSpace, ConfigError);
GFD_DEFINE_ERROR(NoSegments, DataError);
GFD_DEFINE_ERROR(NegativeProbability, NumericError);

// features
GFD_DEFINE_ERROR(EmptyFitSet, DataError);
GFD_DEFINE_ERROR(DimensionMismatch, DataError);

// clustering
GFD_DEFINE_ERROR(TooManyClusters, ConfigError);

// graph
GFD_DEFINE_ERROR(ClusterTooSmall, DataError);
GFD_DEFINE_ERROR(Disconnected, DataError);
GFD_DEFINE_ERROR(SingletonGraph, DataError);
GFD_DEFINE_ERROR(NoEdges, DataError);
GFD_DEFINE_ERROR(NoEligibleSubgraphs, DataError);
GFD_DEFINE_ERROR(UnmappedRow, DataError);

// model
GFD_DEFINE_ERROR(DegenerateLabels, DataError);
GFD_DEFINE_ERROR(SchemaMismatch, DataError);

// eval
GFD_DEFINE_ERROR(ClassTooSmall, DataError);
GFD_DEFINE_ERROR(KTooLarge, ConfigError);
GFD_DEFINE_ERROR(LengthMismatch, DataError);

#undef GFD_DEFINE_ERROR

}  // namespace gfd

#endif
