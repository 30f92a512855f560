#pragma once

#include <stdexcept>
#include <string>

namespace newsclust {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input files.
struct LoadError : Error {
  using Error::Error;
};

// Arguments outside an operation's mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

struct LookupError : Error {
  using Error::Error;
};

// A document produced no vector (every token was out of table, or no content
// vectors were available).
struct EmptyEmbedding : Error {
  using Error::Error;
};

struct TrainingError : Error {
  using Error::Error;
};

struct SamplingError : Error {
  using Error::Error;
};

struct ClusteringError : Error {
  using Error::Error;
};

}  // namespace newsclust
