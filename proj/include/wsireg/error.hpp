#pragma once

#include <stdexcept>
#include <string>

namespace wsireg {

// Base class for all errors raised by the library. The CLI maps each
// subtype to a distinct nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by clean_tissue when no tissue contour is found.
class BlankSlideError : public Error {
 public:
  using Error::Error;
};

// Raised by feature detection when the region is below the minimum size.
class RoiTooSmallError : public Error {
 public:
  using Error::Error;
};

// Raised by similarity_index when both masks are empty.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

// Raised by the phantom generator when a spec violates its invariants.
class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsireg
