#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparsear {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public IoError {
 public:
  explicit MissingFileError(std::string path)
      : IoError("missing file: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  DimensionMismatchError(std::int64_t frame_index, const std::string& what)
      : Error("frame " + std::to_string(frame_index) + ": dimension mismatch: " + what),
        frame_index_(frame_index) {}
  std::int64_t frame_index() const noexcept { return frame_index_; }

 private:
  std::int64_t frame_index_;
};

class TimestampOrderError : public Error {
 public:
  TimestampOrderError(std::int64_t frame_index, const std::string& what)
      : Error("frame " + std::to_string(frame_index) + ": " + what), frame_index_(frame_index) {}
  std::int64_t frame_index() const noexcept { return frame_index_; }

 private:
  std::int64_t frame_index_;
};

class UnknownDepthSourceError : public Error {
 public:
  explicit UnknownDepthSourceError(std::string name)
      : Error("unknown depth source '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class PlyFormatError : public Error {
 public:
  using Error::Error;
};

/// Overlap cropping left one of the clouds empty.
class NoOverlapError : public Error {
 public:
  using Error::Error;
};

class DegenerateRegistrationError : public Error {
 public:
  DegenerateRegistrationError(int iteration, std::size_t correspondences)
      : Error("degenerate registration at iteration " + std::to_string(iteration) + " (" +
              std::to_string(correspondences) + " correspondences)"),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace sparsear
