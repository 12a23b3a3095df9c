// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fmdseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problems (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ConfigMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Data problems (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class LabelRangeError : public DataError {
 public:
  LabelRangeError(const std::string& what, std::int64_t slice_index)
      : DataError(what), slice_index_(slice_index) {}
  std::int64_t slice_index() const noexcept { return slice_index_; }

 private:
  std::int64_t slice_index_;
};

class EmptyDatasetError : public DataError {
 public:
  using DataError::DataError;
};

class MissingSliceError : public DataError {
 public:
  using DataError::DataError;
};

class IOError : public DataError {
 public:
  using DataError::DataError;
};

class VersionError : public DataError {
 public:
  using DataError::DataError;
};

class WeightLoadError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss (exit code 3).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step, std::string last_good_checkpoint)
      : Error(what), step_(step), last_good_(std::move(last_good_checkpoint)) {}
  std::int64_t step() const noexcept { return step_; }
  const std::string& last_good_checkpoint() const noexcept { return last_good_; }

 private:
  std::int64_t step_;
  std::string last_good_;
};

/// Process exit code for an exception escaping a CLI subcommand.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace fmdseg
