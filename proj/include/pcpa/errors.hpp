#pragma once

#include <stdexcept>
#include <string>

namespace pcpa {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (case files, JSON records, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structural or numeric precondition violated by an argument.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An attacked area fails the size bound, the matching cover or the rank condition.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// A simulated scenario cannot satisfy the injection rebalance constraints.
class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

/// Blinded measurements cannot be reconstructed (rank loss or inconsistency).
class ReconstructionError : public Error {
 public:
  using Error::Error;
};

/// Prior vector does not match the area or scenario it is applied to.
class PriorMismatch : public Error {
 public:
  using Error::Error;
};

/// Linear solve or LP failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcpa
