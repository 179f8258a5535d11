#pragma once

#include <stdexcept>
#include <string>

namespace qcdist {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible dimension, or a dimension outside [2, 8].
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// A point lies outside the domain box of a metric, map or field.
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Failures of the numerics themselves (non-SPD input, singular matrices,
/// certificates that must hold by construction).
class NumericalError : public Error
{
public:
  using Error::Error;
};

class NotSPDError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

class SingularError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

/// Invalid catalog parameters or violated construction-time validation.
class CatalogError : public Error
{
public:
  using Error::Error;
};

/// Configuration document does not match its schema.
class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace qcdist
