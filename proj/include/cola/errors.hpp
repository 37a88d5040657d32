#pragma once

#include <stdexcept>
#include <string>

namespace cola {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's domain: wrong dimension,
/// non-positive quantity or price, malformed parameters.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Two baskets share a level under one utility but not under the other.
class NotSameFoliation : public Error
{
public:
    using Error::Error;
};

class NonMonotone : public Error
{
public:
    using Error::Error;
};

/// Evaluation of a tabulated map outside its knot range.
class OutOfRange : public Error
{
public:
    using Error::Error;
};

/// A ray from the origin never reaches the requested utility level.
class LevelSetNotAttained : public Error
{
public:
    using Error::Error;
};

class NonConvergence : public Error
{
public:
    using Error::Error;
};

/// A cost trajectory left the positive half-line or overflowed.
class FlowEscape : public Error
{
public:
    using Error::Error;
};

class TimeMismatch : public Error
{
public:
    using Error::Error;
};

class UnattainableCost : public Error
{
public:
    using Error::Error;
};

/// The price-ratio and adjustment-ratio evaluations of an index disagree.
class CrossRouteMismatch : public Error
{
public:
    using Error::Error;
};

/// Malformed scenario file or command-line input.
class InputError : public Error
{
public:
    using Error::Error;
};

} // namespace cola
