#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace robustikit
{

struct SourcePos
{
    int line = 0;
    int column = 0;

    friend bool operator==( const SourcePos&, const SourcePos& ) = default;
    friend auto operator<=>( const SourcePos&, const SourcePos& ) = default;
};

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Ill-formed model: unknown names, bad domains, type mismatches, primes where
// they are not allowed. Carries the position of the offending node if known.
class ValidationError : public Error
{
    SourcePos _pos;

public:
    explicit ValidationError( const std::string& what, SourcePos pos = {} )
            : Error( what ), _pos( pos )
    {
    }

    [[nodiscard]] SourcePos pos() const { return _pos; }
};

class EvalError : public Error
{
public:
    using Error::Error;
};

// A configured size limit (state space, parameter space, quantifier range)
// would be exceeded.
class CapExceeded : public Error
{
public:
    using Error::Error;
};

// Raised by the controller-index functions when a state enables zero or
// several controller events.
class PartitioningViolation : public Error
{
public:
    using Error::Error;
};

} // namespace robustikit
