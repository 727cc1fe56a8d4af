#pragma once

#include "robustikit/core/error.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace robustikit
{

// A runtime value. Enum constants are stored as an index into the owning
// model's constant table; bottom is the "no parameter" sentinel used by
// heterogeneous events.
struct Value
{
    enum class Kind : std::uint8_t
    {
        Int,
        Bool,
        Enum,
        Bottom
    };

    Kind kind = Kind::Int;
    std::int64_t v = 0;

    static constexpr Value integer( std::int64_t x ) { return { Kind::Int, x }; }
    static constexpr Value boolean( bool b ) { return { Kind::Bool, b ? 1 : 0 }; }
    static constexpr Value enumeration( std::int64_t id ) { return { Kind::Enum, id }; }
    static constexpr Value bottom() { return { Kind::Bottom, 0 }; }

    [[nodiscard]] bool is_int() const { return kind == Kind::Int; }
    [[nodiscard]] bool is_bool() const { return kind == Kind::Bool; }
    [[nodiscard]] bool is_enum() const { return kind == Kind::Enum; }
    [[nodiscard]] bool is_bottom() const { return kind == Kind::Bottom; }

    [[nodiscard]] std::int64_t as_int() const
    {
        if ( kind != Kind::Int )
            throw EvalError( is_bottom() ? "arithmetic on bot" : "arithmetic on a non-integer value" );
        return v;
    }

    [[nodiscard]] bool as_bool() const
    {
        if ( kind != Kind::Bool )
            throw EvalError( "boolean operator applied to a non-boolean value" );
        return v != 0;
    }

    friend constexpr bool operator==( const Value&, const Value& ) = default;
    friend constexpr auto operator<=>( const Value&, const Value& ) = default;
};

using Valuation = std::vector<Value>;

} // namespace robustikit
