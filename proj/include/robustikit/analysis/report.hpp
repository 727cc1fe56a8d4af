#pragma once

#include "robustikit/core/semantics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace robustikit
{

enum class Verdict : std::uint8_t
{
    Holds,
    Fails,
    Unknown
};

inline const char* verdict_name( Verdict v )
{
    switch ( v )
    {
    case Verdict::Holds:
        return "holds";
    case Verdict::Fails:
        return "fails";
    default:
        return "unknown";
    }
}

// A value as it appears in reports: integers stay integers, enum constants
// and bot become their names.
using Scalar = std::variant<std::int64_t, std::string>;
using Assignment = std::vector<std::pair<std::string, Scalar>>;

inline Scalar to_scalar( const Model& m, const Value& v )
{
    if ( v.is_int() )
        return v.v;
    return m.format_value( v );
}

inline std::string scalar_text( const Scalar& s )
{
    return std::holds_alternative<std::int64_t>( s ) ? std::to_string( std::get<std::int64_t>( s ) )
                                                     : std::get<std::string>( s );
}

inline Assignment state_assignment( const Model& m, const Valuation& s )
{
    Assignment out;
    for ( std::size_t i = 0; i < s.size(); ++i )
        out.emplace_back( m.machine().vars[ i ].name, to_scalar( m, s[ i ] ) );
    return out;
}

inline Assignment param_assignment( const Model& m, const CompiledEvent& e, const Valuation& p )
{
    Assignment out;
    for ( std::size_t i = 0; i < p.size(); ++i )
        out.emplace_back( e.def->params[ i ].name, to_scalar( m, p[ i ] ) );
    return out;
}

inline std::string assignment_text( const Assignment& a )
{
    std::string out = "(";
    for ( std::size_t i = 0; i < a.size(); ++i )
        out += ( i ? ", " : "" ) + a[ i ].first + "=" + scalar_text( a[ i ].second );
    return out + ")";
}

inline std::string index_set_text( const std::vector<int>& u )
{
    std::string out = "{";
    for ( std::size_t i = 0; i < u.size(); ++i )
        out += ( i ? "," : "" ) + std::to_string( u[ i ] );
    return out + "}";
}

// One counterexample or example. The raw valuations are kept next to the
// named form so that a witness can be re-checked against the model.
struct Witness
{
    std::string kind;
    std::string event;        // empty when not about one event
    std::vector<int> indices; // offending controller index set or compartment, 1-based
    std::vector<std::pair<std::string, Assignment>> valuations;

    Valuation state;
    Valuation params;
    Valuation successor;
    int event_position = -1; // position in Machine::events

    [[nodiscard]] std::string text() const
    {
        std::string out = kind;
        if ( !event.empty() )
            out += " event=" + event;
        if ( !indices.empty() )
            out += " indices=" + index_set_text( indices );
        for ( const auto& [ role, a ] : valuations )
            out += " " + role + "=" + assignment_text( a );
        return out;
    }
};

struct CheckStats
{
    std::uint64_t states_checked = 0;
    std::uint64_t violations = 0;
};

struct CheckReport
{
    std::string kind;
    std::string model;
    Verdict verdict = Verdict::Holds;
    std::string reason; // for unknown verdicts
    std::vector<Witness> witnesses;
    CheckStats stats;
    double seconds = 0; // wall time; excluded from deterministic output

    [[nodiscard]] bool holds() const { return verdict == Verdict::Holds; }
    [[nodiscard]] bool fails() const { return verdict == Verdict::Fails; }
};

struct CheckOptions
{
    unsigned jobs = 1;
    // Witnesses kept per report, lexicographically first; 0 keeps all.
    std::size_t max_witnesses = 1;
    // Restrict safpar to the true states that enable the event.
    bool safpar_prose = false;
};

// Splits a witness valuation of a paired machine into true and perceived parts.
inline std::vector<std::pair<std::string, Assignment>> split_state( const std::string& role, const Assignment& a )
{
    Assignment plain;
    Assignment hat;
    for ( const auto& kv : a )
        ( is_hat_name( kv.first ) ? hat : plain ).push_back( kv );
    std::vector<std::pair<std::string, Assignment>> out;
    out.emplace_back( role, plain );
    if ( !hat.empty() )
        out.emplace_back( role == "state" ? "perceived" : "perceived_" + role, hat );
    return out;
}

} // namespace robustikit
