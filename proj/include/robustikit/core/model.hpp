#pragma once

#include "robustikit/core/expr.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace robustikit
{

// Finite domain: an integer interval or an ordered list of enum constants.
struct Domain
{
    enum class Kind : std::uint8_t
    {
        Int,
        Enum
    };

    Kind kind = Kind::Int;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::vector<std::string> members;

    static Domain interval( std::int64_t lo, std::int64_t hi ) { return { Kind::Int, lo, hi, {} }; }
    static Domain enumeration( std::vector<std::string> ms ) { return { Kind::Enum, 0, 0, std::move( ms ) }; }

    [[nodiscard]] bool is_int() const { return kind == Kind::Int; }

    [[nodiscard]] std::uint64_t size() const
    {
        if ( kind == Kind::Enum )
            return members.size();
        return hi < lo ? 0 : static_cast<std::uint64_t>( hi - lo ) + 1;
    }

    friend bool operator==( const Domain&, const Domain& ) = default;
};

struct VarDecl
{
    std::string name;
    Domain domain;
    SourcePos pos;

    friend bool operator==( const VarDecl& a, const VarDecl& b )
    {
        return a.name == b.name && a.domain == b.domain;
    }
};

struct ParamDecl
{
    std::string name;
    Domain domain;
    bool allows_bottom = false; // only in synthesized controller events
    SourcePos pos;

    friend bool operator==( const ParamDecl& a, const ParamDecl& b )
    {
        return a.name == b.name && a.domain == b.domain && a.allows_bottom == b.allows_bottom;
    }
};

struct ConstDecl
{
    std::string name;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    SourcePos pos;

    friend bool operator==( const ConstDecl& a, const ConstDecl& b )
    {
        return a.name == b.name && a.lo == b.lo && a.hi == b.hi;
    }
};

enum class EventKind : std::uint8_t
{
    Plant,
    Controller
};

struct EventDef
{
    EventKind kind = EventKind::Controller;
    std::string name;
    std::vector<ParamDecl> params;
    Expr guard = ex::tru();
    Expr action = ex::tru();
    // Names of the original controller events a synthesized event was built
    // from, in index order. Empty for hand-written events.
    std::vector<std::string> sources;
    SourcePos pos;

    friend bool operator==( const EventDef& a, const EventDef& b )
    {
        return a.kind == b.kind && a.name == b.name && a.params == b.params && a.sources == b.sources
               && structurally_equal( a.guard, b.guard ) && structurally_equal( a.action, b.action );
    }
};

enum class Derivation : std::uint8_t
{
    None,
    Inject,
    Preserving,
    Repurposing
};

inline const char* derivation_name( Derivation d )
{
    switch ( d )
    {
    case Derivation::Inject:
        return "inject";
    case Derivation::Preserving:
        return "preserving";
    case Derivation::Repurposing:
        return "repurposing";
    default:
        return "none";
    }
}

struct Provenance
{
    Derivation method = Derivation::None;
    std::string source_machine;
    std::string uncertainty;

    friend bool operator==( const Provenance&, const Provenance& ) = default;
};

struct Machine
{
    std::string name;
    Provenance provenance;
    std::vector<VarDecl> vars;
    std::vector<ConstDecl> consts;
    Expr init = ex::tru();
    Expr safety = ex::tru();
    // Uncertainty invariant of paired machines; absent for plain models.
    std::optional<Expr> uncertainty;
    std::vector<EventDef> events;
    SourcePos pos;

    [[nodiscard]] bool is_paired() const { return uncertainty.has_value(); }

    [[nodiscard]] const VarDecl* find_var( const std::string& n ) const
    {
        auto it = std::find_if( vars.begin(), vars.end(), [ & ]( const VarDecl& v ) { return v.name == n; } );
        return it == vars.end() ? nullptr : &*it;
    }

    [[nodiscard]] const EventDef* find_event( const std::string& n ) const
    {
        auto it = std::find_if( events.begin(), events.end(), [ & ]( const EventDef& e ) { return e.name == n; } );
        return it == events.end() ? nullptr : &*it;
    }

    [[nodiscard]] std::vector<const EventDef*> controller_events() const
    {
        std::vector<const EventDef*> out;
        for ( const auto& e : events )
            if ( e.kind == EventKind::Controller )
                out.push_back( &e );
        return out;
    }

    [[nodiscard]] std::vector<const EventDef*> plant_events() const
    {
        std::vector<const EventDef*> out;
        for ( const auto& e : events )
            if ( e.kind == EventKind::Plant )
                out.push_back( &e );
        return out;
    }

    friend bool operator==( const Machine& a, const Machine& b )
    {
        if ( a.uncertainty.has_value() != b.uncertainty.has_value() )
            return false;
        if ( a.uncertainty && !structurally_equal( *a.uncertainty, *b.uncertainty ) )
            return false;
        return a.name == b.name && a.provenance == b.provenance && a.vars == b.vars && a.consts == b.consts
               && structurally_equal( a.init, b.init ) && structurally_equal( a.safety, b.safety )
               && a.events == b.events;
    }
};

// Radius of an interval clause: a literal or a symbolic constant.
struct Radius
{
    std::int64_t literal = 0;
    std::string symbol; // non-empty when symbolic

    [[nodiscard]] bool is_symbolic() const { return !symbol.empty(); }
    [[nodiscard]] Expr to_expr() const { return is_symbolic() ? ex::ref( symbol ) : ex::lit( literal ); }

    friend bool operator==( const Radius&, const Radius& ) = default;
};

struct UncertaintyClause
{
    enum class Kind : std::uint8_t
    {
        Exact,
        Within,
        Any // unconstrained by an interval; only the relation restricts it
    };

    std::string var;
    Kind kind = Kind::Exact;
    Radius radius;
    SourcePos pos;

    friend bool operator==( const UncertaintyClause& a, const UncertaintyClause& b )
    {
        return a.var == b.var && a.kind == b.kind && a.radius == b.radius;
    }
};

// The uncertainty specification: perceived state ^s maps to the set of true
// states s with every clause satisfied and, if present, relation(^s, s).
// The relation refers to true variables by their plain names and perceived
// ones with a hat prefix.
struct UncertaintySpec
{
    std::string name;
    std::string machine;
    std::vector<ConstDecl> consts;
    std::vector<UncertaintyClause> clauses;
    std::optional<Expr> relation;
    SourcePos pos;

    [[nodiscard]] const UncertaintyClause* clause_for( const std::string& v ) const
    {
        auto it = std::find_if( clauses.begin(), clauses.end(),
                                [ & ]( const UncertaintyClause& c ) { return c.var == v; } );
        return it == clauses.end() ? nullptr : &*it;
    }

    friend bool operator==( const UncertaintySpec& a, const UncertaintySpec& b )
    {
        if ( a.relation.has_value() != b.relation.has_value() )
            return false;
        if ( a.relation && !structurally_equal( *a.relation, *b.relation ) )
            return false;
        return a.name == b.name && a.machine == b.machine && a.consts == b.consts && a.clauses == b.clauses;
    }
};

// Values of symbolic constants for one evaluation point.
using Bindings = std::map<std::string, std::int64_t>;

} // namespace robustikit
