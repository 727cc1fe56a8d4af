#pragma once

// A machine compiled against concrete constant bindings: state enumeration,
// guards, successors. Immutable once built; every query takes its own frame,
// so concurrent queries on one Model are fine.

#include "robustikit/core/compile.hpp"
#include "robustikit/core/solver.hpp"

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace robustikit
{

struct CompiledEvent
{
    const EventDef* def = nullptr;
    std::vector<SolveVar> params;
    Predicate guard;
    Predicate action;
};

inline ConstantTable constant_table( const Machine& m )
{
    ConstantTable t;
    for ( const auto& v : m.vars )
        for ( const auto& c : v.domain.members )
            t.add( c );
    for ( const auto& e : m.events )
        for ( const auto& p : e.params )
            for ( const auto& c : p.domain.members )
                t.add( c );
    return t;
}

inline void check_domain( const Domain& d, const std::string& what, SourcePos pos )
{
    if ( d.is_int() && d.lo > d.hi )
        throw ValidationError( "invalid domain for " + what + ": empty interval", pos );
    if ( !d.is_int() && d.members.empty() )
        throw ValidationError( "invalid domain for " + what + ": empty enumeration", pos );
    if ( !d.is_int() )
    {
        std::set<std::string> seen( d.members.begin(), d.members.end() );
        if ( seen.size() != d.members.size() )
            throw ValidationError( "invalid domain for " + what + ": duplicate member", pos );
    }
}

class Model
{
    Machine _m;
    Bindings _bindings;
    Limits _limits;
    ConstantTable _table;
    int _n = 0;
    int _param_base = 0;
    int _binder_base = 0;
    int _frame = 0;
    std::shared_ptr<Code> _code;
    Predicate _init;
    Predicate _safety;
    Predicate _assumption;
    std::vector<CompiledEvent> _events;
    std::vector<int> _ctrl; // positions in _events, in declaration order
    std::vector<int> _plant;
    std::vector<SolveVar> _state_vars;
    std::vector<SolveVar> _primed_vars;
    std::vector<std::uint64_t> _radix;
    std::uint64_t _state_count = 0;

    SolveVar solve_var( int slot, const Domain& d, bool bottom ) const
    {
        SolveVar v;
        v.slot = slot;
        v.domain = d;
        v.allows_bottom = bottom;
        if ( !d.is_int() )
            v.values = domain_values( d, _table );
        return v;
    }

    void build()
    {
        if ( _m.controller_events().empty() )
            throw ValidationError( "machine must declare at least one controller event", _m.pos );

        std::set<std::string> names;
        auto claim = [ & ]( const std::string& n, SourcePos pos ) {
            if ( !names.insert( n ).second )
                throw ValidationError( "duplicate declaration of '" + n + "'", pos );
        };
        for ( const auto& v : _m.vars )
        {
            claim( v.name, v.pos );
            check_domain( v.domain, "variable '" + v.name + "'", v.pos );
        }
        for ( const auto& c : _m.consts )
        {
            claim( c.name, c.pos );
            if ( c.lo > c.hi )
                throw ValidationError( "invalid domain for constant '" + c.name + "': empty interval", c.pos );
            if ( auto it = _bindings.find( c.name ); it != _bindings.end() && ( it->second < c.lo || it->second > c.hi ) )
                throw ValidationError( "value " + std::to_string( it->second ) + " for '" + c.name
                                               + "' lies outside its declared domain",
                                       c.pos );
        }
        for ( const auto& v : _m.vars )
            for ( const auto& c : v.domain.members )
                if ( names.count( c ) )
                    throw ValidationError( "enum constant '" + c + "' clashes with a declared name", v.pos );
        std::set<std::string> event_names;
        std::size_t max_params = 0;
        for ( const auto& e : _m.events )
        {
            if ( !event_names.insert( e.name ).second )
                throw ValidationError( "duplicate event '" + e.name + "'", e.pos );
            max_params = std::max( max_params, e.params.size() );
        }

        _n = static_cast<int>( _m.vars.size() );
        _param_base = 2 * _n;
        _binder_base = _param_base + static_cast<int>( max_params );
        _code = std::make_shared<Code>();
        _code->limits = _limits;

        Scope base;
        base.constants = &_table;
        base.prime_offset = _n;
        base.binder_base = _binder_base;
        base.limits = _limits;
        for ( int i = 0; i < _n; ++i )
            base.vars[ _m.vars[ static_cast<std::size_t>( i ) ].name ] = { i, &_m.vars[ static_cast<std::size_t>( i ) ].domain, false };
        for ( const auto& c : _m.consts )
        {
            auto it = _bindings.find( c.name );
            base.consts[ c.name ] = it == _bindings.end() ? std::nullopt : std::optional<std::int64_t>( it->second );
        }

        int depth = 0;
        auto compile = [ & ]( const Scope& scope, const Expr& e ) {
            Compiler c( scope, *_code );
            auto p = c.lower_predicate( e, _code );
            depth = std::max( depth, c.max_depth() );
            return p;
        };
        _init = compile( base, _m.init );
        _safety = compile( base, _m.safety );
        _assumption = compile( base, _m.uncertainty ? *_m.uncertainty : ex::tru() );

        for ( const auto& e : _m.events )
        {
            CompiledEvent ce;
            ce.def = &e;
            Scope scope = base;
            std::set<std::string> pnames;
            for ( std::size_t k = 0; k < e.params.size(); ++k )
            {
                const auto& p = e.params[ k ];
                if ( !pnames.insert( p.name ).second || names.count( p.name ) || _table.find( p.name ) )
                    throw ValidationError( "parameter '" + p.name + "' clashes with another name", p.pos );
                check_domain( p.domain, "parameter '" + p.name + "'", p.pos );
                int slot = _param_base + static_cast<int>( k );
                scope.params[ p.name ] = { slot, &p.domain, p.allows_bottom };
                ce.params.push_back( solve_var( slot, p.domain, p.allows_bottom ) );
            }
            for ( const auto& [ nm, primed ] : free_refs( e.guard ) )
                if ( primed )
                    throw ValidationError( "primed reference in guard of event '" + e.name + "'", e.guard->pos );
            ce.guard = compile( scope, e.guard );
            scope.primes_allowed = true;
            ce.action = compile( scope, e.action );
            auto refs = free_refs( e.action );
            for ( const auto& v : _m.vars )
                if ( !refs.count( { v.name, true } ) )
                    throw ValidationError( "action of event '" + e.name + "' leaves '" + v.name + "' unconstrained",
                                           e.action->pos );
            ( e.kind == EventKind::Controller ? _ctrl : _plant ).push_back( static_cast<int>( _events.size() ) );
            _events.push_back( std::move( ce ) );
        }
        _frame = _binder_base + depth;

        for ( int i = 0; i < _n; ++i )
        {
            const auto& d = _m.vars[ static_cast<std::size_t>( i ) ].domain;
            _state_vars.push_back( solve_var( i, d, false ) );
            _primed_vars.push_back( solve_var( _n + i, d, false ) );
        }

        // Mixed radix, last variable fastest: lexicographic by declaration.
        _radix.assign( static_cast<std::size_t>( _n ), 1 );
        _state_count = 1;
        bool overflow = false;
        for ( int i = _n - 1; i >= 0; --i )
        {
            _radix[ static_cast<std::size_t>( i ) ] = _state_count;
            auto sz = _m.vars[ static_cast<std::size_t>( i ) ].domain.size();
            if ( __builtin_mul_overflow( _state_count, sz, &_state_count ) )
                overflow = true;
        }
        if ( overflow )
            _state_count = UINT64_MAX;
    }

public:
    Model( Machine m, Bindings b = {}, Limits limits = {} )
            : _m( std::move( m ) ), _bindings( std::move( b ) ), _limits( limits ), _table( constant_table( _m ) )
    {
        build();
    }

    Model( const Model& ) = delete;
    Model& operator=( const Model& ) = delete;

    [[nodiscard]] const Machine& machine() const { return _m; }
    [[nodiscard]] const Bindings& bindings() const { return _bindings; }
    [[nodiscard]] const Limits& limits() const { return _limits; }
    [[nodiscard]] const ConstantTable& constants() const { return _table; }
    [[nodiscard]] const Code& code() const { return *_code; }
    [[nodiscard]] int var_count() const { return _n; }
    [[nodiscard]] int frame_size() const { return _frame; }
    [[nodiscard]] int param_base() const { return _param_base; }
    [[nodiscard]] const std::vector<CompiledEvent>& events() const { return _events; }
    [[nodiscard]] const std::vector<SolveVar>& state_vars() const { return _state_vars; }
    [[nodiscard]] const std::vector<SolveVar>& primed_vars() const { return _primed_vars; }
    [[nodiscard]] const Predicate& init() const { return _init; }
    [[nodiscard]] const Predicate& safety() const { return _safety; }
    [[nodiscard]] const Predicate& assumption() const { return _assumption; }

    // 1-based controller index i maps to event position controller_event(i).
    [[nodiscard]] int controller_count() const { return static_cast<int>( _ctrl.size() ); }
    [[nodiscard]] const CompiledEvent& controller( int i ) const { return _events[ static_cast<std::size_t>( _ctrl.at( static_cast<std::size_t>( i - 1 ) ) ) ]; }
    [[nodiscard]] std::vector<const CompiledEvent*> plant_events() const
    {
        std::vector<const CompiledEvent*> out;
        for ( int k : _plant )
            out.push_back( &_events[ static_cast<std::size_t>( k ) ] );
        return out;
    }

    [[nodiscard]] std::uint64_t state_count() const { return _state_count; }

    void require_enumerable() const
    {
        if ( _state_count > _limits.state_cap )
            throw CapExceeded( "state space too large: " + ( _state_count == UINT64_MAX ? std::string( "overflow" ) : std::to_string( _state_count ) )
                               + " states exceed the cap of " + std::to_string( _limits.state_cap ) );
    }

    [[nodiscard]] Env frame() const { return Env( static_cast<std::size_t>( _frame ), Value::integer( 0 ) ); }

    [[nodiscard]] Env frame( const Valuation& s ) const
    {
        Env env = frame();
        std::copy( s.begin(), s.end(), env.begin() );
        return env;
    }

    [[nodiscard]] Valuation state_at( std::uint64_t index ) const
    {
        Valuation s( static_cast<std::size_t>( _n ) );
        for ( int i = 0; i < _n; ++i )
        {
            const auto& d = _m.vars[ static_cast<std::size_t>( i ) ].domain;
            auto digit = index / _radix[ static_cast<std::size_t>( i ) ];
            index %= _radix[ static_cast<std::size_t>( i ) ];
            s[ static_cast<std::size_t>( i ) ] = d.is_int() ? Value::integer( d.lo + static_cast<std::int64_t>( digit ) )
                                                            : Value::enumeration( *_table.find( d.members[ digit ] ) );
        }
        return s;
    }

    // Inverse of state_at for in-domain valuations.
    [[nodiscard]] std::uint64_t index_of( const Valuation& s ) const
    {
        std::uint64_t index = 0;
        for ( int i = 0; i < _n; ++i )
        {
            const auto& d = _m.vars[ static_cast<std::size_t>( i ) ].domain;
            const auto& v = s[ static_cast<std::size_t>( i ) ];
            std::uint64_t digit = 0;
            if ( d.is_int() )
                digit = static_cast<std::uint64_t>( v.v - d.lo );
            else
                digit = static_cast<std::uint64_t>(
                        std::find( d.members.begin(), d.members.end(), _table.name( v.v ) ) - d.members.begin() );
            index += digit * _radix[ static_cast<std::size_t>( i ) ];
        }
        return index;
    }

    [[nodiscard]] std::vector<Valuation> enumerate_states() const
    {
        require_enumerable();
        std::vector<Valuation> out;
        out.reserve( _state_count );
        for ( std::uint64_t k = 0; k < _state_count; ++k )
            out.push_back( state_at( k ) );
        return out;
    }

    [[nodiscard]] bool in_domain( const Valuation& s ) const
    {
        if ( static_cast<int>( s.size() ) != _n )
            return false;
        for ( int i = 0; i < _n; ++i )
            if ( !domain_contains( _m.vars[ static_cast<std::size_t>( i ) ].domain, s[ static_cast<std::size_t>( i ) ], _table ) )
                return false;
        return true;
    }

    [[nodiscard]] bool holds( const Predicate& p, const Valuation& s ) const
    {
        Env env( static_cast<std::size_t>( std::max( _frame, p.frame ) ), Value::integer( 0 ) );
        std::copy( s.begin(), s.end(), env.begin() );
        return p.holds( env );
    }

    // Compiles an extra predicate over the state variables of this machine.
    [[nodiscard]] Predicate compile_state_predicate( const Expr& e ) const
    {
        Scope scope;
        scope.constants = &_table;
        scope.binder_base = _binder_base;
        scope.limits = _limits;
        for ( int i = 0; i < _n; ++i )
            scope.vars[ _m.vars[ static_cast<std::size_t>( i ) ].name ] = { i, &_m.vars[ static_cast<std::size_t>( i ) ].domain, false };
        for ( const auto& c : _m.consts )
        {
            auto it = _bindings.find( c.name );
            scope.consts[ c.name ] = it == _bindings.end() ? std::nullopt : std::optional<std::int64_t>( it->second );
        }
        auto code = std::make_shared<Code>();
        code->limits = _limits;
        Compiler c( scope, *code );
        return c.lower_predicate( e, code );
    }

    [[nodiscard]] bool is_safe( const Valuation& s ) const { return holds( _safety, s ); }
    [[nodiscard]] bool is_initial( const Valuation& s ) const { return holds( _init, s ); }
    [[nodiscard]] bool assumption_holds( const Valuation& s ) const { return holds( _assumption, s ); }

    // Parameter valuations p with G(s, p).
    [[nodiscard]] std::vector<Valuation> guard_solutions( const CompiledEvent& e, const Valuation& s ) const
    {
        Env env = frame( s );
        Solver solver( *_code, e.params, env );
        return solver.all( e.guard, _limits.param_cap );
    }

    [[nodiscard]] bool enabled( const CompiledEvent& e, const Valuation& s ) const
    {
        Env env = frame( s );
        Solver solver( *_code, e.params, env );
        return solver.any( e.guard );
    }

    [[nodiscard]] bool guard_holds( const CompiledEvent& e, const Valuation& s, const Valuation& p ) const
    {
        Env env = frame( s );
        std::copy( p.begin(), p.end(), env.begin() + _param_base );
        return e.guard.holds( env );
    }

    // Successor states of A(s, p), restricted to the declared domains.
    [[nodiscard]] std::vector<Valuation> action_solutions( const CompiledEvent& e, const Valuation& s, const Valuation& p ) const
    {
        Env env = frame( s );
        std::copy( p.begin(), p.end(), env.begin() + _param_base );
        Solver solver( *_code, _primed_vars, env );
        return solver.all( e.action, _limits.state_cap );
    }

    [[nodiscard]] bool action_nonempty( const CompiledEvent& e, const Valuation& s, const Valuation& p ) const
    {
        Env env = frame( s );
        std::copy( p.begin(), p.end(), env.begin() + _param_base );
        Solver solver( *_code, _primed_vars, env );
        return solver.any( e.action );
    }

    [[nodiscard]] bool action_admits( const CompiledEvent& e, const Valuation& s, const Valuation& p, const Valuation& t ) const
    {
        Env env = frame( s );
        std::copy( t.begin(), t.end(), env.begin() + _n );
        std::copy( p.begin(), p.end(), env.begin() + _param_base );
        return e.action.holds( env );
    }

    [[nodiscard]] std::vector<Valuation> event_successors( const CompiledEvent& e, const Valuation& s ) const
    {
        std::vector<Valuation> out;
        for ( const auto& p : guard_solutions( e, s ) )
            for ( auto& t : action_solutions( e, s, p ) )
                out.push_back( std::move( t ) );
        std::sort( out.begin(), out.end() );
        out.erase( std::unique( out.begin(), out.end() ), out.end() );
        return out;
    }

    [[nodiscard]] std::vector<Valuation> successors( const Valuation& s ) const
    {
        std::vector<Valuation> out;
        for ( const auto& e : _events )
            for ( auto& t : event_successors( e, s ) )
                out.push_back( std::move( t ) );
        std::sort( out.begin(), out.end() );
        out.erase( std::unique( out.begin(), out.end() ), out.end() );
        return out;
    }

    // 1-based indices of controller events enabled at s.
    [[nodiscard]] std::vector<int> enabled_controller_events( const Valuation& s ) const
    {
        std::vector<int> out;
        for ( int i = 1; i <= controller_count(); ++i )
            if ( enabled( controller( i ), s ) )
                out.push_back( i );
        return out;
    }

    [[nodiscard]] std::string format_value( const Value& v ) const
    {
        switch ( v.kind )
        {
        case Value::Kind::Int:
            return std::to_string( v.v );
        case Value::Kind::Bool:
            return v.v ? "true" : "false";
        case Value::Kind::Enum:
            return _table.name( v.v );
        default:
            return "bot";
        }
    }

    [[nodiscard]] std::string format_state( const Valuation& s ) const
    {
        std::string out = "(";
        for ( std::size_t i = 0; i < s.size(); ++i )
        {
            if ( i )
                out += ", ";
            out += _m.vars[ i ].name + "=" + format_value( s[ i ] );
        }
        return out + ")";
    }

    [[nodiscard]] Value parse_value( const Domain& d, const std::string& text ) const
    {
        if ( text == "bot" )
            return Value::bottom();
        if ( d.is_int() )
            return Value::integer( std::stoll( text ) );
        auto id = _table.find( text );
        if ( !id )
            throw ValidationError( "unknown enum constant '" + text + "'" );
        return Value::enumeration( *id );
    }

    [[nodiscard]] Valuation make_state( const std::map<std::string, std::string>& named ) const
    {
        Valuation s;
        for ( const auto& v : _m.vars )
        {
            auto it = named.find( v.name );
            if ( it == named.end() )
                throw ValidationError( "missing value for '" + v.name + "'" );
            s.push_back( parse_value( v.domain, it->second ) );
        }
        return s;
    }
};

} // namespace robustikit
