#pragma once

#include "robustikit/core/semantics.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robustikit
{

// The predicate s ∈ ε(^s) over plain (true) and hat (perceived) variable names.
inline Expr membership_predicate( const Machine& m, const UncertaintySpec& spec )
{
    std::vector<Expr> parts;
    for ( const auto& v : m.vars )
    {
        const auto* c = spec.clause_for( v.name );
        auto x = ex::ref( v.name );
        auto hx = ex::ref( hat_of( v.name ) );
        if ( !c || c->kind == UncertaintyClause::Kind::Exact )
            parts.push_back( ex::eq( x, hx ) );
        else if ( c->kind == UncertaintyClause::Kind::Within )
        {
            auto r = c->radius.to_expr();
            parts.push_back( ex::le( ex::sub( hx, r ), x ) );
            parts.push_back( ex::le( x, ex::add( hx, r ) ) );
        }
    }
    if ( spec.relation )
        parts.push_back( *spec.relation );
    return ex::conj( parts );
}

// ε for one machine at fixed constant bindings.
class Uncertainty
{
    const Model& _model;
    UncertaintySpec _spec;
    Bindings _bindings;
    std::vector<UncertaintyClause::Kind> _kind;
    std::vector<std::optional<std::int64_t>> _radius;
    std::vector<std::string> _radius_symbol;
    std::shared_ptr<Code> _code;
    std::optional<Predicate> _relation;
    int _frame = 0;

public:
    Uncertainty( const Model& model, UncertaintySpec spec, Bindings bindings = {} )
            : _model( model ), _spec( std::move( spec ) ), _bindings( std::move( bindings ) )
    {
        const Machine& m = model.machine();
        for ( const auto& [ name, value ] : model.bindings() )
            _bindings.emplace( name, value );

        std::map<std::string, std::optional<std::int64_t>> consts;
        for ( const auto& c : m.consts )
        {
            auto it = _bindings.find( c.name );
            consts[ c.name ] = it == _bindings.end() ? std::nullopt : std::optional<std::int64_t>( it->second );
        }
        for ( const auto& c : _spec.consts )
        {
            if ( c.lo > c.hi )
                throw ValidationError( "invalid domain for constant '" + c.name + "': empty interval", c.pos );
            if ( m.find_var( c.name ) )
                throw ValidationError( "constant '" + c.name + "' clashes with a variable", c.pos );
            auto it = _bindings.find( c.name );
            if ( it != _bindings.end() && ( it->second < c.lo || it->second > c.hi ) )
                throw ValidationError( "value " + std::to_string( it->second ) + " for '" + c.name
                                               + "' lies outside its declared domain",
                                       c.pos );
            consts[ c.name ] = it == _bindings.end() ? std::nullopt : std::optional<std::int64_t>( it->second );
        }

        for ( const auto& c : _spec.clauses )
        {
            const auto* v = m.find_var( c.var );
            if ( !v )
                throw ValidationError( "uncertainty clause for unknown variable '" + c.var + "'", c.pos );
            if ( c.kind == UncertaintyClause::Kind::Within && !v->domain.is_int() )
                throw ValidationError( "interval clause for enum variable '" + c.var + "'", c.pos );
            if ( c.kind == UncertaintyClause::Kind::Within && c.radius.is_symbolic() && !consts.count( c.radius.symbol ) )
                throw ValidationError( "unknown radius constant '" + c.radius.symbol + "'", c.pos );
            if ( c.kind == UncertaintyClause::Kind::Within && !c.radius.is_symbolic() && c.radius.literal < 0 )
                throw ValidationError( "negative radius for '" + c.var + "'", c.pos );
        }

        for ( const auto& v : m.vars )
        {
            const auto* c = _spec.clause_for( v.name );
            _kind.push_back( c ? c->kind : UncertaintyClause::Kind::Exact );
            std::optional<std::int64_t> r = 0;
            std::string sym;
            if ( c && c->kind == UncertaintyClause::Kind::Within )
            {
                if ( c->radius.is_symbolic() )
                {
                    sym = c->radius.symbol;
                    r = consts[ sym ];
                    if ( r && *r < 0 )
                        throw ValidationError( "negative radius for '" + c->var + "'", c->pos );
                }
                else
                    r = c->radius.literal;
            }
            _radius.push_back( r );
            _radius_symbol.push_back( sym );
        }

        if ( _spec.relation )
        {
            const int n = model.var_count();
            Scope scope;
            scope.constants = &model.constants();
            scope.binder_base = 2 * n;
            scope.limits = model.limits();
            scope.consts = consts;
            for ( int i = 0; i < n; ++i )
            {
                const auto& v = m.vars[ static_cast<std::size_t>( i ) ];
                scope.vars[ v.name ] = { i, &v.domain, false };
                scope.vars[ hat_of( v.name ) ] = { n + i, &v.domain, false };
            }
            for ( const auto& [ nm, primed ] : free_refs( *_spec.relation ) )
                if ( primed )
                    throw ValidationError( "primed reference in uncertainty relation", ( *_spec.relation )->pos );
            _code = std::make_shared<Code>();
            _code->limits = model.limits();
            Compiler c( scope, *_code );
            _relation = c.lower_predicate( *_spec.relation, _code );
            _frame = 2 * n + c.max_depth();
        }
    }

    [[nodiscard]] const UncertaintySpec& spec() const { return _spec; }
    [[nodiscard]] const Model& model() const { return _model; }

    [[nodiscard]] bool bound() const
    {
        return std::all_of( _radius.begin(), _radius.end(), []( const auto& r ) { return r.has_value(); } );
    }

    [[nodiscard]] std::optional<std::int64_t> radius( std::size_t var ) const { return _radius[ var ]; }
    [[nodiscard]] UncertaintyClause::Kind kind( std::size_t var ) const { return _kind[ var ]; }

    void require_bound() const
    {
        for ( std::size_t i = 0; i < _radius.size(); ++i )
            if ( !_radius[ i ] )
                throw EvalError( "symbolic radius '" + _radius_symbol[ i ] + "' is unbound" );
    }

    [[nodiscard]] bool relation_holds( const Valuation& hat, const Valuation& s ) const
    {
        if ( !_relation )
            return true;
        Env env( static_cast<std::size_t>( _frame ), Value::integer( 0 ) );
        std::copy( s.begin(), s.end(), env.begin() );
        std::copy( hat.begin(), hat.end(), env.begin() + static_cast<std::ptrdiff_t>( s.size() ) );
        return _relation->holds( env );
    }

    [[nodiscard]] bool contains( const Valuation& hat, const Valuation& s ) const
    {
        require_bound();
        for ( std::size_t i = 0; i < s.size(); ++i )
        {
            switch ( _kind[ i ] )
            {
            case UncertaintyClause::Kind::Exact:
                if ( s[ i ] != hat[ i ] )
                    return false;
                break;
            case UncertaintyClause::Kind::Within:
                if ( s[ i ].v < hat[ i ].v - *_radius[ i ] || s[ i ].v > hat[ i ].v + *_radius[ i ] )
                    return false;
                break;
            case UncertaintyClause::Kind::Any:
                break;
            }
        }
        return relation_holds( hat, s );
    }

    // Per-variable candidate values of the ball before the relation filter.
    [[nodiscard]] std::vector<std::vector<Value>> hull( const Valuation& hat ) const
    {
        require_bound();
        const Machine& m = _model.machine();
        std::vector<std::vector<Value>> out( hat.size() );
        for ( std::size_t i = 0; i < hat.size(); ++i )
        {
            const auto& d = m.vars[ i ].domain;
            switch ( _kind[ i ] )
            {
            case UncertaintyClause::Kind::Exact:
                out[ i ] = { hat[ i ] };
                break;
            case UncertaintyClause::Kind::Within:
            {
                auto lo = std::max( d.lo, hat[ i ].v - *_radius[ i ] );
                auto hi = std::min( d.hi, hat[ i ].v + *_radius[ i ] );
                for ( auto x = lo; x <= hi; ++x )
                    out[ i ].push_back( Value::integer( x ) );
                break;
            }
            case UncertaintyClause::Kind::Any:
                out[ i ] = domain_values( d, _model.constants() );
                break;
            }
        }
        return out;
    }

    // ε(^s) clipped to the declared domains, sorted.
    [[nodiscard]] std::vector<Valuation> ball( const Valuation& hat ) const
    {
        auto h = hull( hat );
        std::vector<Valuation> out;
        Valuation cur( hat.size() );
        std::function<void( std::size_t )> rec = [ & ]( std::size_t i ) {
            if ( i == hat.size() )
            {
                if ( relation_holds( hat, cur ) )
                    out.push_back( cur );
                return;
            }
            for ( const auto& v : h[ i ] )
            {
                cur[ i ] = v;
                rec( i + 1 );
            }
        };
        rec( 0 );
        std::sort( out.begin(), out.end() );
        return out;
    }

    // First perceived state outside its own ball, if any.
    [[nodiscard]] std::optional<Valuation> reflexivity_violation() const
    {
        if ( !_relation )
            return std::nullopt;
        _model.require_enumerable();
        for ( std::uint64_t k = 0; k < _model.state_count(); ++k )
        {
            auto s = _model.state_at( k );
            if ( !relation_holds( s, s ) )
                return s;
        }
        return std::nullopt;
    }
};

} // namespace robustikit
