#pragma once

#include "robustikit/analysis/checks.hpp"
#include "robustikit/core/uncertainty.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace robustikit
{

// e with every reference to one of the given names replaced by its primed form.
inline Expr prime_names( const Expr& e, const std::vector<std::string>& names )
{
    std::map<RefKey, Expr> sub;
    for ( const auto& n : names )
        sub[ { n, false } ] = ex::ref( n, true );
    return substitute( e, sub );
}

inline std::vector<std::string> var_names( const Machine& m )
{
    std::vector<std::string> out;
    for ( const auto& v : m.vars )
        out.push_back( v.name );
    return out;
}

// s' ∈ ε(^s'), over the primed true and perceived variables of m.
inline Expr primed_membership( const Machine& m, const UncertaintySpec& spec )
{
    std::vector<std::string> names;
    for ( const auto& v : m.vars )
    {
        names.push_back( v.name );
        names.push_back( hat_of( v.name ) );
    }
    auto u = prime_names( membership_predicate( m, spec ), names );
    // A perceived variable left free by an `any` clause still has to be
    // mentioned for the action to be well formed.
    auto refs = free_refs( u );
    std::vector<Expr> parts{ u };
    for ( const auto& v : m.vars )
        if ( !refs.count( { hat_of( v.name ), true } ) )
            parts.push_back( ex::eq( ex::ref( hat_of( v.name ), true ), ex::ref( hat_of( v.name ), true ) ) );
    return ex::conj( parts );
}

inline std::map<RefKey, Expr> hat_substitution( const Machine& m )
{
    std::map<RefKey, Expr> sub;
    for ( const auto& v : m.vars )
        sub[ { v.name, false } ] = ex::ref( hat_of( v.name ) );
    return sub;
}

inline std::string injected_name( const Machine& m, const UncertaintySpec& spec ) { return m.name + "_" + spec.name; }

// The paired machine: true variables followed by their perceived copies.
// Plant events keep reading the true state, controller guards read the
// perceived one, and every action re-establishes s' ∈ ε(^s').
inline Machine inject( const Machine& m, const UncertaintySpec& spec, const Bindings& bindings = {} )
{
    if ( m.is_paired() )
        throw ValidationError( "machine '" + m.name + "' is already paired" );
    if ( spec.machine != m.name )
        throw ValidationError( "uncertainty '" + spec.name + "' is declared for '" + spec.machine + "', not '" + m.name + "'" );

    Model model( m, bindings );
    Uncertainty eps( model, spec, bindings );
    try
    {
        if ( auto bad = eps.reflexivity_violation() )
            throw ValidationError( "uncertainty '" + spec.name + "' is not reflexive: " + model.format_state( *bad )
                                   + " is not in its own neighborhood" );
    }
    catch ( const EvalError& )
    {
        // The relation depends on an unbound constant; checked once bound.
    }
    auto part = check_partitioning( model );
    if ( part.fails() )
        throw PartitioningViolation( "machine '" + m.name + "' violates partitioning: " + part.witnesses.front().text() );

    Machine out;
    out.name = injected_name( m, spec );
    out.provenance = { Derivation::Inject, m.name, spec.name };
    out.vars = m.vars;
    for ( const auto& v : m.vars )
        out.vars.push_back( { hat_of( v.name ), v.domain, v.pos } );
    out.consts = m.consts;
    for ( const auto& c : spec.consts )
        out.consts.push_back( c );
    auto u = membership_predicate( m, spec );
    out.init = ex::and_( m.init, u );
    out.safety = m.safety;
    out.uncertainty = u;

    auto u_next = primed_membership( m, spec );
    auto hats = hat_substitution( m );
    for ( const auto& e : m.events )
    {
        EventDef d = e;
        if ( e.kind == EventKind::Controller )
            d.guard = substitute( e.guard, hats );
        d.action = ex::and_( e.action, u_next );
        out.events.push_back( std::move( d ) );
    }
    return out;
}

// Whether pm is exactly what inject(m, spec) produces.
inline bool is_injection_of( const Machine& pm, const Machine& m, const UncertaintySpec& spec )
{
    if ( pm.provenance.method != Derivation::Inject || pm.provenance.source_machine != m.name
         || pm.provenance.uncertainty != spec.name )
        return false;
    try
    {
        return pm == inject( m, spec );
    }
    catch ( const Error& )
    {
        return false;
    }
}

} // namespace robustikit
