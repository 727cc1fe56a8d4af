#pragma once

// One-shot evaluation of an expression under a named environment. Names
// ending in ' bind primed references. Meant for tests and tooling; model
// checks go through Model, which compiles once.

#include "robustikit/core/compile.hpp"

#include <map>
#include <string>

namespace robustikit
{

inline Value eval( const Expr& e, const std::map<std::string, Value>& env, const ConstantTable& table = {},
                   Limits limits = {} )
{
    static const Domain any_int = Domain::interval( -( std::int64_t{ 1 } << 62 ), std::int64_t{ 1 } << 62 );
    const Domain any_enum = Domain::enumeration( table.size() ? table.names() : std::vector<std::string>{ "_" } );

    std::map<std::string, int> base;
    for ( const auto& [ k, v ] : env )
    {
        auto name = !k.empty() && k.back() == '\'' ? k.substr( 0, k.size() - 1 ) : k;
        base.emplace( name, static_cast<int>( base.size() ) );
    }
    const int n = static_cast<int>( base.size() );

    Scope scope;
    scope.constants = &table;
    scope.prime_offset = n;
    scope.primes_allowed = true;
    scope.binder_base = 2 * n;
    scope.limits = limits;
    std::vector<Domain> domains( static_cast<std::size_t>( n ), any_int );
    for ( const auto& [ k, v ] : env )
    {
        auto name = !k.empty() && k.back() == '\'' ? k.substr( 0, k.size() - 1 ) : k;
        if ( v.is_enum() )
            domains[ static_cast<std::size_t>( base[ name ] ) ] = any_enum;
    }
    for ( const auto& [ name, slot ] : base )
        scope.vars[ name ] = { slot, &domains[ static_cast<std::size_t>( slot ) ], false };

    Code code;
    code.limits = limits;
    Compiler c( scope, code );
    auto [ root, type ] = c.lower( e );
    Env frame( static_cast<std::size_t>( 2 * n + c.max_depth() ), Value::integer( 0 ) );
    for ( const auto& [ k, v ] : env )
    {
        bool primed = !k.empty() && k.back() == '\'';
        auto name = primed ? k.substr( 0, k.size() - 1 ) : k;
        frame[ static_cast<std::size_t>( base[ name ] + ( primed ? n : 0 ) ) ] = v;
    }
    return code.eval( root, frame );
}

} // namespace robustikit
