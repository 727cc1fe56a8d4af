#pragma once

// Finds all (or any) assignments to a small set of slots that satisfy a
// compiled predicate, with everything else in the frame already fixed.
// Conjuncts are checked as soon as their slots are bound; equalities that
// define a slot and affine comparisons narrow the candidate range first.

#include "robustikit/core/compile.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace robustikit
{

struct SolveVar
{
    int slot = -1;
    Domain domain;
    bool allows_bottom = false;
    std::vector<Value> values; // enum members, resolved; empty for int domains
};

class Solver
{
    struct Item
    {
        const Conjunct* c;
        std::uint64_t mask;
    };

    const Code& _code;
    const std::vector<SolveVar>& _vars;
    std::vector<int> _slot_var; // slot -> index into _vars, or -1
    Env& _env;
    std::uint64_t _full = 0;
    const std::function<bool( Env& )>* _sink = nullptr;

    std::uint64_t mask_of( const Conjunct& c ) const
    {
        std::uint64_t m = 0;
        for ( int s : c.slots )
            if ( s < static_cast<int>( _slot_var.size() ) && _slot_var[ static_cast<std::size_t>( s ) ] >= 0 )
                m |= std::uint64_t{ 1 } << _slot_var[ static_cast<std::size_t>( s ) ];
        return m;
    }

    static std::int64_t floor_div( std::int64_t a, std::int64_t b )
    {
        auto q = a / b;
        if ( ( a % b != 0 ) && ( ( a < 0 ) != ( b < 0 ) ) )
            --q;
        return q;
    }

    static std::int64_t ceil_div( std::int64_t a, std::int64_t b ) { return -floor_div( -a, b ); }

    // Candidate values for var k given the atoms that only wait on it.
    std::vector<Value> candidates( int k, const std::vector<Item>& items, std::uint64_t bound )
    {
        const SolveVar& v = _vars[ static_cast<std::size_t>( k ) ];
        const std::uint64_t bit = std::uint64_t{ 1 } << k;
        std::optional<Value> exact;
        bool empty = false;
        std::int64_t lo = v.domain.lo;
        std::int64_t hi = v.domain.hi;
        bool bottom_ok = v.allows_bottom;

        for ( const auto& it : items )
        {
            if ( it.c->is_branch() || ( it.mask & ~bound ) != bit )
                continue;
            const CNode& n = _code.nodes[ static_cast<std::size_t>( it.c->root ) ];
            if ( n.op == COp::Eq )
            {
                const CNode& l = _code.nodes[ static_cast<std::size_t>( n.a ) ];
                const CNode& r = _code.nodes[ static_cast<std::size_t>( n.b ) ];
                int other = -1;
                if ( l.op == COp::Slot && l.slot == v.slot && !_code.contains_slot( n.b, v.slot ) )
                    other = n.b;
                else if ( r.op == COp::Slot && r.slot == v.slot && !_code.contains_slot( n.a, v.slot ) )
                    other = n.a;
                if ( other >= 0 )
                {
                    Value val;
                    try
                    {
                        val = _code.eval( other, _env );
                    }
                    catch ( const EvalError& )
                    {
                        continue;
                    }
                    if ( exact && *exact != val )
                        empty = true;
                    exact = val;
                    continue;
                }
            }
            if ( !v.domain.is_int() || ( n.op != COp::Lt && n.op != COp::Le && n.op != COp::Eq ) )
                continue;
            if ( !_code.affine_in( n.a, v.slot ) || !_code.affine_in( n.b, v.slot ) )
                continue;
            std::int64_t f0 = 0;
            std::int64_t f1 = 0;
            auto& slot = _env[ static_cast<std::size_t>( v.slot ) ];
            try
            {
                slot = Value::integer( 0 );
                f0 = _code.eval( n.a, _env ).as_int() - _code.eval( n.b, _env ).as_int();
                slot = Value::integer( 1 );
                f1 = _code.eval( n.a, _env ).as_int() - _code.eval( n.b, _env ).as_int();
            }
            catch ( const EvalError& )
            {
                continue;
            }
            // a*x + b OP 0
            const std::int64_t a = f1 - f0;
            const std::int64_t c = -f0;
            if ( a == 0 )
                continue;
            // Under the affine relation bottom never satisfies an integer atom.
            bottom_ok = false;
            if ( n.op == COp::Eq )
            {
                if ( c % a != 0 )
                    empty = true;
                else
                {
                    lo = std::max( lo, c / a );
                    hi = std::min( hi, c / a );
                }
                continue;
            }
            const std::int64_t rhs = n.op == COp::Lt ? c - 1 : c;
            if ( a > 0 )
                hi = std::min( hi, floor_div( rhs, a ) );
            else
                lo = std::max( lo, ceil_div( rhs, a ) );
        }

        std::vector<Value> out;
        if ( empty )
            return out;
        if ( exact )
        {
            bool ok = exact->is_bottom() ? v.allows_bottom
                      : v.domain.is_int()
                          ? exact->is_int() && exact->v >= lo && exact->v <= hi
                          : std::find( v.values.begin(), v.values.end(), *exact ) != v.values.end();
            if ( ok )
                out.push_back( *exact );
            return out;
        }
        if ( v.domain.is_int() )
            for ( auto x = lo; x <= hi; ++x )
                out.push_back( Value::integer( x ) );
        else
            out = v.values;
        if ( bottom_ok )
            out.push_back( Value::bottom() );
        return out;
    }

    // Returns false once the sink asks to stop.
    bool search( std::vector<Item> items, std::uint64_t bound )
    {
        std::vector<Item> pending;
        pending.reserve( items.size() );
        for ( const auto& it : items )
        {
            if ( ( it.mask & ~bound ) == 0 )
            {
                if ( !_code.eval( it.c->root, _env ).as_bool() )
                    return true;
            }
            else
                pending.push_back( it );
        }

        if ( bound == _full )
            return ( *_sink )( _env );

        for ( std::size_t i = 0; i < pending.size(); ++i )
        {
            if ( !pending[ i ].c->is_branch() )
                continue;
            // Split on the first open disjunction.
            for ( const auto& branch : pending[ i ].c->branches )
            {
                std::vector<Item> next;
                next.reserve( pending.size() + branch.size() );
                for ( std::size_t j = 0; j < pending.size(); ++j )
                    if ( j != i )
                        next.push_back( pending[ j ] );
                for ( const auto& c : branch )
                    next.push_back( { &c, mask_of( c ) } );
                if ( !search( std::move( next ), bound ) )
                    return false;
            }
            return true;
        }

        int best = -1;
        std::vector<Value> best_values;
        for ( int k = 0; k < static_cast<int>( _vars.size() ); ++k )
        {
            if ( bound & ( std::uint64_t{ 1 } << k ) )
                continue;
            auto vals = candidates( k, pending, bound );
            if ( best < 0 || vals.size() < best_values.size() )
            {
                best = k;
                best_values = std::move( vals );
                if ( best_values.size() <= 1 )
                    break;
            }
        }
        auto& slot = _env[ static_cast<std::size_t>( _vars[ static_cast<std::size_t>( best ) ].slot ) ];
        for ( const auto& val : best_values )
        {
            slot = val;
            if ( !search( pending, bound | ( std::uint64_t{ 1 } << best ) ) )
                return false;
        }
        return true;
    }

public:
    Solver( const Code& code, const std::vector<SolveVar>& vars, Env& env ) : _code( code ), _vars( vars ), _env( env )
    {
        if ( vars.size() > 63 )
            throw ValidationError( "too many unknowns in one constraint" );
        int max_slot = -1;
        for ( const auto& v : vars )
            max_slot = std::max( max_slot, v.slot );
        _slot_var.assign( static_cast<std::size_t>( max_slot + 1 ), -1 );
        for ( std::size_t k = 0; k < vars.size(); ++k )
            _slot_var[ static_cast<std::size_t>( vars[ k ].slot ) ] = static_cast<int>( k );
        _full = vars.empty() ? 0 : ( ~std::uint64_t{ 0 } >> ( 64 - vars.size() ) );
    }

    // Calls sink for every satisfying assignment (possibly with repeats when
    // disjuncts overlap); sink returns false to stop.
    void run( const Predicate& p, const std::function<bool( Env& )>& sink )
    {
        _sink = &sink;
        std::vector<Item> items;
        for ( const auto& c : p.conjuncts )
            items.push_back( { &c, mask_of( c ) } );
        search( std::move( items ), 0 );
    }

    // Sorted, duplicate-free solutions projected onto the solve vars.
    std::vector<Valuation> all( const Predicate& p, std::uint64_t cap = UINT64_MAX )
    {
        std::vector<Valuation> out;
        run( p, [ & ]( Env& env ) {
            Valuation v;
            v.reserve( _vars.size() );
            for ( const auto& sv : _vars )
                v.push_back( env[ static_cast<std::size_t>( sv.slot ) ] );
            out.push_back( std::move( v ) );
            if ( out.size() > cap )
                throw CapExceeded( "solution set exceeds the configured limit" );
            return true;
        } );
        std::sort( out.begin(), out.end() );
        out.erase( std::unique( out.begin(), out.end() ), out.end() );
        return out;
    }

    bool any( const Predicate& p )
    {
        bool found = false;
        run( p, [ & ]( Env& ) {
            found = true;
            return false;
        } );
        return found;
    }
};

} // namespace robustikit
