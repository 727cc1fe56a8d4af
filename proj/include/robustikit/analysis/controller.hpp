#pragma once

// The controller-side functions the robustifications are built from:
// the unique enabled index, compatible parameters, their intersection over
// an uncertainty ball, safe parameters, and the compartment of a perception.

#include "robustikit/analysis/parallel.hpp"
#include "robustikit/core/uncertainty.hpp"

#include <algorithm>
#include <iterator>
#include <string>
#include <vector>

namespace robustikit
{

using IndexSet = std::vector<int>;
using ParamSet = std::vector<Valuation>;

// Every parameter valuation of an event, sorted; bot excluded.
inline ParamSet all_params( const Model& m, const CompiledEvent& e )
{
    ParamSet out{ Valuation{} };
    for ( const auto& p : e.params )
    {
        ParamSet next;
        auto values = domain_values( p.domain, m.constants() );
        for ( const auto& prefix : out )
            for ( const auto& v : values )
            {
                auto q = prefix;
                q.push_back( v );
                next.push_back( std::move( q ) );
            }
        out = std::move( next );
        if ( out.size() > m.limits().param_cap )
            throw CapExceeded( "parameter space of event '" + e.def->name + "' exceeds the configured limit" );
    }
    std::sort( out.begin(), out.end() );
    return out;
}

inline ParamSet intersect( const ParamSet& a, const ParamSet& b )
{
    ParamSet out;
    std::set_intersection( a.begin(), a.end(), b.begin(), b.end(), std::back_inserter( out ) );
    return out;
}

class Controller
{
    const Model& _m;
    const Uncertainty* _eps;
    // Enabled index per state of the original machine: k > 0 unique, 0 none, -1 several.
    std::vector<int> _idx;

    [[noreturn]] void violation( const Valuation& s ) const
    {
        auto en = _m.enabled_controller_events( s );
        std::string set = "{";
        for ( std::size_t k = 0; k < en.size(); ++k )
            set += ( k ? "," : "" ) + std::to_string( en[ k ] );
        throw PartitioningViolation( "state " + _m.format_state( s ) + " enables controller events " + set + "}" );
    }

    int compute_idx( const Valuation& s ) const
    {
        int found = 0;
        for ( int i = 1; i <= _m.controller_count(); ++i )
            if ( _m.enabled( _m.controller( i ), s ) )
            {
                if ( found )
                    return -1;
                found = i;
            }
        return found;
    }

public:
    explicit Controller( const Model& m, const Uncertainty* eps = nullptr, unsigned jobs = 1, bool cache = true )
            : _m( m ), _eps( eps )
    {
        if ( cache && m.state_count() <= m.limits().state_cap )
        {
            auto chunks = parallel_chunks<std::vector<int>>( m.state_count(), jobs, [ & ]( std::uint64_t b, std::uint64_t e ) {
                std::vector<int> out;
                for ( auto k = b; k < e; ++k )
                    out.push_back( compute_idx( m.state_at( k ) ) );
                return out;
            } );
            for ( auto& c : chunks )
                _idx.insert( _idx.end(), c.begin(), c.end() );
        }
    }

    [[nodiscard]] const Model& model() const { return _m; }
    [[nodiscard]] const Uncertainty& eps() const { return *_eps; }

    // 0 when no controller event is enabled, -1 when several are.
    [[nodiscard]] int raw_idx( const Valuation& s ) const
    {
        return _idx.empty() ? compute_idx( s ) : _idx[ _m.index_of( s ) ];
    }

    [[nodiscard]] int idx( const Valuation& s ) const
    {
        int k = raw_idx( s );
        if ( k <= 0 )
            violation( s );
        return k;
    }

    [[nodiscard]] ParamSet par( const Valuation& s ) const { return _m.guard_solutions( _m.controller( idx( s ) ), s ); }

    [[nodiscard]] ParamSet par_eps( int i, const Valuation& hat ) const
    {
        std::optional<ParamSet> acc;
        for ( const auto& t : _eps->ball( hat ) )
        {
            if ( idx( t ) != i )
                continue;
            auto p = _m.guard_solutions( _m.controller( i ), t );
            acc = acc ? intersect( *acc, p ) : p;
        }
        return acc ? *acc : all_params( _m, _m.controller( i ) );
    }

    [[nodiscard]] IndexSet compartment( const Valuation& hat ) const
    {
        IndexSet u;
        for ( const auto& t : _eps->ball( hat ) )
            u.push_back( idx( t ) );
        std::sort( u.begin(), u.end() );
        u.erase( std::unique( u.begin(), u.end() ), u.end() );
        return u;
    }

    // Whether ∅ ⊂ A_i(t, p) ⊆ inv.
    [[nodiscard]] bool safe_action( int i, const Valuation& t, const Valuation& p, const Predicate& inv ) const
    {
        auto succ = _m.action_solutions( _m.controller( i ), t, p );
        if ( succ.empty() )
            return false;
        return std::all_of( succ.begin(), succ.end(), [ & ]( const Valuation& s ) { return _m.holds( inv, s ); } );
    }

    [[nodiscard]] ParamSet safpar( int i, const Valuation& hat, const Predicate& inv, bool prose = false ) const
    {
        auto ball = _eps->ball( hat );
        if ( prose )
            ball.erase( std::remove_if( ball.begin(), ball.end(),
                                        [ & ]( const Valuation& t ) { return !_m.enabled( _m.controller( i ), t ); } ),
                        ball.end() );
        ParamSet out;
        for ( const auto& p : all_params( _m, _m.controller( i ) ) )
            if ( std::all_of( ball.begin(), ball.end(), [ & ]( const Valuation& t ) { return safe_action( i, t, p, inv ); } ) )
                out.push_back( p );
        return out;
    }

    [[nodiscard]] ParamSet safpar( int i, const Valuation& hat, bool prose = false ) const
    {
        return safpar( i, hat, _m.safety(), prose );
    }
};

inline int idx_c( const Model& m, const Valuation& s ) { return Controller( m, nullptr, 1, false ).idx( s ); }
inline ParamSet par_c( const Model& m, const Valuation& s ) { return Controller( m, nullptr, 1, false ).par( s ); }

} // namespace robustikit
