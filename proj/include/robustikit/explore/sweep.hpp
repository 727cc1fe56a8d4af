#pragma once

#include "robustikit/transform/robustify.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace robustikit
{

struct SweepPoint
{
    std::int64_t value = 0;
    CheckReport preserving;   // thm1 condition
    CheckReport repurposing;  // thm2 condition
};

struct SweepResult
{
    std::string machine;
    std::string uncertainty;
    std::string parameter;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::vector<SweepPoint> points;
    // Largest v such that every point up to v holds.
    std::optional<std::int64_t> max_preserving;
    std::optional<std::int64_t> max_repurposing;
    // Some point holds after an earlier one failed.
    bool non_monotonic_preserving = false;
    bool non_monotonic_repurposing = false;

    [[nodiscard]] bool non_monotonic() const { return non_monotonic_preserving || non_monotonic_repurposing; }
};

// The one symbolic constant of m and spec, checked against an optional name.
inline ConstDecl sweep_parameter( const Machine& m, const UncertaintySpec& spec, const std::string& wanted = "" )
{
    std::vector<ConstDecl> all = m.consts;
    all.insert( all.end(), spec.consts.begin(), spec.consts.end() );
    if ( all.empty() )
        throw ValidationError( "nothing to sweep: '" + m.name + "' and '" + spec.name + "' declare no constant" );
    if ( all.size() > 1 )
        throw ValidationError( "sweeps take exactly one symbolic constant, found " + std::to_string( all.size() ) );
    if ( !wanted.empty() && all[ 0 ].name != wanted )
        throw ValidationError( "unknown constant '" + wanted + "'; the sweepable constant is '" + all[ 0 ].name + "'" );
    return all[ 0 ];
}

inline void fold_maxima( SweepResult& r )
{
    auto fold = [ & ]( auto verdict, std::optional<std::int64_t>& max, bool& non_monotonic ) {
        bool failed = false;
        for ( const auto& p : r.points )
        {
            bool holds = verdict( p ).holds();
            if ( holds && failed )
                non_monotonic = true;
            if ( !holds )
                failed = true;
            else if ( !failed )
                max = p.value;
        }
    };
    fold( []( const SweepPoint& p ) -> const CheckReport& { return p.preserving; }, r.max_preserving, r.non_monotonic_preserving );
    fold( []( const SweepPoint& p ) -> const CheckReport& { return p.repurposing; }, r.max_repurposing, r.non_monotonic_repurposing );
}

// Evaluates both robustification conditions at every value in [lo, hi].
// Points are independent; opts.jobs of them run at a time.
inline SweepResult sweep( const Machine& m, const UncertaintySpec& spec, std::int64_t lo, std::int64_t hi,
                          const std::string& parameter = "", const CheckOptions& opts = {}, const Limits& limits = {} )
{
    auto c = sweep_parameter( m, spec, parameter );
    if ( lo > hi )
        throw ValidationError( "empty sweep range " + std::to_string( lo ) + ".." + std::to_string( hi ) );
    if ( lo < c.lo || hi > c.hi )
        throw ValidationError( "sweep range " + std::to_string( lo ) + ".." + std::to_string( hi ) + " leaves the domain of '"
                               + c.name + "' (" + std::to_string( c.lo ) + ".." + std::to_string( c.hi ) + ")" );

    SweepResult r;
    r.machine = m.name;
    r.uncertainty = spec.name;
    r.parameter = c.name;
    r.lo = lo;
    r.hi = hi;
    CheckOptions inner = opts;
    inner.jobs = 1;
    auto n = static_cast<std::uint64_t>( hi - lo + 1 );
    auto chunks = parallel_chunks<std::vector<SweepPoint>>( n, opts.jobs, [ & ]( std::uint64_t b, std::uint64_t e ) {
        std::vector<SweepPoint> out;
        for ( auto k = b; k < e; ++k )
        {
            SweepPoint p;
            p.value = lo + static_cast<std::int64_t>( k );
            Bindings bind{ { c.name, p.value } };
            Model model( m, bind, limits );
            Uncertainty eps( model, spec, bind );
            p.preserving = thm1_condition( model, eps, inner );
            p.repurposing = thm2_condition( model, eps, inner );
            out.push_back( std::move( p ) );
        }
        return out;
    } );
    for ( auto& ch : chunks )
        for ( auto& p : ch )
            r.points.push_back( std::move( p ) );
    fold_maxima( r );
    return r;
}

inline std::string sweep_table( const SweepResult& r )
{
    auto mark = []( const CheckReport& c ) { return std::string( verdict_name( c.verdict ) ); };
    auto width = std::max<std::size_t>( r.parameter.size(), 5 );
    auto pad = []( std::string s, std::size_t w ) {
        s.resize( std::max( w, s.size() ), ' ' );
        return s;
    };
    std::string out = "sweep of " + r.parameter + " for " + r.machine + " under " + r.uncertainty + "\n";
    out += pad( r.parameter, width ) + "  " + pad( "pR", 8 ) + "rR\n";
    for ( const auto& p : r.points )
        out += pad( std::to_string( p.value ), width ) + "  " + pad( mark( p.preserving ), 8 ) + mark( p.repurposing ) + "\n";
    auto max_text = []( const std::optional<std::int64_t>& v ) { return v ? std::to_string( *v ) : std::string( "none" ); };
    out += "pR holds up to " + r.parameter + " = " + max_text( r.max_preserving ) + "\n";
    out += "rR holds up to " + r.parameter + " = " + max_text( r.max_repurposing ) + "\n";
    if ( r.non_monotonic() )
        out += "not monotone: some value holds after a smaller one failed\n";
    return out;
}

} // namespace robustikit
