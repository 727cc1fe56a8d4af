#pragma once

// Seeded random runs that alternate plant and controller steps, as a sanity
// check of a model's dynamics.

#include "robustikit/analysis/report.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace robustikit
{

struct TraceStep
{
    std::size_t step = 0; // 0 is the initial state
    std::string event;    // empty for the initial state
    Assignment params;
    Assignment state;
    bool safe = true;
};

struct SimulationResult
{
    std::uint64_t seed = 0;
    std::size_t steps_requested = 0;
    std::vector<TraceStep> trace;
    std::optional<std::size_t> violation_step; // first step leaving the safety invariant
    std::string stopped; // "completed", "violation" or "deadlock"
};

inline SimulationResult simulate( const Model& m, std::size_t steps, std::uint64_t seed )
{
    SimulationResult r;
    r.seed = seed;
    r.steps_requested = steps;
    r.stopped = "completed";
    if ( steps == 0 )
        return r;

    std::mt19937_64 rng( seed );
    auto pick = [ & ]( std::size_t n ) { return std::uniform_int_distribution<std::size_t>( 0, n - 1 )( rng ); };

    std::vector<Valuation> starts;
    for ( const auto& s : m.enumerate_states() )
        if ( m.is_initial( s ) && m.assumption_holds( s ) )
            starts.push_back( s );
    if ( starts.empty() )
    {
        r.stopped = "deadlock";
        return r;
    }
    Valuation s = starts[ pick( starts.size() ) ];
    r.trace.push_back( { 0, "", {}, state_assignment( m, s ), m.is_safe( s ) } );
    if ( !m.is_safe( s ) )
    {
        r.violation_step = 0;
        r.stopped = "violation";
        return r;
    }

    for ( std::size_t k = 1; k <= steps; ++k )
    {
        const auto want = k % 2 == 1 ? EventKind::Plant : EventKind::Controller;
        std::vector<std::pair<const CompiledEvent*, Valuation>> choices;
        for ( const auto& e : m.events() )
            if ( e.def->kind == want )
                for ( auto& p : m.guard_solutions( e, s ) )
                    choices.emplace_back( &e, std::move( p ) );
        // Choices with an empty action cannot fire.
        std::erase_if( choices, [ & ]( const auto& c ) { return !m.action_nonempty( *c.first, s, c.second ); } );
        if ( choices.empty() )
        {
            r.stopped = "deadlock";
            return r;
        }
        const auto& [ e, p ] = choices[ pick( choices.size() ) ];
        auto next = m.action_solutions( *e, s, p );
        s = next[ pick( next.size() ) ];
        bool safe = m.is_safe( s );
        r.trace.push_back( { k, e->def->name, param_assignment( m, *e, p ), state_assignment( m, s ), safe } );
        if ( !safe )
        {
            r.violation_step = k;
            r.stopped = "violation";
            return r;
        }
    }
    return r;
}

inline std::string trace_text( const SimulationResult& r )
{
    std::string out;
    for ( const auto& t : r.trace )
    {
        out += std::to_string( t.step ) + " ";
        if ( !t.event.empty() )
            out += t.event + " " + assignment_text( t.params ) + " -> ";
        out += assignment_text( t.state ) + ( t.safe ? "" : "  UNSAFE" ) + "\n";
    }
    out += r.stopped;
    if ( r.violation_step )
        out += " at step " + std::to_string( *r.violation_step );
    return out + "\n";
}

} // namespace robustikit
