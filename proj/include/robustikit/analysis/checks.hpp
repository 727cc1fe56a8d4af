#pragma once

// Exhaustive checks over the full state space. For machines that carry an
// uncertainty invariant, states violating it are skipped: the injected
// actions never lead there.

#include "robustikit/analysis/controller.hpp"
#include "robustikit/analysis/report.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace robustikit
{

struct ScanChunk
{
    std::vector<Witness> witnesses;
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
};

// Visits every state of m in order; visit(s, chunk) records what it finds.
// Witnesses are kept in visiting order, so the first ones are the
// lexicographically least whatever the thread count.
inline CheckReport scan_states( const Model& m, const std::string& kind, const CheckOptions& opts,
                                const std::function<void( const Valuation&, ScanChunk& )>& visit )
{
    auto start = std::chrono::steady_clock::now();
    CheckReport r;
    r.kind = kind;
    r.model = m.machine().name;
    m.require_enumerable();
    const std::size_t keep = opts.max_witnesses;
    try
    {
        auto chunks = parallel_chunks<ScanChunk>( m.state_count(), opts.jobs, [ & ]( std::uint64_t b, std::uint64_t e ) {
            ScanChunk c;
            for ( auto k = b; k < e; ++k )
            {
                visit( m.state_at( k ), c );
                if ( keep && c.witnesses.size() > keep )
                    c.witnesses.resize( keep );
            }
            return c;
        } );
        for ( auto& c : chunks )
        {
            r.stats.states_checked += c.checked;
            r.stats.violations += c.violations;
            for ( auto& w : c.witnesses )
                if ( !keep || r.witnesses.size() < keep )
                    r.witnesses.push_back( std::move( w ) );
        }
        r.verdict = r.stats.violations ? Verdict::Fails : Verdict::Holds;
    }
    catch ( const EvalError& e )
    {
        r.verdict = Verdict::Unknown;
        r.reason = e.what();
        r.witnesses.clear();
    }
    catch ( const PartitioningViolation& e )
    {
        r.verdict = Verdict::Unknown;
        r.reason = e.what();
        r.witnesses.clear();
    }
    r.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    return r;
}

inline void add_state( Witness& w, const Model& m, const std::string& role, const Valuation& s )
{
    for ( auto& part : split_state( role, state_assignment( m, s ) ) )
        w.valuations.push_back( std::move( part ) );
}

inline Witness transition_witness( const Model& m, const std::string& kind, const Valuation& s, int event_position,
                                   const Valuation& p, const Valuation* succ )
{
    const auto& e = m.events()[ static_cast<std::size_t>( event_position ) ];
    Witness w;
    w.kind = kind;
    w.event = e.def->name;
    w.event_position = event_position;
    w.state = s;
    w.params = p;
    add_state( w, m, "state", s );
    w.valuations.emplace_back( "params", param_assignment( m, e, p ) );
    if ( succ )
    {
        w.successor = *succ;
        add_state( w, m, "successor", *succ );
    }
    return w;
}

inline CheckReport check_partitioning( const Model& m, const CheckOptions& opts = {} )
{
    return scan_states( m, "partitioning", opts, [ & ]( const Valuation& s, ScanChunk& c ) {
        if ( !m.assumption_holds( s ) )
            return;
        ++c.checked;
        auto en = m.enabled_controller_events( s );
        if ( en.size() == 1 )
            return;
        ++c.violations;
        Witness w;
        w.kind = en.empty() ? "no-controller-event-enabled" : "several-controller-events-enabled";
        w.indices = en;
        w.state = s;
        add_state( w, m, "state", s );
        c.witnesses.push_back( std::move( w ) );
    } );
}

inline CheckReport check_invariant_preservation( const Model& m, const CheckOptions& opts = {} )
{
    const bool paired = m.machine().is_paired();
    return scan_states( m, "invariant-preservation", opts, [ & ]( const Valuation& s, ScanChunk& c ) {
        if ( m.is_initial( s ) && ( !m.is_safe( s ) || !m.assumption_holds( s ) ) )
        {
            ++c.violations;
            Witness w;
            w.kind = m.is_safe( s ) ? "initial-state-outside-uncertainty" : "unsafe-initial-state";
            w.state = s;
            add_state( w, m, "state", s );
            c.witnesses.push_back( std::move( w ) );
        }
        if ( !m.is_safe( s ) || !m.assumption_holds( s ) )
            return;
        ++c.checked;
        const auto& events = m.events();
        for ( std::size_t k = 0; k < events.size(); ++k )
            for ( const auto& p : m.guard_solutions( events[ k ], s ) )
                for ( const auto& t : m.action_solutions( events[ k ], s, p ) )
                {
                    bool safe = m.is_safe( t );
                    if ( safe && ( !paired || m.assumption_holds( t ) ) )
                        continue;
                    ++c.violations;
                    c.witnesses.push_back( transition_witness(
                            m, safe ? "successor-outside-uncertainty" : "unsafe-successor", s, static_cast<int>( k ), p, &t ) );
                }
    } );
}

inline CheckReport check_feasibility( const Model& m, const CheckOptions& opts = {} )
{
    return scan_states( m, "feasibility", opts, [ & ]( const Valuation& s, ScanChunk& c ) {
        if ( !m.is_safe( s ) || !m.assumption_holds( s ) )
            return;
        ++c.checked;
        const auto& events = m.events();
        for ( std::size_t k = 0; k < events.size(); ++k )
        {
            if ( events[ k ].def->kind != EventKind::Controller )
                continue;
            for ( const auto& p : m.guard_solutions( events[ k ], s ) )
                if ( !m.action_nonempty( events[ k ], s, p ) )
                {
                    ++c.violations;
                    c.witnesses.push_back( transition_witness( m, "empty-action", s, static_cast<int>( k ), p, nullptr ) );
                }
        }
    } );
}

// Every transition of the paired machine, projected onto the true variables,
// must be a transition of the original machine. The true variables of the
// paired machine are its first n variables, named as in the original.
inline CheckReport check_forward_simulation( const Model& robust, const Model& original, const CheckOptions& opts = {} )
{
    const int n = original.var_count();
    for ( int i = 0; i < n; ++i )
        if ( robust.var_count() < n || robust.machine().vars[ static_cast<std::size_t>( i ) ].name != original.machine().vars[ static_cast<std::size_t>( i ) ].name
             || !( robust.machine().vars[ static_cast<std::size_t>( i ) ].domain == original.machine().vars[ static_cast<std::size_t>( i ) ].domain ) )
            throw ValidationError( "machine '" + robust.machine().name + "' does not extend the variables of '"
                                   + original.machine().name + "'" );
    original.require_enumerable();

    // Successors of the original, per true state.
    std::vector<std::vector<Valuation>> post( original.state_count() );
    auto chunks = parallel_chunks<std::vector<std::vector<Valuation>>>(
            original.state_count(), opts.jobs, [ & ]( std::uint64_t b, std::uint64_t e ) {
                std::vector<std::vector<Valuation>> out;
                for ( auto k = b; k < e; ++k )
                    out.push_back( original.successors( original.state_at( k ) ) );
                return out;
            } );
    std::uint64_t k = 0;
    for ( auto& c : chunks )
        for ( auto& v : c )
            post[ k++ ] = std::move( v );

    auto report = scan_states( robust, "forward-simulation", opts, [ & ]( const Valuation& s, ScanChunk& c ) {
        if ( !robust.assumption_holds( s ) )
            return;
        ++c.checked;
        Valuation truth( s.begin(), s.begin() + n );
        const auto& allowed = post[ original.index_of( truth ) ];
        const auto& events = robust.events();
        for ( std::size_t e = 0; e < events.size(); ++e )
            for ( const auto& p : robust.guard_solutions( events[ e ], s ) )
                for ( const auto& t : robust.action_solutions( events[ e ], s, p ) )
                {
                    Valuation next( t.begin(), t.begin() + n );
                    if ( std::binary_search( allowed.begin(), allowed.end(), next ) )
                        continue;
                    ++c.violations;
                    c.witnesses.push_back( transition_witness( robust, "not-simulated", s, static_cast<int>( e ), p, &t ) );
                }
    } );
    return report;
}

// Re-evaluates a witness from its raw valuations.
inline bool witness_is_genuine( const Model& m, const CheckReport& r, const Witness& w )
{
    const auto* event = w.event_position >= 0 ? &m.events()[ static_cast<std::size_t>( w.event_position ) ] : nullptr;
    if ( !m.in_domain( w.state ) )
        return false;
    if ( r.kind == "partitioning" )
        return m.assumption_holds( w.state ) && m.enabled_controller_events( w.state ) == w.indices
               && w.indices.size() != 1;
    if ( r.kind == "invariant-preservation" )
    {
        if ( !event )
            return m.is_initial( w.state ) && ( !m.is_safe( w.state ) || !m.assumption_holds( w.state ) );
        return m.is_safe( w.state ) && m.assumption_holds( w.state ) && m.guard_holds( *event, w.state, w.params )
               && m.in_domain( w.successor ) && m.action_admits( *event, w.state, w.params, w.successor )
               && ( !m.is_safe( w.successor ) || !m.assumption_holds( w.successor ) );
    }
    if ( r.kind == "feasibility" )
        return event && m.is_safe( w.state ) && m.assumption_holds( w.state ) && m.guard_holds( *event, w.state, w.params )
               && !m.action_nonempty( *event, w.state, w.params );
    return false;
}

} // namespace robustikit
