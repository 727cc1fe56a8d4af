#include "common.hpp"

#include <gtest/gtest.h>

using namespace robustikit;

namespace
{

Value I( std::int64_t x ) { return Value::integer( x ); }

struct Heater
{
    Machine original;
    UncertaintySpec spec;
    Bindings bindings;
    Model model;
    Uncertainty eps;

    Heater( const std::string& file, const std::string& machine, const std::string& unc, Bindings b = {} )
            : original( testutil::machine( file, machine ) ), spec( testutil::uncertainty( file, unc ) ),
              bindings( std::move( b ) ), model( original, bindings ), eps( model, spec, bindings )
    {
    }
};

UncertaintySpec with_radius( UncertaintySpec spec, std::int64_t r )
{
    for ( auto& c : spec.clauses )
        if ( c.kind == UncertaintyClause::Kind::Within )
            c.radius = { r, "" };
    spec.consts.clear();
    return spec;
}

// (tn, temp, ^tn, ^temp) of a paired heater machine.
Valuation pair_state( const Model& m, const std::string& tn, std::int64_t temp, const std::string& htn, std::int64_t htemp )
{
    return { Value::enumeration( *m.constants().find( tn ) ), I( temp ), Value::enumeration( *m.constants().find( htn ) ),
             I( htemp ) };
}

const CompiledEvent& event_named( const Model& m, const std::string& name )
{
    for ( const auto& e : m.events() )
        if ( e.def->name == name )
            return e;
    throw std::runtime_error( "no event " + name );
}

bool contains( const std::string& text, const std::string& part ) { return text.find( part ) != std::string::npos; }

} // namespace

TEST( Inject, HeaterStructure )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto pm = inject( h.original, h.spec );
    EXPECT_EQ( pm.name, "ht0_eps0" );
    EXPECT_TRUE( pm.is_paired() );
    ASSERT_EQ( pm.vars.size(), 4u );
    EXPECT_EQ( pm.vars[ 2 ].name, "^tn" );
    EXPECT_EQ( pm.vars[ 3 ].name, "^temp" );
    EXPECT_EQ( dsl::print_expr( pm.find_event( "ctrl_heat" )->guard ), "^temp < 30 and (30 <= ^temp + dh and ^temp + dh <= 40)" );
    EXPECT_EQ( dsl::print_expr( pm.find_event( "plant_change_temp" )->guard ), "true" );
    EXPECT_EQ( dsl::print_expr( *pm.uncertainty ), "tn = ^tn and ^temp - 3 <= temp and temp <= ^temp + 3" );
    EXPECT_TRUE( contains( dsl::print_expr( pm.find_event( "ctrl_heat" )->action ),
                           "tn' = ^tn' and ^temp' - 3 <= temp' and temp' <= ^temp' + 3" ) );
    // Safety reads only true variables.
    for ( const auto& [ name, primed ] : free_refs( pm.safety ) )
        EXPECT_FALSE( is_hat_name( name ) );
    EXPECT_TRUE( contains( dsl::print_machine( pm ), "// events may violate this" ) );
}

TEST( Inject, KnownCounterexample )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    Model pm( inject( h.original, h.spec ) );
    CheckOptions all;
    all.max_witnesses = 0;
    auto r = check_invariant_preservation( pm, all );
    ASSERT_TRUE( r.fails() );
    bool known = false;
    for ( const auto& w : r.witnesses )
    {
        ASSERT_TRUE( witness_is_genuine( pm, r, w ) ) << w.text();
        if ( w.text() == "unsafe-successor event=ctrl_heat state=(tn=c, temp=32) perceived=(^tn=c, ^temp=29) "
                         "params=(dh=11) successor=(tn=c, temp=43) perceived_successor=(^tn=c, ^temp=40)" )
            known = true;
    }
    EXPECT_TRUE( known );
    // Some witness starts from a safe true temperature perceived as too cold
    // and overshoots.
    bool overshoot = std::any_of( r.witnesses.begin(), r.witnesses.end(), []( const Witness& w ) {
        return w.event == "ctrl_heat" && w.state[ 1 ].v >= 30 && w.state[ 1 ].v <= 40 && w.state[ 3 ].v < 30
               && w.successor[ 1 ].v > 40;
    } );
    EXPECT_TRUE( overshoot );
}

TEST( Inject, UncertaintyInvariantHoldsOnEveryTransition )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    Model pm( inject( h.original, h.spec ) );
    std::uint64_t transitions = 0;
    for ( std::uint64_t k = 0; k < pm.state_count(); ++k )
    {
        auto s = pm.state_at( k );
        if ( !pm.assumption_holds( s ) )
            continue;
        for ( const auto& t : pm.successors( s ) )
        {
            ++transitions;
            ASSERT_TRUE( pm.assumption_holds( t ) ) << pm.format_state( s ) << " -> " << pm.format_state( t );
        }
    }
    EXPECT_GT( transitions, 0u );
}

TEST( Inject, RadiusZeroIsBisimilar )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    Model pm( inject( h.original, with_radius( h.spec, 0 ) ) );
    for ( std::int64_t t = -20; t <= 80; t += 3 )
        for ( const std::string tn : { "p", "c" } )
        {
            auto s = pair_state( pm, tn, t, tn, t );
            std::set<Valuation> projected;
            for ( const auto& n : pm.successors( s ) )
            {
                ASSERT_EQ( n[ 0 ], n[ 2 ] );
                ASSERT_EQ( n[ 1 ], n[ 3 ] );
                projected.insert( { n[ 0 ], n[ 1 ] } );
            }
            auto orig = h.model.successors( { s[ 0 ], s[ 1 ] } );
            EXPECT_EQ( std::vector<Valuation>( projected.begin(), projected.end() ), orig );
        }
}

TEST( Inject, Preconditions )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto broken = h.original;
    std::erase_if( broken.events, []( const EventDef& e ) { return e.name == "ctrl_cool"; } );
    EXPECT_THROW( inject( broken, h.spec ), PartitioningViolation );

    auto src = dsl::parse_or_throw( R"(
machine m
  var x : int[0..5]
  ctrl event noop
    action x' = x
uncertainty lower for m
  x any
  relation x < ^x
)" );
    EXPECT_THROW( inject( *src.machine( "m" ), *src.uncertainty( "lower" ) ), ValidationError );
    auto pm = inject( h.original, h.spec );
    EXPECT_THROW( inject( pm, h.spec ), ValidationError );
    EXPECT_TRUE( is_injection_of( pm, h.original, h.spec ) );
    pm.events.pop_back();
    EXPECT_FALSE( is_injection_of( pm, h.original, h.spec ) );
    EXPECT_THROW( robustify_preserving( pm, h.original, h.spec ), ValidationError );
}

TEST( Naming, HeteroEvents )
{
    EXPECT_EQ( hetero_name( { "ctrl_heat", "ctrl_keep_safe" } ), "ctrl_heat_keep_safe_hetero" );
    EXPECT_EQ( hetero_name( { "ctrl_keep_safe_eco", "ctrl_heat" } ), "ctrl_heat_keep_safe_eco_hetero" );
    EXPECT_EQ( hetero_name( { "up", "down" } ), "down_up_hetero" );
    EXPECT_EQ( hetero_name( { "ctrl_heat" } ), "ctrl_heat" );
    EXPECT_EQ( all_compartments( 3 ), ( std::vector<IndexSet>{ { 1 }, { 2 }, { 3 }, { 1, 2 }, { 1, 3 }, { 2, 3 }, { 1, 2, 3 } } ) );
}

TEST( Vacuity, HeaterCompartments )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    EXPECT_TRUE( is_vacuous( { 1, 2, 3 }, h.model, h.eps ).vacuous );
    EXPECT_TRUE( is_vacuous( { 1, 3 }, h.model, h.eps ).vacuous );
    auto one = is_vacuous( { 1 }, h.model, h.eps );
    EXPECT_FALSE( one.vacuous );

    Uncertainty eps7( h.model, testutil::uncertainty( "ht0.cpm", "eps7" ) );
    auto all = is_vacuous( { 1, 2, 3 }, h.model, eps7 );
    ASSERT_FALSE( all.vacuous );
    std::set<std::int64_t> temps;
    for ( const auto& w : all.witnesses )
    {
        EXPECT_EQ( h.model.format_value( w[ 0 ] ).size(), 1u );
        temps.insert( w[ 1 ].v );
    }
    // ^temp - 7 < 30 and 40 < ^temp + 7, for both modes.
    EXPECT_EQ( temps, ( std::set<std::int64_t>{ 34, 35, 36 } ) );
}

TEST( Preserving, HeaterSucceeds )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto out = robustify_preserving( h.original, h.spec );
    EXPECT_TRUE( out.condition.holds() );
    ASSERT_TRUE( out.machine );
    EXPECT_EQ( out.machine->name, "ht0_eps0_pR" );
    EXPECT_EQ( out.pruned, ( std::vector<IndexSet>{ { 1, 3 }, { 1, 2, 3 } } ) );
    EXPECT_EQ( out.retained, ( std::vector<IndexSet>{ { 1 }, { 2 }, { 3 }, { 1, 2 }, { 2, 3 } } ) );
    std::vector<std::string> names;
    for ( const auto& e : out.machine->events )
        names.push_back( e.name );
    EXPECT_EQ( names, ( std::vector<std::string>{ "plant_change_temp", "ctrl_heat", "ctrl_keep_safe", "ctrl_cool",
                                                  "ctrl_heat_keep_safe_hetero", "ctrl_cool_keep_safe_hetero" } ) );

    Model pr( *out.machine );
    EXPECT_TRUE( check_invariant_preservation( pr ).holds() );
    EXPECT_TRUE( check_feasibility( pr ).holds() );
    EXPECT_TRUE( check_partitioning( pr ).holds() );
    EXPECT_TRUE( check_forward_simulation( pr, h.model ).holds() );
}

TEST( Preserving, ParameterWindowAt29 )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto out = robustify_preserving( h.original, h.spec );
    Model pr( *out.machine );
    const auto& hetero = event_named( pr, "ctrl_heat_keep_safe_hetero" );
    for ( std::int64_t t = 26; t <= 32; ++t )
    {
        auto params = pr.guard_solutions( hetero, pair_state( pr, "c", t, "c", 29 ) );
        ParamSet expected;
        for ( std::int64_t d = 4; d <= 8; ++d )
            expected.push_back( { I( d ), I( d ) } );
        EXPECT_EQ( params, expected ) << "temp=" << t;
    }
    // 33 - ^temp <= dh = dt <= 37 - ^temp across the compartment 27 <= ^temp < 33.
    for ( std::int64_t ht = -20; ht <= 80; ++ht )
    {
        auto params = pr.guard_solutions( hetero, pair_state( pr, "c", std::clamp<std::int64_t>( ht, -20, 80 ), "c", ht ) );
        if ( ht < 27 || ht >= 33 )
        {
            EXPECT_TRUE( params.empty() ) << ht;
            continue;
        }
        ParamSet expected;
        for ( std::int64_t d = 33 - ht; d <= 37 - ht; ++d )
            expected.push_back( { I( d ), I( d ) } );
        EXPECT_EQ( params, expected ) << ht;
    }
}

TEST( Preserving, BottomNeverSatisfiesGuard )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto out = robustify_preserving( h.original, h.spec );
    Model pr( *out.machine );
    for ( const auto& e : pr.events() )
    {
        if ( e.def->kind != EventKind::Controller )
            continue;
        for ( std::uint64_t k = 0; k < pr.state_count(); k += 7 )
        {
            auto s = pr.state_at( k );
            if ( !pr.assumption_holds( s ) )
                continue;
            for ( const auto& p : pr.guard_solutions( e, s ) )
                for ( const auto& v : p )
                    ASSERT_FALSE( v.is_bottom() ) << e.def->name;
            // and bot tuples are rejected when checked directly
            Valuation bots( e.params.size(), Value::bottom() );
            EXPECT_FALSE( pr.guard_holds( e, s, bots ) );
        }
    }
}

TEST( Preserving, GeneratedGuardShape )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto out = robustify_preserving( h.original, h.spec );
    const auto* e = out.machine->find_event( "ctrl_heat_keep_safe_hetero" );
    ASSERT_TRUE( e );
    EXPECT_EQ( e->sources, ( std::vector<std::string>{ "ctrl_heat", "ctrl_keep_safe" } ) );
    ASSERT_EQ( e->params.size(), 2u );
    EXPECT_EQ( e->params[ 0 ].name, "dh" );
    EXPECT_EQ( e->params[ 1 ].name, "dt" );
    EXPECT_TRUE( e->params[ 0 ].allows_bottom );
    auto guard = dsl::print_expr( e->guard );
    EXPECT_TRUE( contains( guard, "forall ~temp in [^temp - 3 .. ^temp + 3] ." ) ) << guard;
    EXPECT_TRUE( contains( guard, "exists ~temp in [^temp - 3 .. ^temp + 3] . ~temp < 30" ) ) << guard;
    EXPECT_TRUE( contains( guard, "~temp + dh = ~temp + dt" ) ) << guard;
}

TEST( Repurposing, HeaterSucceeds )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    auto out = robustify_repurposing( h.original, h.spec );
    EXPECT_TRUE( out.condition.holds() );
    ASSERT_TRUE( out.machine );
    Model rr( *out.machine );
    EXPECT_TRUE( check_invariant_preservation( rr ).holds() );
    EXPECT_TRUE( check_feasibility( rr ).holds() );
    EXPECT_TRUE( check_partitioning( rr ).holds() );
    EXPECT_TRUE( check_forward_simulation( rr, h.model ).holds() );

    // Whenever the heterogeneous event fires with some dh, every potential
    // true temperature is brought into [30,40].
    const auto& hetero = event_named( rr, "ctrl_heat_keep_safe_hetero" );
    std::size_t fired = 0;
    for ( std::int64_t ht = -20; ht <= 80; ++ht )
        for ( std::int64_t t = std::max<std::int64_t>( -20, ht - 3 ); t <= std::min<std::int64_t>( 80, ht + 3 ); ++t )
            for ( const auto& p : rr.guard_solutions( hetero, pair_state( rr, "c", t, "c", ht ) ) )
            {
                if ( p[ 0 ].is_bottom() )
                    continue;
                ++fired;
                for ( std::int64_t tt = std::max<std::int64_t>( -20, ht - 3 ); tt <= std::min<std::int64_t>( 80, ht + 3 ); ++tt )
                {
                    EXPECT_LE( 30, tt + p[ 0 ].v );
                    EXPECT_LE( tt + p[ 0 ].v, 40 );
                }
            }
    EXPECT_GT( fired, 0u );
    auto guard = dsl::print_expr( out.machine->find_event( "ctrl_heat_keep_safe_hetero" )->guard );
    EXPECT_TRUE( contains( guard, "30 <= ~temp + dh and ~temp + dh <= 40" ) ) << guard;
}

TEST( Conditions, CaseStudyThresholds )
{
    for ( std::int64_t d = 0; d <= 6; ++d )
    {
        Heater h( "ht1.cpm", "ht1", "epsdt", { { "Delta", d } } );
        EXPECT_EQ( thm1_condition( h.model, h.eps ).holds(), d <= 2 ) << d;
        EXPECT_EQ( thm2_condition( h.model, h.eps ).holds(), d <= 5 ) << d;
    }
    Heater h6( "ht1.cpm", "ht1", "epsdt", { { "Delta", 6 } } );
    auto r = thm2_condition( h6.model, h6.eps );
    std::vector<IndexSet> failing;
    for ( const auto& w : r.witnesses )
        failing.push_back( w.indices );
    EXPECT_NE( std::find( failing.begin(), failing.end(), IndexSet{ 1, 2 } ), failing.end() );
    EXPECT_EQ( r.witnesses[ 0 ].text(), "no-safe-parameter event=ctrl_heat indices={1} state=(tn=p, temp=-20) "
                                        "perceived=(^tn=p, ^temp=-15)" ); // ball clipped to [-20,-9]
}

TEST( Conditions, UnboundRadiusIsUnknown )
{
    Heater h( "ht1.cpm", "ht1", "epsdt" );
    auto r = thm1_condition( h.model, h.eps );
    EXPECT_EQ( r.verdict, Verdict::Unknown );
    EXPECT_TRUE( contains( r.reason, "Delta" ) );
    auto out = robustify_preserving( h.original, h.spec );
    EXPECT_FALSE( out.machine );
    EXPECT_TRUE( out.pruned.empty() );
    EXPECT_EQ( out.retained.size(), 7u );
}

TEST( Conditions, RadiusZeroHolds )
{
    Heater h( "ht1.cpm", "ht1", "epsdt", { { "Delta", 0 } } );
    EXPECT_TRUE( thm1_condition( h.model, h.eps ).holds() );
    EXPECT_TRUE( thm2_condition( h.model, h.eps ).holds() );
}

// The preserving construction at Δ=3: the condition fails, and the generated
// machine loses partitioning; feasibility holds because no tuple with an
// empty common action passes the guard.
TEST( Preserving, CaseStudyAtThree )
{
    Heater h( "ht1.cpm", "ht1", "epsdt", { { "Delta", 3 } } );
    auto out = robustify_preserving( h.original, h.spec, h.bindings );
    EXPECT_TRUE( out.condition.fails() );
    EXPECT_FALSE( out.machine );
    Model pr( out.candidate, h.bindings );
    auto part = check_partitioning( pr );
    EXPECT_TRUE( part.fails() );
    ASSERT_FALSE( part.witnesses.empty() );
    EXPECT_TRUE( part.witnesses[ 0 ].indices.empty() );
    EXPECT_TRUE( check_feasibility( pr ).holds() );
}

TEST( Repurposing, CaseStudyLosesForwardSimulation )
{
    Heater h( "ht1.cpm", "ht1", "epsdt", { { "Delta", 5 } } );
    auto out = robustify_repurposing( h.original, h.spec, h.bindings );
    ASSERT_TRUE( out.machine );
    Model rr( *out.machine, h.bindings );
    EXPECT_TRUE( check_invariant_preservation( rr ).holds() );
    EXPECT_TRUE( check_feasibility( rr ).holds() );
    CheckOptions all;
    all.max_witnesses = 0;
    auto fs = check_forward_simulation( rr, h.model, all );
    ASSERT_TRUE( fs.fails() );
    // A state the eco keep_safe would only move by 4 degrees is moved further.
    bool beyond = false;
    for ( const auto& w : fs.witnesses )
    {
        auto from = w.state[ 1 ].v;
        auto to = w.successor[ 1 ].v;
        if ( from >= 30 && from <= 40 && std::abs( to - from ) > 4 )
            beyond = true;
    }
    EXPECT_TRUE( beyond );
}

TEST( Pruning, TransitionRelationUnchanged )
{
    Heater h( "ht0.cpm", "ht0", "eps0" );
    RobustifyOptions keep;
    keep.prune = false;
    for ( auto method : { Derivation::Preserving, Derivation::Repurposing } )
    {
        auto pruned = robustify( method, h.original, h.spec, {}, {} );
        auto full = robustify( method, h.original, h.spec, {}, keep );
        EXPECT_EQ( full.candidate.events.size(), 1u + 7u );
        EXPECT_LT( pruned.candidate.events.size(), full.candidate.events.size() );
        Model a( pruned.candidate );
        Model b( full.candidate );
        for ( std::uint64_t k = 0; k < a.state_count(); ++k )
        {
            auto s = a.state_at( k );
            if ( !a.assumption_holds( s ) )
                continue;
            ASSERT_EQ( a.successors( s ), b.successors( s ) ) << a.format_state( s );
        }
    }
}
