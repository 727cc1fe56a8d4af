#include "common.hpp"

#include <gtest/gtest.h>

using namespace robustikit;
using testutil::heater_state;

namespace
{

Value I( std::int64_t x ) { return Value::integer( x ); }

std::vector<std::int64_t> temps( const std::vector<Valuation>& states )
{
    std::vector<std::int64_t> out;
    for ( const auto& s : states )
        out.push_back( s[ 1 ].v );
    return out;
}

std::vector<std::int64_t> range( std::int64_t lo, std::int64_t hi )
{
    std::vector<std::int64_t> out;
    for ( auto x = lo; x <= hi; ++x )
        out.push_back( x );
    return out;
}

} // namespace

TEST( Eval, SafetyBounds )
{
    auto e = dsl::parse_expr( "30 <= temp and temp <= 40" );
    EXPECT_EQ( eval( e, { { "temp", I( 35 ) } } ), Value::boolean( true ) );
    EXPECT_EQ( eval( e, { { "temp", I( 41 ) } } ), Value::boolean( false ) );
}

TEST( Eval, PrimedArithmetic )
{
    auto e = dsl::parse_expr( "temp' = temp + dh" );
    EXPECT_EQ( eval( e, { { "temp", I( 29 ) }, { "dh", I( 4 ) }, { "temp'", I( 33 ) } } ), Value::boolean( true ) );
}

TEST( Eval, BoundedQuantifier )
{
    auto e = dsl::parse_expr( "forall t in [26 .. 32] . 30 <= t + 4 <= 40" );
    EXPECT_EQ( eval( e, {} ), Value::boolean( true ) );
    auto f = dsl::parse_expr( "forall t in [26 .. 32] . 30 <= t + 3 <= 40" );
    EXPECT_EQ( eval( f, {} ), Value::boolean( false ) );
    auto g = dsl::parse_expr( "exists t in [1 .. 0] . true" );
    EXPECT_EQ( eval( g, {} ), Value::boolean( false ) );
}

TEST( Eval, Errors )
{
    EXPECT_THROW( eval( dsl::parse_expr( "x + 1 = 2" ), {} ), ValidationError );
    ConstantTable t;
    t.add( "p" );
    EXPECT_THROW( eval( dsl::parse_expr( "p + 1 = 2" ), {}, t ), ValidationError );
    EXPECT_THROW( eval( dsl::parse_expr( "x + 1 = 2" ), { { "x", Value::enumeration( 0 ) } }, t ), ValidationError );
    Limits small;
    small.quantifier_cap = 10;
    EXPECT_THROW( eval( dsl::parse_expr( "forall t in [0 .. 100] . t >= 0" ), {}, {}, small ), EvalError );
    EXPECT_THROW( eval( dsl::parse_expr( "x * x = 0" ), { { "x", I( INT64_MAX ) } } ), EvalError );
}

TEST( States, ProductSizes )
{
    auto src = dsl::parse_or_throw( R"(
machine small
  var tn : {p, c}
  var temp : int[30..32]
  ctrl event noop
    action tn' = tn and temp' = temp
machine single
  var temp : int[0..0]
  ctrl event noop
    action temp' = temp
)" );
    Model small( *src.machine( "small" ) );
    auto states = small.enumerate_states();
    ASSERT_EQ( states.size(), 6u );
    EXPECT_EQ( small.format_state( states.front() ), "(tn=p, temp=30)" );
    EXPECT_EQ( small.format_state( states[ 1 ] ), "(tn=p, temp=31)" );
    EXPECT_EQ( small.format_state( states.back() ), "(tn=c, temp=32)" );
    Model single( *src.machine( "single" ) );
    EXPECT_EQ( single.enumerate_states().size(), 1u );

    Model ht0( testutil::machine( "ht0.cpm", "ht0" ) );
    auto all = ht0.enumerate_states();
    EXPECT_EQ( all.size(), 202u );
    EXPECT_TRUE( std::is_sorted( all.begin(), all.end() ) );
    std::set<Valuation> unique( all.begin(), all.end() );
    EXPECT_EQ( unique.size(), 202u );
}

TEST( States, CapExceeded )
{
    Limits l;
    l.state_cap = 100;
    Model ht0( testutil::machine( "ht0.cpm", "ht0" ), {}, l );
    EXPECT_THROW( (void)ht0.enumerate_states(), CapExceeded );
}

TEST( EpsBall, Examples )
{
    Model ht0( testutil::machine( "ht0.cpm", "ht0" ) );
    Uncertainty eps0( ht0, testutil::uncertainty( "ht0.cpm", "eps0" ) );
    auto ball = eps0.ball( heater_state( ht0, "c", 29 ) );
    EXPECT_EQ( temps( ball ), range( 26, 32 ) );
    for ( const auto& s : ball )
        EXPECT_EQ( ht0.format_value( s[ 0 ] ), "c" );

    auto clipped = eps0.ball( heater_state( ht0, "c", -19 ) );
    EXPECT_EQ( temps( clipped ), range( -20, -16 ) );

    UncertaintySpec exact;
    exact.name = "exact";
    exact.machine = "ht0";
    Uncertainty id( ht0, exact );
    auto s = heater_state( ht0, "p", 50 );
    EXPECT_EQ( id.ball( s ), std::vector<Valuation>{ s } );
}

TEST( EpsBall, SymbolicRadiusUnbound )
{
    Model ht1( testutil::machine( "ht1.cpm", "ht1" ) );
    auto spec = testutil::uncertainty( "ht1.cpm", "epsdt" );
    Uncertainty unbound( ht1, spec );
    EXPECT_THROW( (void)unbound.ball( heater_state( ht1, "c", 30 ) ), EvalError );
    Uncertainty bound( ht1, spec, { { "Delta", 2 } } );
    EXPECT_EQ( temps( bound.ball( heater_state( ht1, "c", 30 ) ) ), range( 28, 32 ) );
    EXPECT_THROW( Uncertainty( ht1, spec, { { "Delta", 21 } } ), ValidationError );
}

TEST( EpsBall, RelationFormAndReflexivity )
{
    auto src = dsl::parse_or_throw( R"(
machine m
  var x : int[0..5]
  ctrl event noop
    action x' = x
uncertainty low for m
  x any
  relation x <= ^x
uncertainty broken for m
  x any
  relation x < ^x
)" );
    Model m( *src.machine( "m" ) );
    Uncertainty low( m, *src.uncertainty( "low" ) );
    EXPECT_EQ( low.ball( { I( 3 ) } ), ( std::vector<Valuation>{ { I( 0 ) }, { I( 1 ) }, { I( 2 ) }, { I( 3 ) } } ) );
    EXPECT_FALSE( low.reflexivity_violation() );
    Uncertainty broken( m, *src.uncertainty( "broken" ) );
    ASSERT_TRUE( broken.reflexivity_violation() );
    EXPECT_EQ( ( *broken.reflexivity_violation() )[ 0 ], I( 0 ) );
}

TEST( Successors, HeaterExamples )
{
    Model ht0( testutil::machine( "ht0.cpm", "ht0" ) );
    const auto& keep_safe = ht0.controller( 2 );
    auto succ = ht0.event_successors( keep_safe, heater_state( ht0, "c", 35 ) );
    EXPECT_EQ( temps( succ ), range( 30, 40 ) );

    const auto& heat = ht0.controller( 1 );
    auto heated = ht0.event_successors( heat, heater_state( ht0, "c", 25 ) );
    EXPECT_EQ( temps( heated ), range( 30, 40 ) );
    EXPECT_EQ( ht0.guard_solutions( heat, heater_state( ht0, "c", 25 ) ).size(), 11u );

    // Plant moves anywhere within 15 degrees, clipped to the domain.
    auto all = ht0.successors( heater_state( ht0, "c", 75 ) );
    std::size_t plant = 0;
    for ( const auto& s : all )
        if ( ht0.format_value( s[ 0 ] ) == "p" )
            ++plant;
    EXPECT_EQ( plant, 21u ); // 60..80
}

TEST( Successors, NoEnabledEvent )
{
    auto src = dsl::parse_or_throw( R"(
machine m
  var x : int[0..3]
  ctrl event never
    guard false
    action x' = x
)" );
    Model m( *src.machine( "m" ) );
    EXPECT_TRUE( m.successors( { I( 1 ) } ).empty() );
}

TEST( Successors, RelationalAction )
{
    auto src = dsl::parse_or_throw( R"(
machine m
  var x : int[0..9]
  var y : int[0..9]
  ctrl event spread
    param d : int[0..2]
    guard x + d <= 9
    action x <= x' and x' <= x + d and (y' = x' or y' = 9 - x')
)" );
    Model m( *src.machine( "m" ) );
    auto succ = m.successors( { I( 4 ), I( 0 ) } );
    // x' in 4..6, y' in {x', 9-x'}
    EXPECT_EQ( succ.size(), 6u );
    // Brute force over the primed product.
    const auto& e = m.controller( 1 );
    std::set<Valuation> brute;
    for ( const auto& p : m.guard_solutions( e, { I( 4 ), I( 0 ) } ) )
        for ( auto a = 0; a <= 9; ++a )
            for ( auto b = 0; b <= 9; ++b )
                if ( m.action_admits( e, { I( 4 ), I( 0 ) }, p, { I( a ), I( b ) } ) )
                    brute.insert( { I( a ), I( b ) } );
    EXPECT_EQ( std::vector<Valuation>( brute.begin(), brute.end() ), succ );
}

TEST( Enabled, HeaterRegions )
{
    Model ht0( testutil::machine( "ht0.cpm", "ht0" ) );
    EXPECT_EQ( ht0.enabled_controller_events( heater_state( ht0, "c", 25 ) ), std::vector<int>{ 1 } );
    EXPECT_EQ( ht0.enabled_controller_events( heater_state( ht0, "c", 35 ) ), std::vector<int>{ 2 } );
    EXPECT_EQ( ht0.enabled_controller_events( heater_state( ht0, "c", 45 ) ), std::vector<int>{ 3 } );
    EXPECT_EQ( ht0.enabled_controller_events( heater_state( ht0, "p", 40 ) ), std::vector<int>{ 2 } );
}

TEST( Validation, MachineInvariants )
{
    auto bad = []( const std::string& text ) {
        auto f = dsl::parse( text );
        EXPECT_FALSE( f.ok() ) << text;
        return f.diagnostics.empty() ? std::string() : f.diagnostics.front().message;
    };
    EXPECT_EQ( bad( "machine X\n" ), "machine must declare at least one controller event" );
    EXPECT_NE( bad( "machine X\n var x : int[0..3]\n ctrl event e\n guard x' = 1\n action x' = x\n" )
                       .find( "primed reference in guard" ),
               std::string::npos );
    EXPECT_NE( bad( "machine X\n var x : int[0..3]\n var y : int[0..3]\n ctrl event e\n action x' = x\n" )
                       .find( "'y' unconstrained" ),
               std::string::npos );
    EXPECT_NE( bad( "machine X\n var x : int[3..0]\n ctrl event e\n action x' = x\n" ).find( "invalid domain" ),
               std::string::npos );
    EXPECT_NE( bad( "machine X\n var x : int[0..3]\n ctrl event e\n action x' = z\n" ).find( "unknown identifier 'z'" ),
               std::string::npos );
}
