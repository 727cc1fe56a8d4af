#include "common.hpp"

#include <gtest/gtest.h>

using namespace robustikit;

namespace
{

std::string print_all( const dsl::SourceFile& f )
{
    std::string out;
    for ( const auto& m : f.machines )
        out += dsl::print_machine( m ) + "\n";
    for ( const auto& u : f.uncertainties )
        out += dsl::print_uncertainty( u ) + "\n";
    return out;
}

const std::string small = R"(machine m
  var x : int[0..3]
  var mode : {lo, hi}
  init x = 0 and mode = lo
  safety x <= 3
  plant event drift
    param d : int[-1..1]
    guard 0 <= x + d <= 3
    action x' = x + d and mode' = mode
  ctrl event reset
    guard x = 3
    action x' = 0 and mode' = hi
)";

dsl::Diagnostic first_error( const std::string& text )
{
    auto f = dsl::parse( text );
    for ( const auto& d : f.diagnostics )
        if ( d.severity == dsl::Diagnostic::Severity::Error )
            return d;
    return {};
}

std::string replace( std::string s, const std::string& from, const std::string& to )
{
    s.replace( s.find( from ), from.size(), to );
    return s;
}

} // namespace

TEST( Parse, HeaterFiles )
{
    auto f0 = testutil::load( "ht0.cpm" );
    ASSERT_EQ( f0.machines.size(), 1u );
    EXPECT_EQ( f0.uncertainties.size(), 2u );
    const auto& ht0 = f0.machines[ 0 ];
    EXPECT_EQ( ht0.vars.size(), 2u );
    std::size_t ctrl = 0;
    for ( const auto& e : ht0.events )
        ctrl += e.kind == EventKind::Controller;
    EXPECT_EQ( ctrl, 3u );
    EXPECT_EQ( ht0.events.size(), 4u );

    auto f1 = testutil::load( "ht1.cpm" );
    ASSERT_EQ( f1.uncertainties.size(), 1u );
    const auto& eps = f1.uncertainties[ 0 ];
    ASSERT_EQ( eps.consts.size(), 1u );
    EXPECT_EQ( eps.consts[ 0 ].name, "Delta" );
    EXPECT_EQ( eps.consts[ 0 ].lo, 0 );
    EXPECT_EQ( eps.consts[ 0 ].hi, 20 );
    EXPECT_TRUE( eps.clauses[ 1 ].radius.is_symbolic() );
}

TEST( Parse, ChainedComparisonDesugars )
{
    EXPECT_EQ( dsl::print_expr( dsl::parse_expr( "30 <= temp + dh <= 40" ) ), "30 <= temp + dh and temp + dh <= 40" );
}

TEST( Parse, PrintedExpressionsAreStable )
{
    for ( const char* text : { "a or b and c", "(a or b) and c", "not (x = 1) => y = 2", "x - (y - z) < 3",
                               "forall ~t in [^t - 2 .. ^t + 2] . ~t < 30", "p = bot or p != bot and x' = x + p",
                               "a <=> b", "-x + 3 * y >= 0" } )
    {
        auto once = dsl::print_expr( dsl::parse_expr( text ) );
        EXPECT_EQ( dsl::print_expr( dsl::parse_expr( once ) ), once ) << text;
    }
    EXPECT_EQ( dsl::print_expr( dsl::parse_expr( "(a or b) and c" ) ), "(a or b) and c" );
    EXPECT_EQ( dsl::print_expr( dsl::parse_expr( "x - (y - z)" ) ), "x - (y - z)" );
}

TEST( RoundTrip, ModelFiles )
{
    for ( const char* name : { "ht0.cpm", "ht1.cpm", "ht0_injected.cpm" } )
    {
        auto once = print_all( testutil::load( name ) );
        auto again = print_all( dsl::parse_or_throw( once ) );
        EXPECT_EQ( again, once ) << name;
    }
}

TEST( RoundTrip, GeneratedMachines )
{
    struct Case
    {
        const char* file;
        const char* machine;
        const char* spec;
        Bindings bindings;
    };
    for ( const auto& c : { Case{ "ht0.cpm", "ht0", "eps0", {} }, Case{ "ht0.cpm", "ht0", "eps7", {} },
                            Case{ "ht1.cpm", "ht1", "epsdt", { { "Delta", 5 } } } } )
    {
        auto m = testutil::machine( c.file, c.machine );
        auto u = testutil::uncertainty( c.file, c.spec );
        std::vector<Machine> generated{ inject( m, u, c.bindings ) };
        for ( auto d : { Derivation::Preserving, Derivation::Repurposing } )
            generated.push_back( robustify( d, m, u, c.bindings, { .check = { .jobs = default_jobs() } } ).candidate );
        for ( const auto& g : generated )
        {
            auto text = dsl::print_machine( g );
            auto back = dsl::parse_or_throw( text );
            ASSERT_EQ( back.machines.size(), 1u ) << g.name;
            EXPECT_EQ( dsl::print_machine( back.machines[ 0 ] ), text ) << g.name;
            EXPECT_EQ( back.machines[ 0 ].provenance.method, g.provenance.method );
            EXPECT_EQ( back.machines[ 0 ].provenance.source_machine, c.machine );

            // Same behavior after the round trip.
            Model a( g, c.bindings );
            Model b( back.machines[ 0 ], c.bindings );
            CheckOptions opts{ .jobs = default_jobs() };
            EXPECT_EQ( check_invariant_preservation( a, opts ).verdict, check_invariant_preservation( b, opts ).verdict ) << g.name;
            EXPECT_EQ( check_feasibility( a, opts ).stats.violations, check_feasibility( b, opts ).stats.violations ) << g.name;
        }
    }
}

TEST( RoundTrip, SmallMachineWithEnumsAndPlantEvent )
{
    auto f = dsl::parse_or_throw( small );
    auto once = print_all( f );
    EXPECT_EQ( print_all( dsl::parse_or_throw( once ) ), once );
}

TEST( Diagnostics, UnknownIdentifierHasPosition )
{
    auto d = first_error( replace( small, "guard x = 3", "guard y = 3" ) );
    EXPECT_EQ( d.pos.line, 11 );
    EXPECT_EQ( d.pos.column, 11 );
    EXPECT_NE( d.message.find( "unknown identifier 'y'" ), std::string::npos );
    EXPECT_EQ( d.str( "m.cpm" ).rfind( "m.cpm:11:11: error:", 0 ), 0u );
}

TEST( Diagnostics, PrimeInGuard )
{
    auto d = first_error( replace( small, "guard x = 3", "guard x' = 3" ) );
    EXPECT_EQ( d.pos.line, 11 );
    EXPECT_NE( d.message.find( "primed" ), std::string::npos );
}

TEST( Diagnostics, SyntaxErrorAtEnd )
{
    auto d = first_error( replace( small, "action x' = 0 and mode' = hi", "action x' = 0 and" ) );
    EXPECT_NE( d.message.find( "syntax error" ), std::string::npos );
    EXPECT_GT( d.pos.line, 0 );
}

TEST( Diagnostics, EmptyDomain )
{
    auto d = first_error( replace( small, "int[0..3]", "int[3..0]" ) );
    EXPECT_EQ( d.pos.line, 2 );
    EXPECT_NE( d.message.find( "empty" ), std::string::npos );
}

TEST( Diagnostics, MachineNeedsController )
{
    auto text = small.substr( 0, small.find( "  ctrl event" ) );
    EXPECT_NE( first_error( text ).message.find( "controller event" ), std::string::npos );
}

TEST( Diagnostics, UnknownMachineIsWarning )
{
    auto f = dsl::parse( small + "\nuncertainty u for nowhere\n  x within 1\n" );
    EXPECT_TRUE( f.ok() );
    ASSERT_EQ( f.diagnostics.size(), 1u );
    EXPECT_EQ( f.diagnostics[ 0 ].severity, dsl::Diagnostic::Severity::Warning );
}

TEST( Diagnostics, DuplicateMachine )
{
    auto f = dsl::parse( small + "\n" + small );
    EXPECT_FALSE( f.ok() );
    EXPECT_TRUE( f.machines.empty() );
}

TEST( Diagnostics, ParseOrThrowThrows )
{
    EXPECT_THROW( dsl::parse_or_throw( "machine" ), ValidationError );
}
