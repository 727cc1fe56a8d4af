// One line per acceptance criterion. Exit status 0 iff every line passes.

#include "oracle.hpp"
#include "robustikit/explore/sweep.hpp"
#include "robustikit/io/json.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace robustikit;
using io::Json;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
    Json doc; // deterministic part of the result; timing is added outside
};

struct Heater
{
    Machine ht0;
    UncertaintySpec eps0;
    UncertaintySpec eps7;
    Machine ht1;
    UncertaintySpec epsdt;
};

dsl::SourceFile load( const std::string& name )
{
    auto path = std::string( ROBUSTIKIT_MODELS ) + "/" + name;
    std::ifstream in( path );
    std::stringstream ss;
    ss << in.rdbuf();
    return dsl::parse_or_throw( ss.str(), path );
}

Heater heater()
{
    auto f0 = load( "ht0.cpm" );
    auto f1 = load( "ht1.cpm" );
    return { *f0.machine( "ht0" ), *f0.uncertainty( "eps0" ), *f0.uncertainty( "eps7" ), *f1.machine( "ht1" ),
             *f1.uncertainty( "epsdt" ) };
}

Valuation pair_state( const Model& m, const std::string& tn, std::int64_t temp, const std::string& htn, std::int64_t htemp )
{
    return { Value::enumeration( *m.constants().find( tn ) ), Value::integer( temp ),
             Value::enumeration( *m.constants().find( htn ) ), Value::integer( htemp ) };
}

const CompiledEvent* event_named( const Model& m, const std::string& name )
{
    for ( const auto& e : m.events() )
        if ( e.def->name == name )
            return &e;
    return nullptr;
}

Json reports( const std::vector<CheckReport>& rs )
{
    Json out = Json::array();
    for ( const auto& r : rs )
        out.push_back( io::report( r ) );
    return out;
}

bool all_hold( const std::vector<CheckReport>& rs )
{
    return std::all_of( rs.begin(), rs.end(), []( const CheckReport& r ) { return r.holds(); } );
}

std::string verdicts( const std::vector<CheckReport>& rs )
{
    std::string out;
    for ( const auto& r : rs )
        out += ( out.empty() ? "" : ", " ) + r.kind + " " + verdict_name( r.verdict );
    return out;
}

Outcome baseline( const Heater& h, const CheckOptions& opts )
{
    Model m( h.ht0 );
    std::vector<CheckReport> rs{ check_partitioning( m, opts ), check_invariant_preservation( m, opts ),
                                 check_feasibility( m, opts ) };
    return { all_hold( rs ), verdicts( rs ), { { "checks", reports( rs ) } } };
}

Outcome injection( const Heater& h, const CheckOptions& opts )
{
    Model pm( inject( h.ht0, h.eps0 ) );
    auto all = opts;
    all.max_witnesses = 0;
    auto r = check_invariant_preservation( pm, all );
    std::size_t genuine = 0;
    std::size_t overshoot = 0;
    bool known = false;
    std::optional<Witness> shown;
    for ( const auto& w : r.witnesses )
    {
        if ( !witness_is_genuine( pm, r, w ) )
            continue;
        ++genuine;
        auto temp = w.state[ 1 ].v;
        if ( w.event == "ctrl_heat" && 30 <= temp && temp <= 40 && w.state[ 3 ].v < 30 && w.successor[ 1 ].v > 40 )
        {
            ++overshoot;
            if ( !shown )
                shown = w;
        }
        known = known
                || ( w.event == "ctrl_heat" && temp == 32 && w.state[ 3 ].v == 29 && w.params[ 0 ].v == 11 && w.successor[ 1 ].v == 43 );
    }
    bool pass = r.fails() && genuine == r.witnesses.size() && overshoot > 0 && known;
    std::ostringstream d;
    d << "preservation " << verdict_name( r.verdict ) << ", " << genuine << "/" << r.witnesses.size() << " witnesses re-checked, "
      << overshoot << " overshoot from [30,40], temp=32 ^temp=29 dh=11 -> 43 " << ( known ? "found" : "missing" );
    Json doc{ { "verdict", verdict_name( r.verdict ) }, { "witnesses", r.witnesses.size() }, { "genuine", genuine },
              { "overshoot", overshoot }, { "known_witness", known } };
    doc[ "first_overshoot" ] = shown ? io::witness( *shown ) : Json( nullptr );
    return { pass, d.str(), doc };
}

Outcome preserving( const Heater& h, const CheckOptions& opts )
{
    auto out = robustify( Derivation::Preserving, h.ht0, h.eps0, {}, { .check = opts } );
    if ( !out.machine )
        return { false, "condition " + std::string( verdict_name( out.condition.verdict ) ), io::outcome( out ) };
    Model pr( *out.machine );
    Model original( h.ht0 );
    std::vector<CheckReport> rs{ check_invariant_preservation( pr, opts ), check_feasibility( pr, opts ),
                                 check_partitioning( pr, opts ), check_forward_simulation( pr, original, opts ) };
    return { all_hold( rs ), verdicts( rs ), { { "outcome", io::outcome( out ) }, { "checks", reports( rs ) } } };
}

Outcome window( const Heater& h, const CheckOptions& opts )
{
    auto out = robustify( Derivation::Preserving, h.ht0, h.eps0, {}, { .check = opts } );
    Model pr( out.candidate );
    const auto* e = event_named( pr, "ctrl_heat_keep_safe_hetero" );
    if ( !e )
        return { false, "no event for {1,2}", nullptr };
    ParamSet expected;
    for ( std::int64_t d = 4; d <= 8; ++d )
        expected.push_back( { Value::integer( d ), Value::integer( d ) } );
    bool pass = true;
    std::size_t states = 0;
    for ( const char* mode : { "p", "c" } )
        for ( std::int64_t t = 26; t <= 32; ++t )
        {
            ++states;
            pass = pass && pr.guard_solutions( *e, pair_state( pr, mode, t, mode, 29 ) ) == expected;
        }
    Json params = Json::array();
    for ( const auto& p : pr.guard_solutions( *e, pair_state( pr, "c", 29, "c", 29 ) ) )
        params.push_back( { p[ 0 ].v, p[ 1 ].v } );
    return { pass, "dh = dt in [4,8] at ^temp=29 across " + std::to_string( states ) + " true states", { { "params", params } } };
}

Outcome vacuity( const Heater& h, const CheckOptions& opts )
{
    Model m( h.ht0 );
    Uncertainty eps0( m, h.eps0 );
    Uncertainty eps7( m, h.eps7 );
    auto at3 = is_vacuous( { 1, 2, 3 }, m, eps0, opts.jobs );
    auto at7 = is_vacuous( { 1, 2, 3 }, m, eps7, opts.jobs );
    Controller c( m, &eps7 );
    bool spans = !at7.witnesses.empty();
    bool has35 = false;
    Json temps = Json::array();
    for ( const auto& w : at7.witnesses )
    {
        spans = spans && c.compartment( w ) == IndexSet{ 1, 2, 3 };
        has35 = has35 || w[ 1 ].v == 35;
        temps.push_back( m.format_state( w ) );
    }
    bool pass = at3.vacuous && !at7.vacuous && spans && has35;
    return { pass,
             std::string( "radius 3 " ) + ( at3.vacuous ? "vacuous" : "not vacuous" ) + ", radius 7 "
                     + std::to_string( at7.witnesses.size() ) + " witnesses, ^temp=35 " + ( has35 ? "among them" : "missing" ),
             { { "vacuous_at_3", at3.vacuous }, { "vacuous_at_7", at7.vacuous }, { "witnesses_at_7", temps } } };
}

Outcome repurposing( const Heater& h, const CheckOptions& opts )
{
    auto out = robustify( Derivation::Repurposing, h.ht0, h.eps0, {}, { .check = opts } );
    if ( !out.machine )
        return { false, "condition " + std::string( verdict_name( out.condition.verdict ) ), io::outcome( out ) };
    Model rr( *out.machine );
    std::vector<CheckReport> rs{ check_invariant_preservation( rr, opts ), check_feasibility( rr, opts ) };
    const auto* e = event_named( rr, "ctrl_heat_keep_safe_hetero" );
    std::size_t fired = 0;
    bool entails = e != nullptr;
    for ( std::int64_t ht = -20; e && ht <= 80; ++ht )
        for ( const char* mode : { "p", "c" } )
            for ( std::int64_t t = std::max<std::int64_t>( -20, ht - 3 ); t <= std::min<std::int64_t>( 80, ht + 3 ); ++t )
                for ( const auto& p : rr.guard_solutions( *e, pair_state( rr, mode, t, mode, ht ) ) )
                {
                    if ( p[ 0 ].is_bottom() )
                        continue;
                    ++fired;
                    for ( auto tt = ht - 3; tt <= ht + 3; ++tt )
                        entails = entails && 30 <= tt + p[ 0 ].v && tt + p[ 0 ].v <= 40;
                }
    bool pass = all_hold( rs ) && entails && fired > 0;
    return { pass, verdicts( rs ) + ", guard of {1,2} bounds every ~temp + dh in [30,40] over " + std::to_string( fired ) + " firings",
             { { "outcome", io::outcome( out ) }, { "checks", reports( rs ) }, { "firings", fired }, { "entails", entails } } };
}

Outcome thresholds( const Heater& h, const CheckOptions& opts )
{
    auto r = sweep( h.ht1, h.epsdt, 0, 10, "Delta", opts );
    auto text = []( const std::optional<std::int64_t>& v ) { return v ? std::to_string( *v ) : std::string( "none" ); };
    bool pass = r.max_preserving == 2 && r.max_repurposing == 5;
    return { pass, "max pR = " + text( r.max_preserving ) + ", max rR = " + text( r.max_repurposing ), io::sweep( r ) };
}

Outcome oracle_suite()
{
    oracle::Coverage cov;
    constexpr std::uint64_t machines = 100;
    for ( std::uint64_t seed = 0; seed < machines; ++seed )
        for ( const auto& check : { oracle::check_primitives, oracle::check_injection, oracle::check_pruning } )
            if ( auto err = check( seed, cov ); !err.empty() )
                return { false, err, nullptr };
    bool pass = cov.shared > 0 && cov.partial > 0 && cov.transitions > 0 && cov.pruned > 0;
    std::ostringstream d;
    d << machines << " machines agree; " << cov.hats << " perceptions, " << cov.shared << " shared compartments, "
      << cov.transitions << " injected transitions, " << cov.pruned << " pruned events";
    return { pass, d.str(), nullptr };
}

struct Criterion
{
    int number;
    std::string name;
    double limit; // seconds, 0 for none
    std::function<Outcome( const CheckOptions& )> run;
};

using Clock = std::chrono::steady_clock;

void print( int number, const std::string& name, bool pass, const std::string& detail, double seconds )
{
    std::printf( "%s %d %-24s %7.2fs  %s\n", pass ? "PASS" : "FAIL", number, name.c_str(), seconds, detail.c_str() );
    std::fflush( stdout );
}

} // namespace

int main()
{
    auto h = heater();
    std::vector<Criterion> criteria{
            { 1, "heater-baseline", 5, [ & ]( const CheckOptions& o ) { return baseline( h, o ); } },
            { 2, "injection-unsafety", 0, [ & ]( const CheckOptions& o ) { return injection( h, o ); } },
            { 3, "preserving-correct", 60, [ & ]( const CheckOptions& o ) { return preserving( h, o ); } },
            { 4, "preserving-window", 0, [ & ]( const CheckOptions& o ) { return window( h, o ); } },
            { 5, "vacuity", 0, [ & ]( const CheckOptions& o ) { return vacuity( h, o ); } },
            { 6, "repurposing-correct", 0, [ & ]( const CheckOptions& o ) { return repurposing( h, o ); } },
            { 7, "case-study-thresholds", 300, [ & ]( const CheckOptions& o ) { return thresholds( h, o ); } },
    };

    bool ok = true;
    std::vector<std::string> first;
    CheckOptions opts{ .jobs = default_jobs() };
    for ( const auto& c : criteria )
    {
        auto start = Clock::now();
        Outcome out;
        try
        {
            out = c.run( opts );
        }
        catch ( const std::exception& e )
        {
            out = { false, std::string( "error: " ) + e.what(), nullptr };
        }
        double s = std::chrono::duration<double>( Clock::now() - start ).count();
        bool in_time = c.limit == 0 || s < c.limit;
        bool pass = out.pass && in_time;
        auto detail = out.detail + ( in_time ? "" : ", over the " + std::to_string( static_cast<int>( c.limit ) ) + " s limit" );
        print( c.number, c.name, pass, detail, s );
        ok = ok && pass;
        first.push_back( io::document( "acceptance", { { "criterion", c.number }, { "result", out.doc } }, nullptr ).dump() );
    }

    {
        auto start = Clock::now();
        Outcome out;
        try
        {
            out = oracle_suite();
        }
        catch ( const std::exception& e )
        {
            out = { false, std::string( "error: " ) + e.what(), nullptr };
        }
        print( 8, "oracle-equivalence", out.pass, out.detail, std::chrono::duration<double>( Clock::now() - start ).count() );
        ok = ok && out.pass;
    }

    // Rerun 1-7 with another job count; the documents must match byte for byte.
    {
        auto start = Clock::now();
        CheckOptions other{ .jobs = opts.jobs == 1 ? 3u : 1u };
        std::size_t same = 0;
        std::string differs;
        for ( std::size_t k = 0; k < criteria.size(); ++k )
        {
            Outcome out;
            try
            {
                out = criteria[ k ].run( other );
            }
            catch ( const std::exception& e )
            {
                out = { false, e.what(), nullptr };
            }
            auto again = io::document( "acceptance", { { "criterion", criteria[ k ].number }, { "result", out.doc } }, nullptr ).dump();
            if ( again == first[ k ] )
                ++same;
            else if ( differs.empty() )
                differs = ", criterion " + std::to_string( criteria[ k ].number ) + " differs";
        }
        bool pass = same == criteria.size();
        print( 9, "determinism", pass,
               std::to_string( same ) + "/" + std::to_string( criteria.size() ) + " reports identical across job counts" + differs,
               std::chrono::duration<double>( Clock::now() - start ).count() );
        ok = ok && pass;
    }
    return ok ? 0 : 1;
}
