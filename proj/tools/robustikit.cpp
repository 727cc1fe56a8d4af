#include "robustikit/robustikit.hpp"
#include "robustikit/analysis/smt.hpp"
#include "robustikit/explore/simulate.hpp"
#include "robustikit/explore/sweep.hpp"
#include "robustikit/explore/workflow.hpp"
#include "robustikit/io/json.hpp"
#include "robustikit/transform/eventb.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace robustikit;
using io::Json;

namespace
{

struct Usage : Error
{
    using Error::Error;
};

// Already formatted compiler-style diagnostics.
struct Diagnostics : Error
{
    using Error::Error;
};

struct RunConfig
{
    std::string file;
    std::string machine;
    std::string uncertainty;
    std::vector<std::string> sets;
    unsigned jobs = 0;
    std::uint64_t cap = 10'000'000;
    std::size_t max_witnesses = 1;
    bool safpar_prose = false;
    bool json = false;
    std::string output;
    std::string report;
    std::string method = "auto";
    std::string format = "dsl";
    std::string query;
    std::string subset;
    std::string event;
    std::string against;
    std::string param;
    std::string range;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    std::uint64_t seeds = 1;
    bool force = false;
    bool no_prune = false;
};

using Clock = std::chrono::steady_clock;

double since( Clock::time_point t ) { return std::chrono::duration<double>( Clock::now() - t ).count(); }

std::string read_text( const std::string& path )
{
    std::ifstream in( path );
    if ( !in )
        throw Usage( "cannot read '" + path + "'" );
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_out( const std::string& text, const std::string& path )
{
    if ( path.empty() || path == "-" )
    {
        std::cout << text;
        return;
    }
    std::ofstream out( path );
    if ( !out )
        throw Usage( "cannot write '" + path + "'" );
    out << text;
}

dsl::SourceFile load( const std::string& path )
{
    auto text = read_text( path );
    dsl::SourceFile f;
    if ( path.size() > 5 && path.substr( path.size() - 5 ) == ".json" )
    {
        try
        {
            f = io::source_file_from( Json::parse( text ) );
        }
        catch ( const Json::exception& e )
        {
            throw Usage( path + ": " + e.what() );
        }
        f.path = path;
        dsl::validate( f );
    }
    else
        f = dsl::parse( text, path );
    for ( const auto& d : f.diagnostics )
        if ( d.severity != dsl::Diagnostic::Severity::Error )
            std::cerr << d.str( path ) << "\n";
    if ( !f.ok() )
    {
        std::string msg;
        for ( const auto& d : f.diagnostics )
            if ( d.severity == dsl::Diagnostic::Severity::Error )
                msg += ( msg.empty() ? "" : "\n" ) + d.str( path );
        throw Diagnostics( msg );
    }
    return f;
}

const UncertaintySpec* pick_uncertainty( const dsl::SourceFile& f, const RunConfig& c, bool required )
{
    if ( !c.uncertainty.empty() )
    {
        const auto* u = f.uncertainty( c.uncertainty );
        if ( !u )
            throw Usage( "no uncertainty named '" + c.uncertainty + "' in " + c.file );
        return u;
    }
    std::vector<const UncertaintySpec*> fits;
    for ( const auto& u : f.uncertainties )
        if ( c.machine.empty() || u.machine == c.machine )
            fits.push_back( &u );
    if ( fits.size() == 1 && required )
        return fits[ 0 ];
    if ( required )
        throw Usage( fits.empty() ? "no uncertainty specification in " + c.file
                                  : "several uncertainty specifications; pick one with --uncertainty" );
    return nullptr;
}

const Machine& pick_machine( const dsl::SourceFile& f, const RunConfig& c, const UncertaintySpec* u = nullptr )
{
    std::string name = c.machine;
    if ( name.empty() && u )
        name = u->machine;
    if ( !name.empty() )
    {
        const auto* m = f.machine( name );
        if ( !m )
            throw Usage( "no machine named '" + name + "' in " + c.file );
        return *m;
    }
    if ( f.machines.size() != 1 )
        throw Usage( f.machines.empty() ? "no machine in " + c.file : "several machines; pick one with --machine" );
    return f.machines[ 0 ];
}

Bindings parse_sets( const std::vector<std::string>& sets )
{
    Bindings b;
    for ( const auto& s : sets )
    {
        auto eq = s.find( '=' );
        if ( eq == std::string::npos || eq == 0 )
            throw Usage( "--set expects name=value, got '" + s + "'" );
        try
        {
            b[ s.substr( 0, eq ) ] = std::stoll( s.substr( eq + 1 ) );
        }
        catch ( const std::exception& )
        {
            throw Usage( "--set value for '" + s.substr( 0, eq ) + "' is not an integer" );
        }
    }
    return b;
}

Json bindings_json( const Bindings& b )
{
    Json out = Json::object();
    for ( const auto& [ k, v ] : b )
        out[ k ] = v;
    return out;
}

CheckOptions check_options( const RunConfig& c )
{
    CheckOptions o;
    o.jobs = c.jobs ? c.jobs : default_jobs();
    o.max_witnesses = c.max_witnesses;
    o.safpar_prose = c.safpar_prose;
    return o;
}

Limits limits( const RunConfig& c )
{
    Limits l;
    l.state_cap = c.cap;
    return l;
}

RobustifyOptions robustify_options( const RunConfig& c )
{
    RobustifyOptions o;
    o.check = check_options( c );
    o.prune = !c.no_prune;
    o.limits = limits( c );
    return o;
}

Derivation parse_method( const std::string& m )
{
    if ( m == "preserving" || m == "pR" )
        return Derivation::Preserving;
    if ( m == "repurposing" || m == "rR" )
        return Derivation::Repurposing;
    if ( m == "inject" )
        return Derivation::Inject;
    if ( m == "none" )
        return Derivation::None;
    throw Usage( "unknown method '" + m + "'" );
}

void print_report( const CheckReport& r )
{
    std::cout << r.kind << ": " << verdict_name( r.verdict );
    if ( r.verdict == Verdict::Unknown )
        std::cout << " (" << r.reason << ")";
    else
        std::cout << " (" << r.stats.states_checked << " states, " << r.stats.violations << " violations)";
    std::cout << "\n";
    for ( const auto& w : r.witnesses )
        std::cout << "  " << w.text() << "\n";
}

int verdict_code( const std::vector<const CheckReport*>& rs )
{
    int code = 0;
    for ( const auto* r : rs )
    {
        if ( r->verdict == Verdict::Unknown )
            return 2;
        if ( r->fails() )
            code = 1;
    }
    return code;
}

int cmd_parse( const RunConfig& c )
{
    auto f = load( c.file );
    std::string out;
    if ( c.format == "json" )
        out = io::document( "model", io::source_file( f ) ).dump( 2 ) + "\n";
    else if ( c.format == "eventb-text" )
        for ( const auto& m : f.machines )
            out += eventb::machine_text( m );
    else if ( c.format == "dsl" )
    {
        for ( const auto& m : f.machines )
            out += ( out.empty() ? "" : "\n" ) + dsl::print_machine( m );
        for ( const auto& u : f.uncertainties )
            out += ( out.empty() ? "" : "\n" ) + dsl::print_uncertainty( u );
    }
    else
        throw Usage( "parse does not write format '" + c.format + "'" );
    write_out( out, c.output );
    return 0;
}

int cmd_check( const RunConfig& c )
{
    auto start = Clock::now();
    auto f = load( c.file );
    const auto* u = c.uncertainty.empty() ? nullptr : pick_uncertainty( f, c, true );
    const auto& original = pick_machine( f, c, u );
    auto b = parse_sets( c.sets );
    Machine target = u ? inject( original, *u, b ) : original;
    Model m( target, b, limits( c ) );
    auto opts = check_options( c );
    std::vector<CheckReport> reports{ check_partitioning( m, opts ), check_invariant_preservation( m, opts ),
                                      check_feasibility( m, opts ) };
    if ( !c.against.empty() )
    {
        const auto* o = f.machine( c.against );
        if ( !o )
            throw Usage( "no machine named '" + c.against + "' in " + c.file );
        Model om( *o, b, limits( c ) );
        reports.push_back( check_forward_simulation( m, om, opts ) );
    }
    std::vector<const CheckReport*> ptrs;
    for ( const auto& r : reports )
        ptrs.push_back( &r );
    int code = verdict_code( ptrs );

    io::Timing timing;
    Json checks = Json::array();
    for ( const auto& r : reports )
        checks.push_back( io::report( r, &timing ) );
    Json body{ { "machine", target.name }, { "bindings", bindings_json( b ) },
               { "verdict", code == 0 ? "holds" : code == 1 ? "fails" : "unknown" }, { "checks", checks } };
    auto doc = io::document( "check", body, &timing, since( start ) ).dump( 2 ) + "\n";
    if ( !c.output.empty() )
        write_out( doc, c.output );
    if ( c.json )
        std::cout << doc;
    else
        for ( const auto& r : reports )
            print_report( r );
    return code;
}

int cmd_inject( const RunConfig& c )
{
    auto f = load( c.file );
    const auto* u = pick_uncertainty( f, c, true );
    const auto& m = pick_machine( f, c, u );
    auto pm = inject( m, *u, parse_sets( c.sets ) );
    std::string out;
    if ( c.format == "dsl" )
        out = dsl::print_machine( pm );
    else if ( c.format == "json" )
        out = io::document( "model", { { "machines", { io::machine( pm ) } }, { "uncertainties", Json::array() } } ).dump( 2 ) + "\n";
    else if ( c.format == "eventb-text" )
        out = eventb::machine_text( pm );
    else
        throw Usage( "inject does not write format '" + c.format + "'" );
    write_out( out, c.output );
    return 0;
}

int cmd_robustify( const RunConfig& c )
{
    auto start = Clock::now();
    auto f = load( c.file );
    const auto* u = pick_uncertainty( f, c, true );
    const auto& m = pick_machine( f, c, u );
    auto b = parse_sets( c.sets );
    auto opts = robustify_options( c );

    io::Timing timing;
    Json body{ { "source", m.name }, { "uncertainty", u->name }, { "bindings", bindings_json( b ) }, { "method", c.method } };
    const Machine* emitted = nullptr;
    int code = 0;
    std::optional<WorkflowResult> flow;
    std::optional<RobustifyOutcome> single;
    if ( c.method == "auto" )
    {
        flow = run_workflow( m, *u, b, opts );
        body[ "workflow" ] = io::workflow( *flow, &timing );
        emitted = flow->machine();
        if ( !emitted && c.force )
        {
            const auto& last = flow->repurposing ? flow->repurposing : flow->preserving;
            if ( last )
                emitted = &last->candidate;
        }
        code = flow->machine() ? 0 : flow->stage == Stage::Unknown ? 2 : 1;
        if ( !c.json )
        {
            std::cerr << "stage: " << stage_name( flow->stage ) << "\n";
            for ( const auto& r : flow->preconditions )
                if ( !r.holds() )
                    print_report( r );
            for ( const auto* o : { flow->preserving ? &*flow->preserving : nullptr, flow->repurposing ? &*flow->repurposing : nullptr } )
                if ( o && o->condition.verdict == Verdict::Unknown )
                    std::cerr << o->condition.kind << ": unknown (" << o->condition.reason << ")\n";
            for ( const auto* o : { flow->preserving ? &*flow->preserving : nullptr, flow->repurposing ? &*flow->repurposing : nullptr } )
                if ( o && !o->condition.holds() )
                    for ( const auto& w : o->condition.witnesses )
                        std::cerr << "  " << o->condition.kind << ": " << w.text() << "\n";
            if ( !flow->recommendation.empty() )
                std::cerr << "recommendation: " << flow->recommendation << "\n";
        }
    }
    else
    {
        auto d = parse_method( c.method );
        if ( d != Derivation::Preserving && d != Derivation::Repurposing )
            throw Usage( "--method must be preserving, repurposing or auto" );
        single = robustify( d, m, *u, b, opts );
        body[ "outcome" ] = io::outcome( *single, &timing );
        emitted = single->machine ? &*single->machine : ( c.force ? &single->candidate : nullptr );
        code = single->machine ? 0 : single->condition.verdict == Verdict::Unknown ? 2 : 1;
        if ( !c.json && code == 2 )
            std::cerr << single->condition.kind << ": unknown (" << single->condition.reason << ")\n";
        if ( !c.json && !single->machine )
            for ( const auto& w : single->condition.witnesses )
                std::cerr << "  " << single->condition.kind << ": " << w.text() << "\n";
    }
    auto model = emitted ? dsl::print_machine( *emitted ) : std::string();
    body[ "model" ] = emitted ? Json( model ) : Json( nullptr );
    auto doc = io::document( "robustify", body, &timing, since( start ) ).dump( 2 ) + "\n";
    if ( !c.report.empty() )
        write_out( doc, c.report );
    if ( emitted && !c.output.empty() )
        write_out( model, c.output );
    if ( c.json )
        std::cout << doc;
    else if ( emitted && c.output.empty() )
        std::cout << model;
    return code;
}

std::pair<std::int64_t, std::int64_t> parse_range( const std::string& r )
{
    auto dots = r.find( ".." );
    if ( dots == std::string::npos )
        throw Usage( "--range expects lo..hi, got '" + r + "'" );
    try
    {
        return { std::stoll( r.substr( 0, dots ) ), std::stoll( r.substr( dots + 2 ) ) };
    }
    catch ( const std::exception& )
    {
        throw Usage( "--range expects integers, got '" + r + "'" );
    }
}

int cmd_sweep( const RunConfig& c )
{
    auto start = Clock::now();
    auto f = load( c.file );
    const auto* u = pick_uncertainty( f, c, true );
    const auto& m = pick_machine( f, c, u );
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    if ( c.range.empty() )
    {
        auto p = sweep_parameter( m, *u, c.param );
        lo = p.lo;
        hi = p.hi;
    }
    else
        std::tie( lo, hi ) = parse_range( c.range );
    auto r = sweep( m, *u, lo, hi, c.param, check_options( c ), limits( c ) );
    io::Timing timing;
    auto doc = io::document( "sweep", io::sweep( r, &timing ), &timing, since( start ) ).dump( 2 ) + "\n";
    if ( !c.output.empty() )
        write_out( doc, c.output );
    std::cout << ( c.json ? doc : sweep_table( r ) );
    return 0;
}

Machine build_target( const dsl::SourceFile& f, const RunConfig& c, const Bindings& b, const std::string& method )
{
    auto d = parse_method( method );
    if ( d == Derivation::None )
        return pick_machine( f, c );
    const auto* u = pick_uncertainty( f, c, true );
    const auto& m = pick_machine( f, c, u );
    if ( d == Derivation::Inject )
        return inject( m, *u, b );
    auto opts = robustify_options( c );
    return robustify( d, m, *u, b, opts ).candidate;
}

int cmd_simulate( const RunConfig& c )
{
    auto start = Clock::now();
    auto f = load( c.file );
    auto b = parse_sets( c.sets );
    auto method = c.method == "auto" ? ( c.uncertainty.empty() ? "none" : "inject" ) : c.method;
    auto target = build_target( f, c, b, method );
    Model m( target, b, limits( c ) );
    SimulationResult r;
    for ( std::uint64_t k = 0; k < std::max<std::uint64_t>( 1, c.seeds ); ++k )
    {
        r = simulate( m, c.steps, c.seed + k );
        if ( r.violation_step )
            break;
    }
    Json body{ { "machine", target.name }, { "bindings", bindings_json( b ) } };
    auto sim = io::simulation( r );
    for ( const auto& [ k, v ] : sim.items() )
        body[ k ] = v;
    io::Timing timing;
    auto doc = io::document( "simulate", body, &timing, since( start ) ).dump( 2 ) + "\n";
    if ( !c.output.empty() )
        write_out( doc, c.output );
    std::cout << ( c.json ? doc : trace_text( r ) );
    return r.violation_step ? 1 : 0;
}

std::vector<int> parse_subset( const std::string& s )
{
    std::vector<int> out;
    std::stringstream ss( s );
    std::string part;
    while ( std::getline( ss, part, ',' ) )
    {
        try
        {
            out.push_back( std::stoi( part ) );
        }
        catch ( const std::exception& )
        {
            throw Usage( "--subset expects comma separated indices, got '" + s + "'" );
        }
    }
    std::sort( out.begin(), out.end() );
    out.erase( std::unique( out.begin(), out.end() ), out.end() );
    return out;
}

int cmd_export( const RunConfig& c )
{
    auto f = load( c.file );
    auto b = parse_sets( c.sets );
    auto method = c.method == "auto" ? "none" : c.method;
    std::string out;
    if ( c.format == "smt2" )
    {
        if ( c.query == "vacuity" )
        {
            const auto* u = pick_uncertainty( f, c, true );
            const auto& m = pick_machine( f, c, u );
            Model model( m, b, limits( c ) );
            out = smt::emit_vacuity( model, *u, parse_subset( c.subset ), b );
        }
        else
        {
            auto target = build_target( f, c, b, method );
            Model model( target, b, limits( c ) );
            if ( c.query == "partitioning" )
                out = smt::emit_partitioning( model );
            else if ( c.query == "preservation" || c.query == "invariant-preservation" )
                out = smt::emit_preservation( model );
            else if ( c.query == "feasibility" )
                out = smt::emit_feasibility( model );
            else if ( c.query == "forward-simulation" )
            {
                auto name = c.against.empty() ? target.provenance.source_machine : c.against;
                const auto* o = f.machine( name );
                if ( !o )
                    throw Usage( "forward simulation needs --against naming the original machine" );
                Model om( *o, b, limits( c ) );
                out = smt::emit_forward_simulation( model, om );
            }
            else
                throw Usage( "unknown query '" + c.query + "'" );
        }
    }
    else
    {
        auto whole = method == std::string( "none" ) && c.machine.empty() && c.event.empty();
        if ( c.format == "json" )
        {
            Json body;
            if ( whole )
                body = io::source_file( f );
            else
                body = { { "machines", { io::machine( build_target( f, c, b, method ) ) } }, { "uncertainties", Json::array() } };
            out = io::document( "model", body ).dump( 2 ) + "\n";
        }
        else if ( c.format == "dsl" )
            out = dsl::print_machine( build_target( f, c, b, method ) );
        else if ( c.format == "eventb-text" )
        {
            auto target = build_target( f, c, b, method );
            if ( c.event.empty() )
                out = eventb::machine_text( target );
            else
            {
                const auto* e = target.find_event( c.event );
                if ( !e )
                    throw Usage( "no event named '" + c.event + "' in " + target.name );
                out = eventb::event_text( target, *e );
            }
        }
        else
            throw Usage( "unknown format '" + c.format + "'" );
    }
    write_out( out, c.output );
    return 0;
}

void common( CLI::App* sub, RunConfig& c, bool uncertainty = true )
{
    sub->add_option( "file", c.file, "model file (.cpm or .json)" )->required();
    sub->add_option( "-m,--machine", c.machine, "machine name" );
    if ( uncertainty )
        sub->add_option( "-u,--uncertainty", c.uncertainty, "uncertainty specification name" );
    sub->add_option( "--set", c.sets, "bind a symbolic constant, name=value" );
    sub->add_option( "-j,--jobs", c.jobs, "worker threads (default: ROBUSTIKIT_JOBS or all cores)" );
    sub->add_option( "--cap", c.cap, "state-space cap" )->capture_default_str();
    sub->add_option( "-o,--output", c.output, "output file" );
}

} // namespace

int main( int argc, char** argv )
{
    CLI::App app{ "robustikit: controller-plant models under perceptual uncertainty" };
    app.require_subcommand( 1 );
    RunConfig c;

    auto* parse = app.add_subcommand( "parse", "parse and print a model file canonically" );
    common( parse, c, false );
    parse->add_option( "--format", c.format, "dsl, json or eventb-text" )->capture_default_str();

    auto* check = app.add_subcommand( "check", "partitioning, invariant preservation and feasibility" );
    common( check, c );
    check->add_option( "--against", c.against, "also check forward simulation by this machine" );
    check->add_option( "--max-witnesses", c.max_witnesses, "witnesses per check, 0 for all" )->capture_default_str();
    check->add_flag( "--json", c.json, "print the JSON report" );

    auto* inj = app.add_subcommand( "inject", "inject an uncertainty specification" );
    common( inj, c );
    inj->add_option( "--format", c.format, "dsl, json or eventb-text" )->capture_default_str();

    RunConfig workflow_defaults;
    auto* rob = app.add_subcommand( "robustify", "robustify a controller against an uncertainty" );
    auto* wf = app.add_subcommand( "workflow", "robustify with the automatic method cascade" );
    for ( auto* sub : { rob, wf } )
    {
        common( sub, c );
        sub->add_flag( "--force", c.force, "emit the generated machine even when its condition fails" );
        sub->add_flag( "--no-prune", c.no_prune, "keep vacuous heterogeneous events" );
        sub->add_flag( "--safpar-prose", c.safpar_prose, "restrict safe parameters to states enabling the event" );
        sub->add_option( "--max-witnesses", c.max_witnesses, "witnesses per condition, 0 for all" )->capture_default_str();
        sub->add_option( "--report", c.report, "write the JSON report to this file" );
        sub->add_flag( "--json", c.json, "print the JSON report instead of the model" );
    }
    rob->add_option( "--method", c.method, "preserving, repurposing or auto" )
            ->check( CLI::IsMember( { "preserving", "repurposing", "auto", "pR", "rR" } ) )
            ->capture_default_str();

    auto* sw = app.add_subcommand( "sweep", "evaluate both robustification conditions over a constant's range" );
    common( sw, c );
    sw->add_option( "--param", c.param, "the symbolic constant to sweep" );
    sw->add_option( "--range", c.range, "lo..hi (default: the constant's domain)" );
    sw->add_flag( "--safpar-prose", c.safpar_prose, "restrict safe parameters to states enabling the event" );
    sw->add_flag( "--json", c.json, "print the JSON result" );

    auto* sim = app.add_subcommand( "simulate", "seeded random run alternating plant and controller steps" );
    common( sim, c );
    sim->add_option( "--method", c.method, "none, inject, preserving or repurposing" );
    sim->add_option( "--steps", c.steps, "number of steps" )->capture_default_str();
    sim->add_option( "--seed", c.seed, "random seed" )->capture_default_str();
    sim->add_option( "--seeds", c.seeds, "try this many consecutive seeds, stopping at a violation" )->capture_default_str();
    sim->add_flag( "--json", c.json, "print the JSON trace" );

    auto* exp = app.add_subcommand( "export", "write a model or query in another format" );
    common( exp, c );
    exp->add_option( "--method", c.method, "none, inject, preserving or repurposing" );
    exp->add_option( "--format", c.format, "dsl, json, eventb-text or smt2" )->capture_default_str();
    exp->add_option( "--query", c.query, "smt2 query: partitioning, preservation, feasibility, forward-simulation, vacuity" );
    exp->add_option( "--subset", c.subset, "controller indices for the vacuity query, e.g. 1,2,3" );
    exp->add_option( "--event", c.event, "eventb-text of a single event" );
    exp->add_option( "--against", c.against, "original machine for forward simulation" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        int code = app.exit( e );
        return code == 0 ? 0 : 2;
    }

    try
    {
        if ( *parse )
            return cmd_parse( c );
        if ( *check )
            return cmd_check( c );
        if ( *inj )
            return cmd_inject( c );
        if ( *wf )
            c.method = "auto";
        if ( *rob || *wf )
            return cmd_robustify( c );
        if ( *sw )
            return cmd_sweep( c );
        if ( *sim )
            return cmd_simulate( c );
        if ( *exp )
            return cmd_export( c );
    }
    catch ( const Diagnostics& e )
    {
        std::cerr << e.what() << "\n";
        return 2;
    }
    catch ( const CapExceeded& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    catch ( const PartitioningViolation& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch ( const Error& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
