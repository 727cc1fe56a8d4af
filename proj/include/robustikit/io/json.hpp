#pragma once

// JSON documents for reports and models. Every document names its schema
// (schemas/<name>.schema.json) and keeps wall times in one trailing "timing"
// member, so two runs differ only there.

#include "robustikit/dsl/parser.hpp"
#include "robustikit/dsl/printer.hpp"
#include "robustikit/explore/simulate.hpp"
#include "robustikit/explore/sweep.hpp"
#include "robustikit/explore/workflow.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace robustikit::io
{

using Json = nlohmann::ordered_json;

constexpr int schema_version = 1;

// Wall times gathered while a document is built.
class Timing
{
    Json _checks = Json::array();

public:
    void add( const CheckReport& r )
    {
        _checks.push_back( { { "kind", r.kind }, { "model", r.model }, { "seconds", r.seconds } } );
    }

    [[nodiscard]] Json to_json( double total ) const { return { { "seconds", total }, { "checks", _checks } }; }
};

inline Json scalar( const Scalar& s )
{
    if ( std::holds_alternative<std::int64_t>( s ) )
        return std::get<std::int64_t>( s );
    return std::get<std::string>( s );
}

inline Json assignment( const Assignment& a )
{
    Json out = Json::object();
    for ( const auto& [ name, value ] : a )
        out[ name ] = scalar( value );
    return out;
}

inline Json witness( const Witness& w )
{
    Json out{ { "kind", w.kind } };
    if ( !w.event.empty() )
        out[ "event" ] = w.event;
    if ( !w.indices.empty() )
        out[ "indices" ] = w.indices;
    Json vals = Json::object();
    for ( const auto& [ role, a ] : w.valuations )
        vals[ role ] = assignment( a );
    out[ "valuations" ] = vals;
    out[ "text" ] = w.text();
    return out;
}

inline Json report( const CheckReport& r, Timing* timing = nullptr )
{
    if ( timing )
        timing->add( r );
    Json out{ { "kind", r.kind }, { "model", r.model }, { "verdict", verdict_name( r.verdict ) } };
    if ( !r.reason.empty() )
        out[ "reason" ] = r.reason;
    out[ "states_checked" ] = r.stats.states_checked;
    out[ "violations" ] = r.stats.violations;
    Json ws = Json::array();
    for ( const auto& w : r.witnesses )
        ws.push_back( witness( w ) );
    out[ "witnesses" ] = ws;
    return out;
}

inline Json outcome( const RobustifyOutcome& o, Timing* timing = nullptr, bool with_model = false )
{
    Json out{ { "method", derivation_name( o.method ) }, { "condition", report( o.condition, timing ) },
              { "emitted", o.machine.has_value() }, { "machine", o.candidate.name } };
    Json events = Json::array();
    for ( const auto& e : o.candidate.events )
        if ( e.kind == EventKind::Controller )
            events.push_back( e.name );
    out[ "controller_events" ] = events;
    out[ "retained" ] = o.retained;
    out[ "pruned" ] = o.pruned;
    if ( with_model )
        out[ "model" ] = dsl::print_machine( o.candidate );
    return out;
}

inline Json workflow( const WorkflowResult& w, Timing* timing = nullptr, bool with_model = false )
{
    Json out{ { "stage", stage_name( w.stage ) } };
    Json pre = Json::array();
    for ( const auto& r : w.preconditions )
        pre.push_back( report( r, timing ) );
    out[ "preconditions" ] = pre;
    if ( w.injected )
        out[ "injected" ] = w.injected->name;
    if ( w.preserving )
        out[ "preserving" ] = outcome( *w.preserving, timing, false );
    if ( w.repurposing )
        out[ "repurposing" ] = outcome( *w.repurposing, timing, false );
    if ( const auto* m = w.machine() )
    {
        out[ "machine" ] = m->name;
        if ( with_model )
            out[ "model" ] = dsl::print_machine( *m );
    }
    if ( !w.recommendation.empty() )
        out[ "recommendation" ] = w.recommendation;
    return out;
}

inline Json maybe( const std::optional<std::int64_t>& v ) { return v ? Json( *v ) : Json( nullptr ); }

inline Json sweep( const SweepResult& r, Timing* timing = nullptr )
{
    Json out{ { "machine", r.machine }, { "uncertainty", r.uncertainty }, { "parameter", r.parameter },
              { "range", { r.lo, r.hi } } };
    Json points = Json::array();
    for ( const auto& p : r.points )
        points.push_back( { { "value", p.value },
                            { "pR", verdict_name( p.preserving.verdict ) },
                            { "rR", verdict_name( p.repurposing.verdict ) },
                            { "preserving", report( p.preserving, timing ) },
                            { "repurposing", report( p.repurposing, timing ) } } );
    out[ "points" ] = points;
    out[ "max_pR" ] = maybe( r.max_preserving );
    out[ "max_rR" ] = maybe( r.max_repurposing );
    out[ "non_monotonic" ] = r.non_monotonic();
    out[ "non_monotonic_pR" ] = r.non_monotonic_preserving;
    out[ "non_monotonic_rR" ] = r.non_monotonic_repurposing;
    return out;
}

inline Json simulation( const SimulationResult& r )
{
    Json trace = Json::array();
    for ( const auto& t : r.trace )
    {
        Json step{ { "step", t.step } };
        if ( !t.event.empty() )
        {
            step[ "event" ] = t.event;
            step[ "params" ] = assignment( t.params );
        }
        step[ "state" ] = assignment( t.state );
        step[ "safe" ] = t.safe;
        trace.push_back( step );
    }
    Json out{ { "seed", r.seed }, { "steps", r.steps_requested }, { "stopped", r.stopped } };
    out[ "violation_step" ] = r.violation_step ? Json( *r.violation_step ) : Json( nullptr );
    out[ "trace" ] = trace;
    return out;
}

// Wraps a body in the schema envelope. Timing goes last.
inline Json document( const std::string& schema, const Json& body, const Timing* timing = nullptr, double seconds = 0 )
{
    Json out{ { "schema", "robustikit/" + schema }, { "version", schema_version } };
    for ( const auto& [ k, v ] : body.items() )
        out[ k ] = v;
    if ( timing )
        out[ "timing" ] = timing->to_json( seconds );
    return out;
}

// Models. Expressions travel as DSL text.

inline Json domain( const Domain& d )
{
    if ( d.is_int() )
        return { { "int", { d.lo, d.hi } } };
    return { { "enum", d.members } };
}

inline Domain domain_from( const Json& j )
{
    if ( j.contains( "int" ) )
        return Domain::interval( j.at( "int" ).at( 0 ).get<std::int64_t>(), j.at( "int" ).at( 1 ).get<std::int64_t>() );
    return Domain::enumeration( j.at( "enum" ).get<std::vector<std::string>>() );
}

inline Json consts( const std::vector<ConstDecl>& cs )
{
    Json out = Json::array();
    for ( const auto& c : cs )
        out.push_back( { { "name", c.name }, { "range", { c.lo, c.hi } } } );
    return out;
}

inline std::vector<ConstDecl> consts_from( const Json& j )
{
    std::vector<ConstDecl> out;
    for ( const auto& c : j )
        out.push_back( { c.at( "name" ).get<std::string>(), c.at( "range" ).at( 0 ).get<std::int64_t>(),
                         c.at( "range" ).at( 1 ).get<std::int64_t>(), {} } );
    return out;
}

inline Derivation derivation_from( const std::string& s )
{
    for ( auto d : { Derivation::None, Derivation::Inject, Derivation::Preserving, Derivation::Repurposing } )
        if ( s == derivation_name( d ) )
            return d;
    throw ValidationError( "unknown derivation '" + s + "'" );
}

inline Json machine( const Machine& m )
{
    Json out{ { "name", m.name } };
    if ( m.provenance.method != Derivation::None )
        out[ "derived" ] = { { "method", derivation_name( m.provenance.method ) },
                             { "from", m.provenance.source_machine },
                             { "uncertainty", m.provenance.uncertainty } };
    out[ "consts" ] = consts( m.consts );
    Json vars = Json::array();
    for ( const auto& v : m.vars )
        vars.push_back( { { "name", v.name }, { "domain", domain( v.domain ) } } );
    out[ "vars" ] = vars;
    out[ "init" ] = dsl::print_expr( m.init );
    out[ "safety" ] = dsl::print_expr( m.safety );
    if ( m.uncertainty )
        out[ "uncertainty" ] = dsl::print_expr( *m.uncertainty );
    Json events = Json::array();
    for ( const auto& e : m.events )
    {
        Json params = Json::array();
        for ( const auto& p : e.params )
            params.push_back( { { "name", p.name }, { "domain", domain( p.domain ) }, { "bottom", p.allows_bottom } } );
        Json ev{ { "kind", e.kind == EventKind::Plant ? "plant" : "controller" }, { "name", e.name } };
        if ( !e.sources.empty() )
            ev[ "sources" ] = e.sources;
        ev[ "params" ] = params;
        ev[ "guard" ] = dsl::print_expr( e.guard );
        ev[ "action" ] = dsl::print_expr( e.action );
        events.push_back( ev );
    }
    out[ "events" ] = events;
    return out;
}

inline Machine machine_from( const Json& j )
{
    Machine m;
    m.name = j.at( "name" ).get<std::string>();
    if ( j.contains( "derived" ) )
    {
        const auto& d = j.at( "derived" );
        m.provenance = { derivation_from( d.at( "method" ).get<std::string>() ), d.at( "from" ).get<std::string>(),
                         d.at( "uncertainty" ).get<std::string>() };
    }
    m.consts = consts_from( j.at( "consts" ) );
    for ( const auto& v : j.at( "vars" ) )
        m.vars.push_back( { v.at( "name" ).get<std::string>(), domain_from( v.at( "domain" ) ), {} } );
    m.init = dsl::parse_expr( j.at( "init" ).get<std::string>() );
    m.safety = dsl::parse_expr( j.at( "safety" ).get<std::string>() );
    if ( j.contains( "uncertainty" ) )
        m.uncertainty = dsl::parse_expr( j.at( "uncertainty" ).get<std::string>() );
    for ( const auto& ev : j.at( "events" ) )
    {
        EventDef e;
        e.kind = ev.at( "kind" ).get<std::string>() == "plant" ? EventKind::Plant : EventKind::Controller;
        e.name = ev.at( "name" ).get<std::string>();
        if ( ev.contains( "sources" ) )
            e.sources = ev.at( "sources" ).get<std::vector<std::string>>();
        for ( const auto& p : ev.at( "params" ) )
            e.params.push_back( { p.at( "name" ).get<std::string>(), domain_from( p.at( "domain" ) ), p.at( "bottom" ).get<bool>(), {} } );
        e.guard = dsl::parse_expr( ev.at( "guard" ).get<std::string>() );
        e.action = dsl::parse_expr( ev.at( "action" ).get<std::string>() );
        m.events.push_back( std::move( e ) );
    }
    return m;
}

inline const char* clause_kind_name( UncertaintyClause::Kind k )
{
    switch ( k )
    {
    case UncertaintyClause::Kind::Exact:
        return "exact";
    case UncertaintyClause::Kind::Within:
        return "within";
    default:
        return "any";
    }
}

inline Json uncertainty( const UncertaintySpec& u )
{
    Json out{ { "name", u.name }, { "machine", u.machine }, { "consts", consts( u.consts ) } };
    Json clauses = Json::array();
    for ( const auto& c : u.clauses )
    {
        Json cl{ { "var", c.var }, { "kind", clause_kind_name( c.kind ) } };
        if ( c.kind == UncertaintyClause::Kind::Within )
            cl[ "radius" ] = c.radius.is_symbolic() ? Json( c.radius.symbol ) : Json( c.radius.literal );
        clauses.push_back( cl );
    }
    out[ "clauses" ] = clauses;
    if ( u.relation )
        out[ "relation" ] = dsl::print_expr( *u.relation );
    return out;
}

inline UncertaintySpec uncertainty_from( const Json& j )
{
    UncertaintySpec u;
    u.name = j.at( "name" ).get<std::string>();
    u.machine = j.at( "machine" ).get<std::string>();
    u.consts = consts_from( j.at( "consts" ) );
    for ( const auto& c : j.at( "clauses" ) )
    {
        UncertaintyClause cl;
        cl.var = c.at( "var" ).get<std::string>();
        auto kind = c.at( "kind" ).get<std::string>();
        cl.kind = kind == "exact" ? UncertaintyClause::Kind::Exact
                  : kind == "within" ? UncertaintyClause::Kind::Within
                                     : UncertaintyClause::Kind::Any;
        if ( c.contains( "radius" ) )
        {
            if ( c.at( "radius" ).is_string() )
                cl.radius.symbol = c.at( "radius" ).get<std::string>();
            else
                cl.radius.literal = c.at( "radius" ).get<std::int64_t>();
        }
        u.clauses.push_back( cl );
    }
    if ( j.contains( "relation" ) )
        u.relation = dsl::parse_expr( j.at( "relation" ).get<std::string>() );
    return u;
}

inline Json source_file( const dsl::SourceFile& f )
{
    Json ms = Json::array();
    for ( const auto& m : f.machines )
        ms.push_back( machine( m ) );
    Json us = Json::array();
    for ( const auto& u : f.uncertainties )
        us.push_back( uncertainty( u ) );
    return { { "machines", ms }, { "uncertainties", us } };
}

// Checks the envelope and rebuilds the entities of a model document.
inline dsl::SourceFile source_file_from( const Json& j )
{
    if ( j.value( "schema", "" ) != "robustikit/model" )
        throw ValidationError( "not a model document" );
    if ( j.value( "version", 0 ) != schema_version )
        throw ValidationError( "unsupported model document version" );
    dsl::SourceFile f;
    for ( const auto& m : j.at( "machines" ) )
        f.machines.push_back( machine_from( m ) );
    for ( const auto& u : j.at( "uncertainties" ) )
        f.uncertainties.push_back( uncertainty_from( u ) );
    return f;
}

} // namespace robustikit::io
