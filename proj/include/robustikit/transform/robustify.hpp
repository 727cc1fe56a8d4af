#pragma once

// Action-preserving and action-repurposing robustification of an injected
// machine, the conditions under which the results are safe, and removal of
// heterogeneous events whose compartment never occurs.

#include "robustikit/transform/inject.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace robustikit
{

// Every nonempty subset of [1, n], by size and then lexicographically.
inline std::vector<IndexSet> all_compartments( int n )
{
    if ( n > 16 )
        throw CapExceeded( "too many controller events to enumerate compartments (" + std::to_string( n ) + ")" );
    std::vector<IndexSet> out;
    for ( std::uint32_t mask = 1; mask < ( 1u << n ); ++mask )
    {
        IndexSet u;
        for ( int i = 0; i < n; ++i )
            if ( mask & ( 1u << i ) )
                u.push_back( i + 1 );
        out.push_back( u );
    }
    std::sort( out.begin(), out.end(), []( const IndexSet& a, const IndexSet& b ) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    } );
    return out;
}

// Sorted source names joined by '_', a prefix shared up to an underscore kept
// once, and `_hetero` appended when there is more than one source.
inline std::string hetero_name( std::vector<std::string> names )
{
    std::sort( names.begin(), names.end() );
    if ( names.size() == 1 )
        return names.front();
    std::size_t shared = 0;
    const auto& first = names.front();
    for ( std::size_t k = 0; k < first.size(); ++k )
    {
        bool all = std::all_of( names.begin(), names.end(),
                                [ & ]( const std::string& n ) { return k < n.size() && n[ k ] == first[ k ]; } );
        if ( !all )
            break;
        if ( first[ k ] == '_' )
            shared = k + 1;
    }
    std::string out = first;
    for ( std::size_t k = 1; k < names.size(); ++k )
        out += "_" + names[ k ].substr( shared );
    return out + "_hetero";
}

inline std::string hetero_name( const Machine& m, const IndexSet& u )
{
    auto ctrl = m.controller_events();
    std::vector<std::string> names;
    for ( int i : u )
        names.push_back( ctrl.at( static_cast<std::size_t>( i - 1 ) )->name );
    return hetero_name( names );
}

// ---------------------------------------------------------------------------
// Conditions, evaluated on the original machine.

struct CompartmentTable
{
    std::vector<IndexSet> of_state; // per perceived state, by state index
    std::map<IndexSet, std::vector<std::uint64_t>> occurrences;
};

inline CompartmentTable compartments( const Controller& c, const Model& m, unsigned jobs )
{
    m.require_enumerable();
    CompartmentTable t;
    auto chunks = parallel_chunks<std::vector<IndexSet>>( m.state_count(), jobs, [ & ]( std::uint64_t b, std::uint64_t e ) {
        std::vector<IndexSet> out;
        for ( auto k = b; k < e; ++k )
            out.push_back( c.compartment( m.state_at( k ) ) );
        return out;
    } );
    for ( auto& ch : chunks )
        for ( auto& u : ch )
            t.of_state.push_back( std::move( u ) );
    for ( std::uint64_t k = 0; k < t.of_state.size(); ++k )
        t.occurrences[ t.of_state[ k ] ].push_back( k );
    return t;
}

struct VacuityResult
{
    bool vacuous = true;
    std::vector<Valuation> witnesses; // perceived states whose compartment is u
};

inline VacuityResult is_vacuous( const IndexSet& u, const Model& m, const Uncertainty& eps, unsigned jobs = 1 )
{
    Controller c( m, &eps, jobs );
    auto t = compartments( c, m, jobs );
    VacuityResult r;
    auto it = t.occurrences.find( u );
    if ( it == t.occurrences.end() )
        return r;
    r.vacuous = false;
    for ( auto k : it->second )
        r.witnesses.push_back( m.state_at( k ) );
    return r;
}

inline Assignment perceived_assignment( const Model& m, const Valuation& hat )
{
    Assignment out;
    for ( std::size_t i = 0; i < hat.size(); ++i )
        out.emplace_back( hat_of( m.machine().vars[ i ].name ), to_scalar( m, hat[ i ] ) );
    return out;
}

inline Witness pair_witness( const Model& m, const std::string& kind, const IndexSet& u, const Valuation& s,
                             const Valuation& hat )
{
    Witness w;
    w.kind = kind;
    w.event = hetero_name( m.machine(), u );
    w.indices = u;
    w.valuations.emplace_back( "state", state_assignment( m, s ) );
    w.valuations.emplace_back( "perceived", perceived_assignment( m, hat ) );
    w.state = s;
    w.state.insert( w.state.end(), hat.begin(), hat.end() );
    return w;
}

struct ConditionChunk
{
    std::map<IndexSet, Witness> first; // first failing pair per compartment
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
};

template <class Visit>
CheckReport scan_perceptions( const Model& m, const Uncertainty& eps, const std::string& kind, const CheckOptions& opts,
                              Visit visit )
{
    auto start = std::chrono::steady_clock::now();
    CheckReport r;
    r.kind = kind;
    r.model = m.machine().name;
    m.require_enumerable();
    try
    {
        eps.require_bound();
        Controller c( m, &eps, opts.jobs );
        auto chunks = parallel_chunks<ConditionChunk>( m.state_count(), opts.jobs, [ & ]( std::uint64_t b, std::uint64_t e ) {
            ConditionChunk ch;
            for ( auto k = b; k < e; ++k )
                visit( c, m.state_at( k ), ch );
            return ch;
        } );
        std::map<IndexSet, Witness> first;
        for ( auto& ch : chunks )
        {
            r.stats.states_checked += ch.checked;
            r.stats.violations += ch.violations;
            for ( auto& [ u, w ] : ch.first )
                first.emplace( u, std::move( w ) );
        }
        std::vector<IndexSet> order;
        for ( const auto& kv : first )
            order.push_back( kv.first );
        std::sort( order.begin(), order.end(), []( const IndexSet& a, const IndexSet& b ) {
            return a.size() != b.size() ? a.size() < b.size() : a < b;
        } );
        for ( const auto& u : order )
            r.witnesses.push_back( first.at( u ) );
        r.verdict = r.stats.violations ? Verdict::Fails : Verdict::Holds;
    }
    catch ( const EvalError& e )
    {
        r.verdict = Verdict::Unknown;
        r.reason = e.what();
    }
    r.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    return r;
}

// For every perception ^s with compartment u and every s ∈ ε(^s): some tuple of
// parameters, each compatible with every state of the ball enabling its event,
// has a common successor of all actions of u at s.
inline CheckReport thm1_condition( const Model& m, const Uncertainty& eps, const CheckOptions& opts = {} )
{
    return scan_perceptions( m, eps, "thm1-condition", opts, [ & ]( const Controller& c, const Valuation& hat, ConditionChunk& ch ) {
        auto u = c.compartment( hat );
        auto ball = eps.ball( hat );
        std::vector<ParamSet> pe;
        for ( int i : u )
            pe.push_back( c.par_eps( i, hat ) );
        bool compatible = std::none_of( pe.begin(), pe.end(), []( const ParamSet& p ) { return p.empty(); } );
        for ( const auto& s : ball )
        {
            ++ch.checked;
            bool ok = compatible;
            if ( ok )
            {
                std::optional<std::vector<Valuation>> common;
                for ( std::size_t k = 0; k < u.size() && ( !common || !common->empty() ); ++k )
                {
                    std::set<Valuation> reach;
                    for ( const auto& p : pe[ k ] )
                        for ( auto& t : m.action_solutions( m.controller( u[ k ] ), s, p ) )
                            reach.insert( std::move( t ) );
                    std::vector<Valuation> next( reach.begin(), reach.end() );
                    common = common ? [ & ] {
                        std::vector<Valuation> out;
                        std::set_intersection( common->begin(), common->end(), next.begin(), next.end(), std::back_inserter( out ) );
                        return out;
                    }()
                                    : next;
                }
                ok = common && !common->empty();
            }
            if ( ok )
                continue;
            ++ch.violations;
            if ( !ch.first.count( u ) )
                ch.first.emplace( u, pair_witness( m, compatible ? "no-common-action" : "no-compatible-parameter", u, s, hat ) );
        }
    } );
}

// For every perception ^s with compartment u: some event of u has a parameter
// whose action is nonempty and safe from every state of the ball.
inline CheckReport thm2_condition( const Model& m, const Uncertainty& eps, const CheckOptions& opts = {} )
{
    return scan_perceptions( m, eps, "thm2-condition", opts, [ & ]( const Controller& c, const Valuation& hat, ConditionChunk& ch ) {
        auto u = c.compartment( hat );
        auto ball = eps.ball( hat );
        ch.checked += ball.size();
        bool ok = std::any_of( u.begin(), u.end(), [ & ]( int i ) { return !c.safpar( i, hat, opts.safpar_prose ).empty(); } );
        if ( ok )
            return;
        ch.violations += ball.size();
        if ( !ch.first.count( u ) )
            ch.first.emplace( u, pair_witness( m, "no-safe-parameter", u, ball.front(), hat ) );
    } );
}

// ---------------------------------------------------------------------------
// Guard and action synthesis.

class Synthesizer
{
    const Machine& _m;
    const UncertaintySpec& _spec;
    std::vector<const EventDef*> _ctrl;
    std::set<std::string> _taken;
    std::vector<std::vector<std::string>> _slot; // parameter names per controller index (0-based)
    // Binder names for quantified copies of the parameters: q_ in enabledness,
    // w_ in the bot conditions of slots.
    std::map<std::string, std::vector<std::string>> _binders;
    bool _prose;

    std::string fresh( const std::string& base )
    {
        std::string n = base;
        for ( int k = 1; _taken.count( n ); ++k )
            n = base + std::to_string( k );
        _taken.insert( n );
        return n;
    }

    [[nodiscard]] UncertaintyClause::Kind kind( const std::string& var ) const
    {
        const auto* c = _spec.clause_for( var );
        return c ? c->kind : UncertaintyClause::Kind::Exact;
    }

    // Unprimed true variables read at a potential true state: ~x, or ^x when exact.
    [[nodiscard]] std::map<RefKey, Expr> tilde_sub() const
    {
        std::map<RefKey, Expr> sub;
        for ( const auto& v : _m.vars )
            sub[ { v.name, false } ] = kind( v.name ) == UncertaintyClause::Kind::Exact ? ex::ref( hat_of( v.name ) )
                                                                                     : ex::ref( tilde_of( v.name ) );
        return sub;
    }

    [[nodiscard]] Expr tilde( const Expr& e ) const { return substitute( e, tilde_sub() ); }

    [[nodiscard]] std::map<RefKey, Expr> param_sub( int i, const std::vector<Expr>& values ) const
    {
        std::map<RefKey, Expr> sub;
        const auto& ps = _ctrl[ static_cast<std::size_t>( i - 1 ) ]->params;
        for ( std::size_t k = 0; k < ps.size(); ++k )
            sub[ { ps[ k ].name, false } ] = values[ k ];
        return sub;
    }

    [[nodiscard]] std::vector<Expr> slot_refs( int i ) const
    {
        std::vector<Expr> out;
        for ( const auto& n : _slot[ static_cast<std::size_t>( i - 1 ) ] )
            out.push_back( ex::ref( n ) );
        return out;
    }

    [[nodiscard]] const EventDef& event( int i ) const { return *_ctrl[ static_cast<std::size_t>( i - 1 ) ]; }

    [[nodiscard]] bool has_real_params( int i ) const { return !event( i ).params.empty(); }

    static QuantDomain param_range( const Domain& d )
    {
        return d.is_int() ? ex::range( ex::lit( d.lo ), ex::lit( d.hi ) ) : ex::members( d.members );
    }

    // Quantifies body over the potential true states ~s ∈ ε(^s).
    [[nodiscard]] Expr ball( Op q, Expr body ) const
    {
        if ( _spec.relation )
        {
            auto r = tilde( *_spec.relation );
            body = q == Op::Forall ? ex::implies( r, body ) : ex::and_( r, body );
        }
        for ( auto it = _m.vars.rbegin(); it != _m.vars.rend(); ++it )
        {
            const auto* c = _spec.clause_for( it->name );
            if ( !c || c->kind == UncertaintyClause::Kind::Exact )
                continue;
            QuantDomain d = ex::implicit();
            if ( c->kind == UncertaintyClause::Kind::Within )
            {
                auto h = ex::ref( hat_of( it->name ) );
                d = ex::range( ex::sub( h, c->radius.to_expr() ), ex::add( h, c->radius.to_expr() ) );
            }
            body = ex::quant( q, tilde_of( it->name ), false, d, body );
        }
        return body;
    }

    // Splits the guard of event i into conjuncts free of its parameters and the rest.
    [[nodiscard]] std::pair<std::vector<Expr>, std::vector<Expr>> split_guard( int i ) const
    {
        std::vector<Expr> state, param;
        for ( const auto& c : flatten_and( event( i ).guard ) )
        {
            bool uses = std::any_of( event( i ).params.begin(), event( i ).params.end(),
                                     [ & ]( const ParamDecl& p ) { return mentions_name( c, p.name ); } );
            ( uses ? param : state ).push_back( c );
        }
        return { state, param };
    }

    // Existentially quantifies fresh copies of event i's parameters over body(values).
    template <class Body>
    Expr exists_params( int i, const std::string& tag, Body body )
    {
        const auto& ps = event( i ).params;
        const auto& names = _binders.at( tag + std::to_string( i ) );
        std::vector<Expr> values;
        for ( const auto& n : names )
            values.push_back( ex::ref( n ) );
        Expr e = body( values );
        for ( std::size_t k = ps.size(); k-- > 0; )
            e = ex::exists( names[ k ], param_range( ps[ k ].domain ), e );
        return e;
    }

    // Event i enabled at the potential true state.
    Expr enabled( int i )
    {
        auto [ state, param ] = split_guard( i );
        std::vector<Expr> parts;
        for ( const auto& c : state )
            parts.push_back( tilde( c ) );
        if ( !param.empty() )
            parts.push_back( exists_params( i, "q", [ & ]( const std::vector<Expr>& v ) {
                return tilde( substitute( ex::conj( param ), param_sub( i, v ) ) );
            } ) );
        return ex::conj( parts );
    }

    // Successor constraints over primed true variables, with states and
    // parameters already substituted, turned into a predicate over the
    // remaining free names. Equalities x' = e fix x' to e (inside the
    // domain of x); other primed variables become ~x' binders.
    struct Successor
    {
        std::vector<Expr> fixed_domain; // e within the domain of x, per fixed x
        std::map<RefKey, Expr> fixed;   // x' -> e, or x' -> ~x' when left open
        std::vector<std::string> open;  // variables left to binders
        std::vector<Expr> rest;         // remaining constraints
    };

    [[nodiscard]] Successor successor( std::vector<Expr> parts ) const
    {
        Successor s;
        for ( const auto& v : _m.vars )
        {
            RefKey key{ v.name, true };
            auto defines = [ & ]( const Expr& c ) -> Expr {
                if ( c->op != Op::Eq )
                    return nullptr;
                for ( int side : { 0, 1 } )
                {
                    const auto& x = c->kids[ static_cast<std::size_t>( side ) ];
                    const auto& e = c->kids[ static_cast<std::size_t>( 1 - side ) ];
                    if ( x->op == Op::Ref && x->primed && x->name == v.name )
                    {
                        auto refs = free_refs( e );
                        if ( std::none_of( refs.begin(), refs.end(), []( const RefKey& r ) { return r.second; } ) )
                            return e;
                    }
                }
                return nullptr;
            };
            auto it = std::find_if( parts.begin(), parts.end(), [ & ]( const Expr& c ) { return defines( c ) != nullptr; } );
            Expr value;
            if ( it != parts.end() )
            {
                value = defines( *it );
                parts.erase( it );
                if ( v.domain.is_int() )
                {
                    s.fixed_domain.push_back( ex::le( ex::lit( v.domain.lo ), value ) );
                    s.fixed_domain.push_back( ex::le( value, ex::lit( v.domain.hi ) ) );
                }
            }
            else
            {
                value = ex::ref( tilde_of( v.name ), true );
                s.open.push_back( v.name );
            }
            s.fixed[ key ] = value;
            std::map<RefKey, Expr> one{ { key, value } };
            for ( auto& p : parts )
                p = substitute( p, one );
        }
        s.rest = parts;
        return s;
    }

    [[nodiscard]] Expr over_open( Op q, const Successor& s, Expr body ) const
    {
        for ( auto it = s.open.rbegin(); it != s.open.rend(); ++it )
            body = ex::quant( q, tilde_of( *it ), true, ex::implicit(), body );
        return body;
    }

    // Conjuncts of A_i at the potential true state with the given parameters.
    [[nodiscard]] std::vector<Expr> action_at_tilde( int i, const std::vector<Expr>& values ) const
    {
        std::vector<Expr> out;
        for ( const auto& c : flatten_and( event( i ).action ) )
            out.push_back( tilde( substitute( c, param_sub( i, values ) ) ) );
        return out;
    }

    // values ∈ par_eps_i(^s).
    Expr compatible( int i, const std::vector<Expr>& values )
    {
        auto [ state, param ] = split_guard( i );
        if ( param.empty() )
            return ex::tru();
        auto body = tilde( substitute( ex::conj( param ), param_sub( i, values ) ) );
        return simplify( ball( Op::Forall, ex::implies( enabled( i ), body ) ) );
    }

    // values ∈ safpar_i(^s, I^S).
    Expr safe( int i, const std::vector<Expr>& values )
    {
        auto s = successor( action_at_tilde( i, values ) );
        std::map<RefKey, Expr> after;
        for ( const auto& v : _m.vars )
            after[ { v.name, false } ] = s.fixed.at( { v.name, true } );
        auto inv = substitute( _m.safety, after );
        std::vector<Expr> parts = s.fixed_domain;
        auto rest = ex::conj( s.rest );
        if ( s.open.empty() )
        {
            parts.push_back( rest );
            parts.push_back( inv );
        }
        else
        {
            parts.push_back( over_open( Op::Exists, s, rest ) );
            parts.push_back( over_open( Op::Forall, s, ex::implies( rest, inv ) ) );
        }
        Expr body = ex::conj( parts );
        if ( _prose )
            body = ex::implies( enabled( i ), body );
        return simplify( ball( Op::Forall, body ) );
    }

    // Parameter slot of event i: bot exactly when no value satisfies member.
    template <class Member>
    Expr slot_constraint( int i, Member member )
    {
        auto refs = slot_refs( i );
        std::vector<Expr> parts;
        for ( std::size_t k = 1; k < refs.size(); ++k )
            parts.push_back( ex::iff( ex::eq( refs[ 0 ], ex::bot() ), ex::eq( refs[ k ], ex::bot() ) ) );
        Expr none;
        if ( has_real_params( i ) )
            none = ex::not_( exists_params( i, "w", [ & ]( const std::vector<Expr>& v ) { return member( v ); } ) );
        else
            none = ex::fls();
        parts.push_back( ex::implies( ex::eq( refs[ 0 ], ex::bot() ), simplify( none ) ) );
        parts.push_back( ex::implies( ex::ne( refs[ 0 ], ex::bot() ), has_real_params( i ) ? member( refs ) : ex::tru() ) );
        return ex::conj( parts );
    }

    Expr compartment_guard( const IndexSet& u )
    {
        std::vector<Expr> en;
        for ( int i : u )
            en.push_back( enabled( i ) );
        std::vector<Expr> parts{ simplify( ball( Op::Forall, ex::disj( en ) ) ) };
        for ( std::size_t k = 0; k < u.size(); ++k )
            parts.push_back( simplify( ball( Op::Exists, en[ k ] ) ) );
        return ex::conj( parts );
    }

    [[nodiscard]] Expr not_bot( int i ) const { return ex::ne( slot_refs( i ).front(), ex::bot() ); }

    [[nodiscard]] std::vector<ParamDecl> slot_params( const IndexSet& u ) const
    {
        std::vector<ParamDecl> out;
        for ( int i : u )
        {
            const auto& names = _slot[ static_cast<std::size_t>( i - 1 ) ];
            const auto& ps = event( i ).params;
            if ( ps.empty() )
                out.push_back( { names.front(), Domain::interval( 0, 0 ), true, {} } );
            for ( std::size_t k = 0; k < ps.size(); ++k )
                out.push_back( { names[ k ], ps[ k ].domain, true, ps[ k ].pos } );
        }
        return out;
    }

    // A_i over the true state with slot parameters.
    [[nodiscard]] Expr action( int i ) const
    {
        return has_real_params( i ) ? substitute( event( i ).action, param_sub( i, slot_refs( i ) ) ) : event( i ).action;
    }

public:
    Synthesizer( const Machine& original, const UncertaintySpec& spec, bool safpar_prose = false )
            : _m( original ), _spec( spec ), _ctrl( original.controller_events() ), _prose( safpar_prose )
    {
        for ( const auto& v : original.vars )
        {
            _taken.insert( v.name );
            _taken.insert( hat_of( v.name ) );
            if ( !v.domain.is_int() )
                _taken.insert( v.domain.members.begin(), v.domain.members.end() );
        }
        for ( const auto& c : original.consts )
            _taken.insert( c.name );
        for ( const auto& c : spec.consts )
            _taken.insert( c.name );
        for ( const auto& e : original.events )
        {
            collect_identifiers( e.guard, _taken );
            collect_identifiers( e.action, _taken );
        }
        collect_identifiers( original.safety, _taken );

        // Parameter names are kept when unique among controller events.
        std::map<std::string, int> uses;
        for ( const auto* e : _ctrl )
            for ( const auto& p : e->params )
                ++uses[ p.name ];
        for ( const auto* e : _ctrl )
        {
            std::vector<std::string> slot;
            if ( e->params.empty() )
                slot.push_back( fresh( "sel_" + e->name ) );
            for ( const auto& p : e->params )
                slot.push_back( uses[ p.name ] == 1 ? p.name : fresh( e->name + "_" + p.name ) );
            _slot.push_back( slot );
        }
        for ( const std::string tag : { "q", "w" } )
            for ( std::size_t i = 0; i < _ctrl.size(); ++i )
            {
                auto& names = _binders[ tag + std::to_string( i + 1 ) ];
                for ( const auto& p : _ctrl[ i ]->params )
                    names.push_back( fresh( tag + "_" + p.name ) );
            }
    }

    EventDef preserving( const IndexSet& u )
    {
        EventDef d;
        d.kind = EventKind::Controller;
        d.name = hetero_name( _m, u );
        d.params = slot_params( u );
        for ( int i : u )
            d.sources.push_back( event( i ).name );

        std::vector<Expr> guard = flatten_and( compartment_guard( u ) );
        for ( int i : u )
            guard.push_back( slot_constraint( i, [ & ]( const std::vector<Expr>& v ) { return compatible( i, v ); } ) );

        std::vector<Expr> act;
        std::vector<Expr> bots;
        for ( int i : u )
        {
            bots.push_back( not_bot( i ) );
            for ( auto& c : action_at_tilde( i, has_real_params( i ) ? slot_refs( i ) : std::vector<Expr>{} ) )
                act.push_back( std::move( c ) );
        }
        auto s = successor( act );
        std::vector<Expr> common = s.fixed_domain;
        common.push_back( over_open( Op::Exists, s, ex::conj( s.rest ) ) );
        guard.push_back( ex::and_( ex::conj( bots ), simplify( ball( Op::Forall, ex::conj( common ) ) ) ) );
        d.guard = ex::conj( guard );

        std::vector<Expr> effect = bots;
        for ( int i : u )
            effect.push_back( action( i ) );
        effect.push_back( primed_membership( _m, _spec ) );
        d.action = ex::conj( effect );
        return d;
    }

    EventDef repurposing( const IndexSet& u )
    {
        EventDef d;
        d.kind = EventKind::Controller;
        d.name = hetero_name( _m, u );
        d.params = slot_params( u );
        for ( int i : u )
            d.sources.push_back( event( i ).name );

        std::vector<Expr> guard = flatten_and( compartment_guard( u ) );
        std::vector<Expr> some;
        std::vector<Expr> choices;
        for ( int i : u )
        {
            guard.push_back( slot_constraint( i, [ & ]( const std::vector<Expr>& v ) { return safe( i, v ); } ) );
            some.push_back( not_bot( i ) );
            choices.push_back( ex::and_( not_bot( i ), action( i ) ) );
        }
        guard.push_back( ex::disj( some ) );
        d.guard = ex::conj( guard );
        d.action = ex::and_( ex::disj( choices ), primed_membership( _m, _spec ) );
        return d;
    }
};

// ---------------------------------------------------------------------------

struct RobustifyOptions
{
    CheckOptions check;
    bool prune = true;
    Limits limits;
};

struct RobustifyOutcome
{
    Derivation method = Derivation::Preserving;
    CheckReport condition;
    std::optional<Machine> machine; // present iff the condition holds
    Machine candidate;              // the generated machine regardless of the condition
    std::vector<IndexSet> pruned;
    std::vector<IndexSet> retained;
};

inline std::string robust_name( const Machine& m, const UncertaintySpec& spec, Derivation d )
{
    return injected_name( m, spec ) + ( d == Derivation::Preserving ? "_pR" : "_rR" );
}

inline RobustifyOutcome robustify( Derivation method, const Machine& original, const UncertaintySpec& spec,
                                   const Bindings& bindings = {}, const RobustifyOptions& opts = {} )
{
    auto pm = inject( original, spec, bindings );
    Model model( original, bindings, opts.limits );
    Uncertainty eps( model, spec, bindings );

    RobustifyOutcome out;
    out.method = method;
    out.condition = method == Derivation::Preserving ? thm1_condition( model, eps, opts.check )
                                                     : thm2_condition( model, eps, opts.check );

    auto candidates = all_compartments( model.controller_count() );
    std::set<IndexSet> occurring;
    bool known = false;
    if ( opts.prune )
    {
        try
        {
            eps.require_bound();
            Controller c( model, &eps, opts.check.jobs );
            for ( auto& [ u, _ ] : compartments( c, model, opts.check.jobs ).occurrences )
                occurring.insert( u );
            known = true;
        }
        catch ( const EvalError& )
        {
        }
    }

    Machine m = pm;
    m.name = robust_name( original, spec, method );
    m.provenance = { method, original.name, spec.name };
    m.events.clear();
    for ( const auto& e : pm.events )
        if ( e.kind == EventKind::Plant )
            m.events.push_back( e );
    Synthesizer synth( original, spec, opts.check.safpar_prose );
    for ( const auto& u : candidates )
    {
        if ( known && !occurring.count( u ) )
        {
            out.pruned.push_back( u );
            continue;
        }
        out.retained.push_back( u );
        m.events.push_back( method == Derivation::Preserving ? synth.preserving( u ) : synth.repurposing( u ) );
    }
    out.candidate = m;
    if ( out.condition.holds() )
        out.machine = m;
    return out;
}

inline RobustifyOutcome robustify_preserving( const Machine& original, const UncertaintySpec& spec,
                                              const Bindings& bindings = {}, const RobustifyOptions& opts = {} )
{
    return robustify( Derivation::Preserving, original, spec, bindings, opts );
}

inline RobustifyOutcome robustify_repurposing( const Machine& original, const UncertaintySpec& spec,
                                               const Bindings& bindings = {}, const RobustifyOptions& opts = {} )
{
    return robustify( Derivation::Repurposing, original, spec, bindings, opts );
}

// Entry points taking the injected machine; it must be the injection of
// original under spec.
inline RobustifyOutcome robustify_preserving( const Machine& pm, const Machine& original, const UncertaintySpec& spec,
                                              const Bindings& bindings = {}, const RobustifyOptions& opts = {} )
{
    if ( !is_injection_of( pm, original, spec ) )
        throw ValidationError( "machine '" + pm.name + "' is not the injection of '" + original.name + "' under '" + spec.name + "'" );
    return robustify_preserving( original, spec, bindings, opts );
}

inline RobustifyOutcome robustify_repurposing( const Machine& pm, const Machine& original, const UncertaintySpec& spec,
                                               const Bindings& bindings = {}, const RobustifyOptions& opts = {} )
{
    if ( !is_injection_of( pm, original, spec ) )
        throw ValidationError( "machine '" + pm.name + "' is not the injection of '" + original.name + "' under '" + spec.name + "'" );
    return robustify_repurposing( original, spec, bindings, opts );
}

} // namespace robustikit
