#pragma once

// SMT-LIB v2 scripts for the enumeration checks. Every script asks for a
// violation, so unsat means the check holds. Enum constants become their
// constant-table ids and ⊥ of a parameter becomes one below its range.

#include "robustikit/core/semantics.hpp"
#include "robustikit/core/uncertainty.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace robustikit::smt
{

inline std::string int_text( std::int64_t v )
{
    return v < 0 ? "(- " + std::to_string( -v ) + ")" : std::to_string( v );
}

inline std::string all_of( const std::vector<std::string>& xs )
{
    if ( xs.empty() )
        return "true";
    if ( xs.size() == 1 )
        return xs[ 0 ];
    std::string out = "(and";
    for ( const auto& x : xs )
        out += " " + x;
    return out + ")";
}

inline std::string any_of( const std::vector<std::string>& xs )
{
    if ( xs.empty() )
        return "false";
    if ( xs.size() == 1 )
        return xs[ 0 ];
    std::string out = "(or";
    for ( const auto& x : xs )
        out += " " + x;
    return out + ")";
}

struct Symbol
{
    std::string smt;
    const Domain* domain = nullptr;
    bool bottom = false;
};

// How names resolve inside one formula.
struct Frame
{
    std::map<RefKey, Symbol> vars;
    std::map<std::string, Symbol> params;
};

inline std::string quantify( const char* q, const std::vector<Symbol>& syms, const std::string& body )
{
    if ( syms.empty() )
        return body;
    std::string out = std::string( "(" ) + q + " (";
    for ( std::size_t i = 0; i < syms.size(); ++i )
        out += ( i ? " (" : "(" ) + syms[ i ].smt + " Int)";
    return out + ") " + body + ")";
}

class Encoder
{
    const ConstantTable& _table;
    const Machine& _m;
    std::map<std::string, std::optional<std::int64_t>> _consts;
    std::vector<std::pair<RefKey, Symbol>> _binders;
    std::vector<Domain> _binder_domains;

    std::int64_t enum_id( const std::string& member ) const
    {
        auto id = _table.find( member );
        if ( !id )
            throw ValidationError( "unknown enum constant '" + member + "'" );
        return *id;
    }

    static std::string binder_symbol( const Expr& e )
    {
        if ( is_tilde_name( e->name ) )
            return "t_" + strip_prefix( e->name ) + ( e->primed ? "_next" : "" );
        return "b_" + e->name;
    }

    const Symbol* resolve( const Expr& e, const Frame& f ) const
    {
        for ( auto it = _binders.rbegin(); it != _binders.rend(); ++it )
            if ( it->first.first == e->name && it->first.second == e->primed )
                return &it->second;
        if ( auto it = f.vars.find( { e->name, e->primed } ); it != f.vars.end() )
            return &it->second;
        if ( auto it = f.params.find( e->name ); !e->primed && it != f.params.end() )
            return &it->second;
        return nullptr;
    }

    std::string bottom_compare( const Expr& e, const Frame& f )
    {
        const auto& a = e->kids[ 0 ];
        const auto& b = e->kids[ 1 ];
        const Expr& other = a->op == Op::Bottom ? b : a;
        const Symbol* s = other->op == Op::Ref ? resolve( other, f ) : nullptr;
        if ( !s || !s->bottom )
            throw ValidationError( "bot compared with something other than a parameter that allows it" );
        auto test = "(= " + s->smt + " " + int_text( bottom_value( *s ) ) + ")";
        return e->op == Op::Eq ? test : "(not " + test + ")";
    }

    std::string quantifier( const Expr& e, const Frame& f )
    {
        const bool universal = e->op == Op::Forall;
        Symbol b{ binder_symbol( e ), nullptr, false };
        const Domain* base = nullptr;
        if ( is_tilde_name( e->name ) )
        {
            const auto* v = _m.find_var( strip_prefix( e->name ) );
            if ( !v )
                throw ValidationError( "tilde binder '" + e->name + "' does not shadow a state variable" );
            base = &v->domain;
        }
        std::vector<std::string> range;
        switch ( e->qdom.kind )
        {
        case QuantDomain::Kind::Range:
            range.push_back( "(<= " + term( e->qdom.lo, f ) + " " + b.smt + ")" );
            range.push_back( "(<= " + b.smt + " " + term( e->qdom.hi, f ) + ")" );
            if ( base )
            {
                range.push_back( "(<= " + int_text( base->lo ) + " " + b.smt + ")" );
                range.push_back( "(<= " + b.smt + " " + int_text( base->hi ) + ")" );
            }
            break;
        case QuantDomain::Kind::Set:
        {
            std::vector<std::string> alts;
            for ( const auto& m : e->qdom.members )
                if ( !base || std::find( base->members.begin(), base->members.end(), m ) != base->members.end() )
                    alts.push_back( "(= " + b.smt + " " + int_text( enum_id( m ) ) + ")" );
            range.push_back( any_of( alts ) );
            break;
        }
        case QuantDomain::Kind::Implicit:
            if ( !base )
                throw ValidationError( "binder '" + e->name + "' needs an explicit range" );
            range.push_back( in_domain( b.smt, *base, false ) );
            break;
        }
        _binders.emplace_back( RefKey{ e->name, e->primed }, b );
        auto body = term( e->kids[ 0 ], f );
        _binders.pop_back();
        auto guard = all_of( range );
        return universal ? quantify( "forall", { b }, "(=> " + guard + " " + body + ")" )
                         : quantify( "exists", { b }, "(and " + guard + " " + body + ")" );
    }

public:
    Encoder( const Model& model, const std::vector<ConstDecl>& extra_consts = {}, const Bindings& bindings = {} )
            : _table( model.constants() ), _m( model.machine() )
    {
        auto value = [ & ]( const std::string& n ) -> std::optional<std::int64_t> {
            if ( auto it = bindings.find( n ); it != bindings.end() )
                return it->second;
            if ( auto it = model.bindings().find( n ); it != model.bindings().end() )
                return it->second;
            return std::nullopt;
        };
        for ( const auto& c : _m.consts )
            _consts[ c.name ] = value( c.name );
        for ( const auto& c : extra_consts )
            _consts[ c.name ] = value( c.name );
    }

    [[nodiscard]] const std::map<std::string, std::optional<std::int64_t>>& consts() const { return _consts; }

    static std::int64_t bottom_value( const Symbol& s ) { return s.domain->is_int() ? s.domain->lo - 1 : -1; }

    [[nodiscard]] std::string in_domain( const std::string& sym, const Domain& d, bool bottom ) const
    {
        if ( d.is_int() )
            return "(and (<= " + int_text( d.lo - ( bottom ? 1 : 0 ) ) + " " + sym + ") (<= " + sym + " " + int_text( d.hi ) + "))";
        std::vector<std::string> alts;
        for ( const auto& m : d.members )
            alts.push_back( "(= " + sym + " " + int_text( enum_id( m ) ) + ")" );
        if ( bottom )
            alts.push_back( "(= " + sym + " " + int_text( -1 ) + ")" );
        return any_of( alts );
    }

    [[nodiscard]] std::string in_domain( const Symbol& s ) const { return in_domain( s.smt, *s.domain, s.bottom ); }

    [[nodiscard]] std::string in_domain( const std::vector<Symbol>& syms ) const
    {
        std::vector<std::string> parts;
        for ( const auto& s : syms )
            parts.push_back( in_domain( s ) );
        return all_of( parts );
    }

    std::string term( const Expr& e, const Frame& f )
    {
        switch ( e->op )
        {
        case Op::IntLit:
            return int_text( e->ival );
        case Op::BoolLit:
            return e->ival ? "true" : "false";
        case Op::Bottom:
            throw ValidationError( "bot may only be compared with a parameter" );
        case Op::Ref:
        {
            if ( const auto* s = resolve( e, f ) )
                return s->smt;
            if ( auto it = _consts.find( e->name ); !e->primed && it != _consts.end() )
                return it->second ? int_text( *it->second ) : "c_" + e->name;
            if ( auto id = _table.find( e->name ); !e->primed && id )
                return int_text( *id );
            throw ValidationError( "unknown identifier '" + e->name + ( e->primed ? "'" : "" ) + "'" );
        }
        case Op::Neg:
            return "(- " + term( e->kids[ 0 ], f ) + ")";
        case Op::Not:
            return "(not " + term( e->kids[ 0 ], f ) + ")";
        case Op::Forall:
        case Op::Exists:
            return quantifier( e, f );
        default:
            break;
        }
        if ( ( e->op == Op::Eq || e->op == Op::Ne )
             && ( e->kids[ 0 ]->op == Op::Bottom || e->kids[ 1 ]->op == Op::Bottom ) )
            return bottom_compare( e, f );
        auto a = term( e->kids[ 0 ], f );
        auto b = term( e->kids[ 1 ], f );
        switch ( e->op )
        {
        case Op::Add:
            return "(+ " + a + " " + b + ")";
        case Op::Sub:
            return "(- " + a + " " + b + ")";
        case Op::Mul:
            return "(* " + a + " " + b + ")";
        case Op::Eq:
        case Op::Iff:
            return "(= " + a + " " + b + ")";
        case Op::Ne:
            return "(not (= " + a + " " + b + "))";
        case Op::Lt:
            return "(< " + a + " " + b + ")";
        case Op::Le:
            return "(<= " + a + " " + b + ")";
        case Op::And:
            return "(and " + a + " " + b + ")";
        case Op::Or:
            return "(or " + a + " " + b + ")";
        case Op::Implies:
            return "(=> " + a + " " + b + ")";
        default:
            throw ValidationError( "cannot encode expression" );
        }
    }
};

// Symbols for the variables of m under a prefix scheme.
inline std::vector<Symbol> state_symbols( const Machine& m, const std::string& plain, const std::string& hat,
                                          const std::string& suffix = "" )
{
    std::vector<Symbol> out;
    for ( const auto& v : m.vars )
    {
        auto base = is_hat_name( v.name ) ? hat + strip_prefix( v.name ) : plain + v.name;
        out.push_back( { base + suffix, &v.domain, false } );
    }
    return out;
}

inline std::vector<Symbol> param_symbols( const EventDef& e, const std::string& prefix )
{
    std::vector<Symbol> out;
    for ( const auto& p : e.params )
        out.push_back( { prefix + e.name + "_" + p.name, &p.domain, p.allows_bottom } );
    return out;
}

inline void bind_state( Frame& f, const Machine& m, const std::vector<Symbol>& now, const std::vector<Symbol>* next = nullptr )
{
    for ( std::size_t i = 0; i < m.vars.size(); ++i )
    {
        f.vars[ { m.vars[ i ].name, false } ] = now[ i ];
        if ( next )
            f.vars[ { m.vars[ i ].name, true } ] = ( *next )[ i ];
    }
}

inline void bind_params( Frame& f, const EventDef& e, const std::vector<Symbol>& syms )
{
    for ( std::size_t i = 0; i < e.params.size(); ++i )
        f.params[ e.params[ i ].name ] = syms[ i ];
}

struct Script
{
    std::string query;
    std::string model;
    std::vector<std::string> notes;
    std::vector<std::string> declarations;
    std::vector<std::string> assertions;

    void declare( const Symbol& s ) { declarations.push_back( "(declare-const " + s.smt + " Int)" ); }

    [[nodiscard]] std::string text() const
    {
        std::string out = "; robustikit query: " + query + "\n; model: " + model + "\n";
        for ( const auto& n : notes )
            out += "; " + n + "\n";
        out += "; sat means a violation exists, unsat means the check holds\n";
        out += "(set-logic LIA)\n";
        for ( const auto& d : declarations )
            out += d + "\n";
        for ( const auto& a : assertions )
            out += "(assert " + a + ")\n";
        return out + "(check-sat)\n";
    }
};

inline void declare_unbound( Script& sc, const Encoder& enc, const std::vector<ConstDecl>& decls )
{
    for ( const auto& c : decls )
    {
        auto it = enc.consts().find( c.name );
        if ( it == enc.consts().end() || it->second )
            continue;
        sc.declarations.push_back( "(declare-const c_" + c.name + " Int)" );
        sc.assertions.push_back( "(and (<= " + int_text( c.lo ) + " c_" + c.name + ") (<= c_" + c.name + " "
                                 + int_text( c.hi ) + "))" );
    }
}

// Some parameter valuation satisfies the guard of e.
inline std::string enabled( Encoder& enc, const Frame& state, const EventDef& e, const std::string& prefix )
{
    auto ps = param_symbols( e, prefix );
    Frame f = state;
    bind_params( f, e, ps );
    auto body = all_of( { enc.in_domain( ps ), enc.term( e.guard, f ) } );
    return quantify( "exists", ps, body );
}

inline Script state_script( const Model& m, const std::string& query, Encoder& enc, std::vector<Symbol>& now, Frame& f )
{
    Script sc;
    sc.query = query;
    sc.model = m.machine().name;
    now = state_symbols( m.machine(), "v_", "h_" );
    for ( const auto& s : now )
        sc.declare( s );
    declare_unbound( sc, enc, m.machine().consts );
    sc.assertions.push_back( enc.in_domain( now ) );
    bind_state( f, m.machine(), now );
    return sc;
}

inline std::string emit_partitioning( const Model& m )
{
    Encoder enc( m );
    std::vector<Symbol> now;
    Frame f;
    auto sc = state_script( m, "partitioning", enc, now, f );
    if ( m.machine().uncertainty )
        sc.assertions.push_back( enc.term( *m.machine().uncertainty, f ) );
    std::string count = "(+";
    for ( const auto* e : m.machine().controller_events() )
        count += " (ite " + enabled( enc, f, *e, "p_" ) + " 1 0)";
    count += m.machine().controller_events().size() == 1 ? " 0)" : ")";
    sc.assertions.push_back( "(not (= 1 " + count + "))" );
    return sc.text();
}

inline std::string emit_preservation( const Model& m )
{
    const auto& mach = m.machine();
    Encoder enc( m );
    std::vector<Symbol> now;
    Frame f;
    auto sc = state_script( m, "invariant-preservation", enc, now, f );
    auto next = state_symbols( mach, "v_", "h_", "_next" );
    Frame after;
    bind_state( after, mach, next );

    auto good = [ & ]( const Frame& at ) {
        std::vector<std::string> parts{ enc.term( mach.safety, at ) };
        if ( mach.uncertainty )
            parts.push_back( enc.term( *mach.uncertainty, at ) );
        return all_of( parts );
    };
    std::vector<std::string> bad{ "(and " + enc.term( mach.init, f ) + " (not " + good( f ) + "))" };
    for ( const auto& e : mach.events )
    {
        auto ps = param_symbols( e, "p_" );
        Frame step = f;
        bind_state( step, mach, now, &next );
        bind_params( step, e, ps );
        auto vars = ps;
        vars.insert( vars.end(), next.begin(), next.end() );
        auto body = all_of( { enc.in_domain( ps ), enc.term( e.guard, step ), enc.in_domain( next ), enc.term( e.action, step ),
                              "(not " + good( after ) + ")" } );
        bad.push_back( "(and " + good( f ) + " " + quantify( "exists", vars, body ) + ")" );
    }
    sc.assertions.push_back( any_of( bad ) );
    return sc.text();
}

inline std::string emit_feasibility( const Model& m )
{
    const auto& mach = m.machine();
    Encoder enc( m );
    std::vector<Symbol> now;
    Frame f;
    auto sc = state_script( m, "feasibility", enc, now, f );
    sc.assertions.push_back( enc.term( mach.safety, f ) );
    if ( mach.uncertainty )
        sc.assertions.push_back( enc.term( *mach.uncertainty, f ) );
    auto next = state_symbols( mach, "v_", "h_", "_next" );
    std::vector<std::string> bad;
    for ( const auto* e : mach.controller_events() )
    {
        auto ps = param_symbols( *e, "p_" );
        Frame step = f;
        bind_state( step, mach, now, &next );
        bind_params( step, *e, ps );
        auto some = quantify( "exists", next, all_of( { enc.in_domain( next ), enc.term( e->action, step ) } ) );
        bad.push_back( quantify( "exists", ps, all_of( { enc.in_domain( ps ), enc.term( e->guard, step ), "(not " + some + ")" } ) ) );
    }
    sc.assertions.push_back( any_of( bad ) );
    return sc.text();
}

// The true variables of robust are the first variables, named as in original.
inline std::string emit_forward_simulation( const Model& robust, const Model& original )
{
    const auto& rm = robust.machine();
    const auto& om = original.machine();
    Encoder enc( robust );
    Encoder orig( original );
    std::vector<Symbol> now;
    Frame f;
    auto sc = state_script( robust, "forward-simulation", enc, now, f );
    sc.model += " against " + om.name;
    if ( rm.uncertainty )
        sc.assertions.push_back( enc.term( *rm.uncertainty, f ) );
    auto next = state_symbols( rm, "v_", "h_", "_next" );

    const std::size_t n = om.vars.size();
    std::vector<Symbol> onow( now.begin(), now.begin() + static_cast<std::ptrdiff_t>( n ) );
    std::vector<Symbol> onext( next.begin(), next.begin() + static_cast<std::ptrdiff_t>( n ) );
    std::vector<std::string> steps;
    for ( const auto& e : om.events )
    {
        auto qs = param_symbols( e, "o_" );
        Frame g;
        bind_state( g, om, onow, &onext );
        bind_params( g, e, qs );
        steps.push_back( quantify( "exists", qs, all_of( { orig.in_domain( qs ), orig.term( e.guard, g ), orig.term( e.action, g ) } ) ) );
    }
    auto simulated = any_of( steps );

    std::vector<std::string> bad;
    for ( const auto& e : rm.events )
    {
        auto ps = param_symbols( e, "p_" );
        Frame step = f;
        bind_state( step, rm, now, &next );
        bind_params( step, e, ps );
        auto vars = ps;
        vars.insert( vars.end(), next.begin(), next.end() );
        bad.push_back( quantify( "exists", vars,
                                 all_of( { enc.in_domain( ps ), enc.term( e.guard, step ), enc.in_domain( next ),
                                           enc.term( e.action, step ), "(not " + simulated + ")" } ) ) );
    }
    sc.assertions.push_back( any_of( bad ) );
    return sc.text();
}

// Some perception ^s has compartment exactly u (1-based indices of m).
inline std::string emit_vacuity( const Model& m, const UncertaintySpec& spec, const std::vector<int>& u, const Bindings& bindings = {} )
{
    const auto& mach = m.machine();
    if ( mach.is_paired() )
        throw ValidationError( "vacuity is asked of the original machine, not '" + mach.name + "'" );
    Encoder enc( m, spec.consts, bindings );
    auto ctrl = mach.controller_events();
    for ( int i : u )
        if ( i < 1 || i > static_cast<int>( ctrl.size() ) )
            throw ValidationError( "controller index " + std::to_string( i ) + " out of range" );

    Script sc;
    sc.query = "vacuity";
    sc.model = mach.name + " with " + spec.name;
    std::string subset;
    for ( std::size_t k = 0; k < u.size(); ++k )
        subset += ( k ? "," : "" ) + std::to_string( u[ k ] );
    sc.notes.push_back( "subset: {" + subset + "}; sat gives a perception whose compartment is the subset" );

    auto hats = state_symbols( mach, "h_", "h_" );
    auto tildes = state_symbols( mach, "t_", "t_" );
    for ( const auto& s : hats )
        sc.declare( s );
    declare_unbound( sc, enc, mach.consts );
    declare_unbound( sc, enc, spec.consts );
    sc.assertions.push_back( enc.in_domain( hats ) );

    Frame f;
    bind_state( f, mach, tildes );
    for ( std::size_t i = 0; i < mach.vars.size(); ++i )
        f.vars[ { hat_of( mach.vars[ i ].name ), false } ] = hats[ i ];
    auto ball = all_of( { enc.in_domain( tildes ), enc.term( membership_predicate( mach, spec ), f ) } );

    std::vector<std::string> some;
    for ( int i : u )
    {
        auto en = enabled( enc, f, *ctrl[ static_cast<std::size_t>( i - 1 ) ], "p_" );
        sc.assertions.push_back( quantify( "exists", tildes, "(and " + ball + " " + en + ")" ) );
        some.push_back( en );
    }
    sc.assertions.push_back( quantify( "forall", tildes, "(=> " + ball + " " + any_of( some ) + ")" ) );
    return sc.text();
}

} // namespace robustikit::smt
