#pragma once

// Event-B flavored text for reading next to hand-written models. Not meant to
// be loaded by Event-B tools: perceived and potential-true variables keep
// readable suffixes and ⊥ is printed as is.

#include "robustikit/dsl/printer.hpp"

#include <map>
#include <string>
#include <vector>

namespace robustikit::eventb
{

inline std::string identifier( const std::string& name, bool primed )
{
    std::string base = name;
    if ( is_hat_name( name ) )
        base = strip_prefix( name ) + "_hat";
    else if ( is_tilde_name( name ) )
        base = strip_prefix( name ) + "_tilde";
    return base + ( primed ? "'" : "" );
}

inline const char* op_symbol( Op op )
{
    switch ( op )
    {
    case Op::Add:
        return "+";
    case Op::Sub:
        return "−";
    case Op::Mul:
        return "∗";
    case Op::Eq:
        return "=";
    case Op::Ne:
        return "≠";
    case Op::Lt:
        return "<";
    case Op::Le:
        return "≤";
    case Op::And:
        return "∧";
    case Op::Or:
        return "∨";
    case Op::Implies:
        return "⇒";
    case Op::Iff:
        return "⇔";
    default:
        return "?";
    }
}

inline std::string expr( const Expr& e );

inline std::string operand( const Expr& e, bool parens )
{
    auto s = expr( e );
    return parens ? "(" + s + ")" : s;
}

inline std::string set_text( const Domain& d, bool bottom = false )
{
    std::string out;
    if ( d.is_int() )
        out = std::to_string( d.lo ) + " ‥ " + std::to_string( d.hi );
    else
    {
        out = "{";
        for ( std::size_t i = 0; i < d.members.size(); ++i )
            out += ( i ? ", " : "" ) + d.members[ i ];
        out += "}";
    }
    return bottom ? "(" + out + ") ∪ {⊥}" : out;
}

inline std::string expr( const Expr& e )
{
    using namespace dsl::detail;
    switch ( e->op )
    {
    case Op::IntLit:
        return std::to_string( e->ival );
    case Op::BoolLit:
        return e->ival ? "TRUE" : "FALSE";
    case Op::Bottom:
        return "⊥";
    case Op::Ref:
        return identifier( e->name, e->primed );
    case Op::Neg:
    {
        const auto& k = e->kids[ 0 ];
        return "−" + operand( k, level( k ) < LAtom || k->op == Op::IntLit );
    }
    case Op::Not:
    {
        const auto& k = e->kids[ 0 ];
        return "¬" + operand( k, level( k ) < LAtom );
    }
    case Op::Forall:
    case Op::Exists:
    {
        const bool all = e->op == Op::Forall;
        auto x = identifier( e->name, e->primed );
        const auto& body = e->kids[ 0 ];
        std::string range;
        if ( e->qdom.kind == QuantDomain::Kind::Range )
            range = x + " ∈ " + expr( e->qdom.lo ) + " ‥ " + expr( e->qdom.hi );
        else if ( e->qdom.kind == QuantDomain::Kind::Set )
            range = x + " ∈ " + set_text( Domain::enumeration( e->qdom.members ) );
        std::string out = std::string( all ? "∀" : "∃" ) + x + "·";
        if ( range.empty() )
            return out + expr( body );
        if ( all )
            return out + range + " ⇒ " + operand( body, level( body ) <= LImplies );
        return out + range + " ∧ " + operand( body, level( body ) < LAnd );
    }
    default:
        break;
    }

    const int lv = level( e );
    const auto& a = e->kids[ 0 ];
    const auto& b = e->kids[ 1 ];
    bool pa = false;
    bool pb = false;
    switch ( e->op )
    {
    case Op::And:
    case Op::Or:
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
        pa = level( a ) < lv;
        pb = level( b ) <= lv;
        break;
    case Op::Implies:
        pa = level( a ) <= lv;
        pb = level( b ) < lv;
        break;
    default:
        pa = level( a ) <= lv;
        pb = level( b ) <= lv;
        break;
    }
    // Event-B does not mix ∧ and ∨ without parentheses.
    if ( e->op == Op::And || e->op == Op::Or )
    {
        pa = pa || ( ( a->op == Op::And || a->op == Op::Or ) && a->op != e->op );
        pb = pb || ( ( b->op == Op::And || b->op == Op::Or ) && b->op != e->op );
    }
    if ( ( e->op == Op::Add || e->op == Op::Sub || e->op == Op::Mul ) && b->op == Op::IntLit )
        pb = false;
    return operand( a, pa ) + " " + op_symbol( e->op ) + " " + operand( b, pb );
}

inline std::vector<std::string> labelled( const std::string& label, const Expr& e, bool split )
{
    std::vector<std::string> out;
    auto parts = split ? dsl::left_spine_conjuncts( e ) : std::vector<Expr>{ e };
    for ( std::size_t i = 0; i < parts.size(); ++i )
        out.push_back( label + std::to_string( i + 1 ) + ": " + expr( parts[ i ] ) );
    return out;
}

inline std::string event_text( const Machine& m, const EventDef& e )
{
    std::string out = "  " + e.name + " ≙";
    std::string note = e.kind == EventKind::Plant ? "plant" : "controller";
    if ( e.sources.size() > 1 )
    {
        note += ", from ";
        for ( std::size_t i = 0; i < e.sources.size(); ++i )
            note += ( i ? " and " : "" ) + e.sources[ i ];
    }
    out += "  /* " + note + " */\n";
    if ( !e.params.empty() )
    {
        out += "    ANY";
        for ( const auto& p : e.params )
            out += " " + p.name;
        out += "\n";
    }
    out += "    WHERE\n";
    for ( const auto& p : e.params )
        out += "      typ_" + p.name + ": " + p.name + " ∈ " + set_text( p.domain, p.allows_bottom ) + "\n";
    for ( const auto& g : labelled( "grd", e.guard, true ) )
        out += "      " + g + "\n";
    out += "    THEN\n";
    std::string frame;
    for ( std::size_t i = 0; i < m.vars.size(); ++i )
        frame += ( i ? ", " : "" ) + identifier( m.vars[ i ].name, false );
    out += "      act1: " + frame + " :∣ " + expr( e.action ) + "\n";
    out += "    END\n";
    return out;
}

inline std::string machine_text( const Machine& m )
{
    std::string out = "MACHINE " + m.name + "\n";
    if ( m.provenance.method != Derivation::None )
        out += "  /* " + std::string( derivation_name( m.provenance.method ) ) + " from " + m.provenance.source_machine
               + " with " + m.provenance.uncertainty + " */\n";
    if ( !m.consts.empty() )
    {
        out += "CONSTANTS\n";
        for ( const auto& c : m.consts )
            out += "  " + c.name + " ∈ " + std::to_string( c.lo ) + " ‥ " + std::to_string( c.hi ) + "\n";
    }
    out += "VARIABLES\n ";
    for ( const auto& v : m.vars )
        out += " " + identifier( v.name, false );
    out += "\nINVARIANTS\n";
    for ( const auto& v : m.vars )
        out += "  typ_" + identifier( v.name, false ) + ": " + identifier( v.name, false ) + " ∈ " + set_text( v.domain ) + "\n";
    out += "  safety: " + expr( m.safety ) + "\n";
    if ( m.uncertainty )
        out += "  uncertainty: " + expr( *m.uncertainty ) + "\n";
    out += "EVENTS\n  INITIALISATION ≙\n    THEN\n      act1: ";
    std::string frame;
    for ( std::size_t i = 0; i < m.vars.size(); ++i )
        frame += ( i ? ", " : "" ) + identifier( m.vars[ i ].name, false );
    std::map<RefKey, Expr> primed;
    for ( const auto& v : m.vars )
        primed[ { v.name, false } ] = ex::ref( v.name, true );
    out += frame + " :∣ " + expr( substitute( m.init, primed ) ) + "\n    END\n";
    for ( const auto& e : m.events )
        out += event_text( m, e );
    return out + "END\n";
}

} // namespace robustikit::eventb
