#pragma once

#include "robustikit/core/model.hpp"

#include <string>
#include <vector>

namespace robustikit::dsl
{

namespace detail
{

enum Level : int
{
    LQuant = 0,
    LIff = 1,
    LImplies = 2,
    LOr = 3,
    LAnd = 4,
    LNot = 5,
    LCmp = 6,
    LAdd = 7,
    LMul = 8,
    LUnary = 9,
    LAtom = 10,
};

inline int level( const Expr& e )
{
    switch ( e->op )
    {
    case Op::Forall:
    case Op::Exists:
        return LQuant;
    case Op::Iff:
        return LIff;
    case Op::Implies:
        return LImplies;
    case Op::Or:
        return LOr;
    case Op::And:
        return LAnd;
    case Op::Not:
        return LNot;
    case Op::Eq:
    case Op::Ne:
    case Op::Lt:
    case Op::Le:
        return LCmp;
    case Op::Add:
    case Op::Sub:
        return LAdd;
    case Op::Mul:
        return LMul;
    case Op::Neg:
        return LUnary;
    case Op::IntLit:
        return e->ival < 0 ? LUnary : LAtom;
    default:
        return LAtom;
    }
}

inline const char* op_text( Op op )
{
    switch ( op )
    {
    case Op::Add:
        return "+";
    case Op::Sub:
        return "-";
    case Op::Mul:
        return "*";
    case Op::Eq:
        return "=";
    case Op::Ne:
        return "!=";
    case Op::Lt:
        return "<";
    case Op::Le:
        return "<=";
    case Op::And:
        return "and";
    case Op::Or:
        return "or";
    case Op::Implies:
        return "=>";
    case Op::Iff:
        return "<=>";
    default:
        return "?";
    }
}

} // namespace detail

inline std::string print_expr( const Expr& e );

inline std::string print_operand( const Expr& e, bool parens )
{
    auto s = print_expr( e );
    return parens ? "(" + s + ")" : s;
}

inline std::string print_domain( const Domain& d )
{
    if ( d.is_int() )
        return "int[" + std::to_string( d.lo ) + ".." + std::to_string( d.hi ) + "]";
    std::string out = "{";
    for ( std::size_t i = 0; i < d.members.size(); ++i )
        out += ( i ? ", " : "" ) + d.members[ i ];
    return out + "}";
}

inline std::string print_expr( const Expr& e )
{
    using namespace detail;
    switch ( e->op )
    {
    case Op::IntLit:
        return std::to_string( e->ival );
    case Op::BoolLit:
        return e->ival ? "true" : "false";
    case Op::Bottom:
        return "bot";
    case Op::Ref:
        return e->name + ( e->primed ? "'" : "" );
    case Op::Neg:
    {
        const auto& k = e->kids[ 0 ];
        return "-" + print_operand( k, level( k ) < LAtom || k->op == Op::IntLit );
    }
    case Op::Not:
    {
        const auto& k = e->kids[ 0 ];
        return "not " + print_operand( k, level( k ) < LNot );
    }
    case Op::Forall:
    case Op::Exists:
    {
        std::string out = e->op == Op::Forall ? "forall " : "exists ";
        out += e->name + ( e->primed ? "'" : "" );
        switch ( e->qdom.kind )
        {
        case QuantDomain::Kind::Range:
            out += " in [" + print_expr( e->qdom.lo ) + " .. " + print_expr( e->qdom.hi ) + "]";
            break;
        case QuantDomain::Kind::Set:
            out += " in " + print_domain( Domain::enumeration( e->qdom.members ) );
            break;
        case QuantDomain::Kind::Implicit:
            break;
        }
        return out + " . " + print_expr( e->kids[ 0 ] );
    }
    default:
        break;
    }

    // Binary operators. Quantifiers extend as far right as possible, so they
    // are always parenthesized as operands.
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
    default: // iff and comparisons do not chain
        pa = level( a ) <= lv;
        pb = level( b ) <= lv;
        break;
    }
    if ( e->op == Op::Mul || e->op == Op::Add || e->op == Op::Sub )
    {
        // A negative literal on the right reads fine after a binary operator.
        if ( b->op == Op::IntLit )
            pb = false;
    }
    return print_operand( a, pa ) + " " + op_text( e->op ) + " " + print_operand( b, pb );
}

// Left spine of a conjunction, in order.
inline std::vector<Expr> left_spine_conjuncts( const Expr& e )
{
    std::vector<Expr> rev;
    Expr cur = e;
    while ( cur->op == Op::And )
    {
        rev.push_back( cur->kids[ 1 ] );
        cur = cur->kids[ 0 ];
    }
    rev.push_back( cur );
    return { rev.rbegin(), rev.rend() };
}

// Predicate after a clause keyword; long top-level conjunctions go one
// conjunct per line.
inline std::string print_clause( const std::string& indent, const std::string& keyword, const Expr& e,
                                 const std::string& trailer = "" )
{
    auto one_line = indent + keyword + " " + print_expr( e );
    auto parts = left_spine_conjuncts( e );
    if ( one_line.size() <= 100 || parts.size() < 2 )
        return one_line + trailer + "\n";
    std::string out = indent + keyword + " " + print_operand( parts[ 0 ], detail::level( parts[ 0 ] ) < detail::LAnd );
    for ( std::size_t i = 1; i < parts.size(); ++i )
        out += "\n" + indent + "  and " + print_operand( parts[ i ], detail::level( parts[ i ] ) <= detail::LAnd );
    return out + trailer + "\n";
}

inline std::string print_machine( const Machine& m )
{
    std::string out = "machine " + m.name + "\n";
    if ( m.provenance.method != Derivation::None )
        out += "  derived " + std::string( derivation_name( m.provenance.method ) ) + " from "
               + m.provenance.source_machine + " with " + m.provenance.uncertainty + "\n";
    for ( const auto& c : m.consts )
        out += "  const " + c.name + " : int[" + std::to_string( c.lo ) + ".." + std::to_string( c.hi ) + "]\n";
    for ( const auto& v : m.vars )
        out += "  var " + v.name + " : " + print_domain( v.domain ) + "\n";
    out += print_clause( "  ", "init", m.init );
    out += print_clause( "  ", "safety", m.safety, m.is_paired() ? "  // events may violate this" : "" );
    if ( m.uncertainty )
        out += print_clause( "  ", "uncertainty", *m.uncertainty );
    for ( const auto& e : m.events )
    {
        out += std::string( "  " ) + ( e.kind == EventKind::Plant ? "plant" : "ctrl" ) + " event " + e.name + "\n";
        if ( !e.sources.empty() )
        {
            out += "    sources ";
            for ( std::size_t i = 0; i < e.sources.size(); ++i )
                out += ( i ? ", " : "" ) + e.sources[ i ];
            out += "\n";
        }
        for ( const auto& p : e.params )
            out += "    param " + p.name + " : " + print_domain( p.domain ) + ( p.allows_bottom ? " | bot" : "" ) + "\n";
        out += print_clause( "    ", "guard", e.guard );
        out += print_clause( "    ", "action", e.action );
    }
    return out;
}

inline std::string print_uncertainty( const UncertaintySpec& u )
{
    std::string out = "uncertainty " + u.name + " for " + u.machine + "\n";
    for ( const auto& c : u.consts )
        out += "  const " + c.name + " : int[" + std::to_string( c.lo ) + ".." + std::to_string( c.hi ) + "]\n";
    for ( const auto& c : u.clauses )
    {
        out += "  " + c.var;
        switch ( c.kind )
        {
        case UncertaintyClause::Kind::Exact:
            out += " exact\n";
            break;
        case UncertaintyClause::Kind::Any:
            out += " any\n";
            break;
        case UncertaintyClause::Kind::Within:
            out += " within " + ( c.radius.is_symbolic() ? c.radius.symbol : std::to_string( c.radius.literal ) ) + "\n";
            break;
        }
    }
    if ( u.relation )
        out += print_clause( "  ", "relation", *u.relation );
    return out;
}

} // namespace robustikit::dsl
