#pragma once

#include "robustikit/core/error.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace robustikit
{

enum class Op : std::uint8_t
{
    IntLit,
    BoolLit,
    Bottom,
    Ref, // variable, primed variable, parameter, constant, binder or enum constant
    Neg,
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Forall,
    Exists,
};

struct Node;
using Expr = std::shared_ptr<const Node>;

// Range of a bounded quantifier. Implicit is only legal for tilde binders,
// which range over the declared domain of the variable they shadow.
struct QuantDomain
{
    enum class Kind : std::uint8_t
    {
        Implicit,
        Range,
        Set
    };

    Kind kind = Kind::Implicit;
    Expr lo;
    Expr hi;
    std::vector<std::string> members;
};

struct Node
{
    Op op = Op::BoolLit;
    std::int64_t ival = 0;
    std::string name;  // Ref target, or quantifier binder
    bool primed = false;
    std::vector<Expr> kids;
    QuantDomain qdom;
    SourcePos pos;
};

bool structurally_equal( const Expr& a, const Expr& b );

inline bool structurally_equal( const QuantDomain& a, const QuantDomain& b )
{
    if ( a.kind != b.kind || a.members != b.members )
        return false;
    if ( a.kind == QuantDomain::Kind::Range )
        return structurally_equal( a.lo, b.lo ) && structurally_equal( a.hi, b.hi );
    return true;
}

// Source positions are ignored.
inline bool structurally_equal( const Expr& a, const Expr& b )
{
    if ( a == b )
        return true;
    if ( !a || !b )
        return false;
    if ( a->op != b->op || a->ival != b->ival || a->name != b->name || a->primed != b->primed
         || a->kids.size() != b->kids.size() )
        return false;
    if ( ( a->op == Op::Forall || a->op == Op::Exists ) && !structurally_equal( a->qdom, b->qdom ) )
        return false;
    for ( std::size_t i = 0; i < a->kids.size(); ++i )
        if ( !structurally_equal( a->kids[ i ], b->kids[ i ] ) )
            return false;
    return true;
}

inline bool is_binary_op( Op op )
{
    switch ( op )
    {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Eq:
    case Op::Ne:
    case Op::Lt:
    case Op::Le:
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
        return true;
    default:
        return false;
    }
}

inline bool is_quantifier( Op op ) { return op == Op::Forall || op == Op::Exists; }

inline bool is_hat_name( const std::string& n ) { return !n.empty() && n.front() == '^'; }
inline bool is_tilde_name( const std::string& n ) { return !n.empty() && n.front() == '~'; }
inline std::string hat_of( const std::string& n ) { return "^" + n; }
inline std::string tilde_of( const std::string& n ) { return "~" + n; }
inline std::string strip_prefix( const std::string& n )
{
    return ( is_hat_name( n ) || is_tilde_name( n ) ) ? n.substr( 1 ) : n;
}

namespace ex
{

inline Expr make( Node n ) { return std::make_shared<const Node>( std::move( n ) ); }

inline Expr lit( std::int64_t v )
{
    Node n;
    n.op = Op::IntLit;
    n.ival = v;
    return make( std::move( n ) );
}

inline Expr boolean( bool b )
{
    Node n;
    n.op = Op::BoolLit;
    n.ival = b ? 1 : 0;
    return make( std::move( n ) );
}

inline Expr tru() { return boolean( true ); }
inline Expr fls() { return boolean( false ); }

inline Expr bot()
{
    Node n;
    n.op = Op::Bottom;
    return make( std::move( n ) );
}

inline Expr ref( std::string name, bool primed = false )
{
    Node n;
    n.op = Op::Ref;
    n.name = std::move( name );
    n.primed = primed;
    return make( std::move( n ) );
}

inline Expr unary( Op op, Expr a )
{
    Node n;
    n.op = op;
    n.kids = { std::move( a ) };
    return make( std::move( n ) );
}

inline Expr binary( Op op, Expr a, Expr b )
{
    Node n;
    n.op = op;
    n.kids = { std::move( a ), std::move( b ) };
    return make( std::move( n ) );
}

inline Expr neg( Expr a ) { return unary( Op::Neg, std::move( a ) ); }
inline Expr add( Expr a, Expr b ) { return binary( Op::Add, std::move( a ), std::move( b ) ); }
inline Expr sub( Expr a, Expr b ) { return binary( Op::Sub, std::move( a ), std::move( b ) ); }
inline Expr mul( Expr a, Expr b ) { return binary( Op::Mul, std::move( a ), std::move( b ) ); }
inline Expr eq( Expr a, Expr b ) { return binary( Op::Eq, std::move( a ), std::move( b ) ); }
inline Expr ne( Expr a, Expr b ) { return binary( Op::Ne, std::move( a ), std::move( b ) ); }
inline Expr lt( Expr a, Expr b ) { return binary( Op::Lt, std::move( a ), std::move( b ) ); }
inline Expr le( Expr a, Expr b ) { return binary( Op::Le, std::move( a ), std::move( b ) ); }
inline Expr not_( Expr a ) { return unary( Op::Not, std::move( a ) ); }
inline Expr and_( Expr a, Expr b ) { return binary( Op::And, std::move( a ), std::move( b ) ); }
inline Expr or_( Expr a, Expr b ) { return binary( Op::Or, std::move( a ), std::move( b ) ); }
inline Expr implies( Expr a, Expr b ) { return binary( Op::Implies, std::move( a ), std::move( b ) ); }
inline Expr iff( Expr a, Expr b ) { return binary( Op::Iff, std::move( a ), std::move( b ) ); }

// Left-associated chain; empty conjunction is true.
inline Expr conj( const std::vector<Expr>& xs )
{
    if ( xs.empty() )
        return tru();
    Expr acc = xs.front();
    for ( std::size_t i = 1; i < xs.size(); ++i )
        acc = and_( acc, xs[ i ] );
    return acc;
}

inline Expr disj( const std::vector<Expr>& xs )
{
    if ( xs.empty() )
        return fls();
    Expr acc = xs.front();
    for ( std::size_t i = 1; i < xs.size(); ++i )
        acc = or_( acc, xs[ i ] );
    return acc;
}

inline Expr quant( Op op, std::string binder, bool primed, QuantDomain dom, Expr body )
{
    Node n;
    n.op = op;
    n.name = std::move( binder );
    n.primed = primed;
    n.qdom = std::move( dom );
    n.kids = { std::move( body ) };
    return make( std::move( n ) );
}

inline QuantDomain range( Expr lo, Expr hi )
{
    QuantDomain d;
    d.kind = QuantDomain::Kind::Range;
    d.lo = std::move( lo );
    d.hi = std::move( hi );
    return d;
}

inline QuantDomain members( std::vector<std::string> ms )
{
    QuantDomain d;
    d.kind = QuantDomain::Kind::Set;
    d.members = std::move( ms );
    return d;
}

inline QuantDomain implicit() { return {}; }

inline Expr forall( std::string binder, QuantDomain dom, Expr body, bool primed = false )
{
    return quant( Op::Forall, std::move( binder ), primed, std::move( dom ), std::move( body ) );
}

inline Expr exists( std::string binder, QuantDomain dom, Expr body, bool primed = false )
{
    return quant( Op::Exists, std::move( binder ), primed, std::move( dom ), std::move( body ) );
}

} // namespace ex

// Key of a reference: identifier plus prime flag.
using RefKey = std::pair<std::string, bool>;

// Capture-avoiding only in the sense that binders shadow the substitution;
// callers pick fresh binder names.
inline Expr substitute( const Expr& e, const std::map<RefKey, Expr>& sub )
{
    if ( !e || sub.empty() )
        return e;
    switch ( e->op )
    {
    case Op::IntLit:
    case Op::BoolLit:
    case Op::Bottom:
        return e;
    case Op::Ref:
    {
        auto it = sub.find( { e->name, e->primed } );
        return it == sub.end() ? e : it->second;
    }
    case Op::Forall:
    case Op::Exists:
    {
        Node n = *e;
        if ( n.qdom.kind == QuantDomain::Kind::Range )
        {
            n.qdom.lo = substitute( n.qdom.lo, sub );
            n.qdom.hi = substitute( n.qdom.hi, sub );
        }
        if ( sub.count( { e->name, e->primed } ) )
        {
            auto inner = sub;
            inner.erase( { e->name, e->primed } );
            n.kids[ 0 ] = substitute( n.kids[ 0 ], inner );
        }
        else
            n.kids[ 0 ] = substitute( n.kids[ 0 ], sub );
        return ex::make( std::move( n ) );
    }
    default:
    {
        Node n = *e;
        bool changed = false;
        for ( auto& k : n.kids )
        {
            auto nk = substitute( k, sub );
            changed = changed || nk != k;
            k = std::move( nk );
        }
        return changed ? ex::make( std::move( n ) ) : e;
    }
    }
}

// Free references (binders excluded).
inline void collect_free_refs( const Expr& e, std::set<RefKey>& out, std::set<RefKey> bound = {} )
{
    if ( !e )
        return;
    if ( e->op == Op::Ref )
    {
        if ( !bound.count( { e->name, e->primed } ) )
            out.insert( { e->name, e->primed } );
        return;
    }
    if ( is_quantifier( e->op ) )
    {
        if ( e->qdom.kind == QuantDomain::Kind::Range )
        {
            collect_free_refs( e->qdom.lo, out, bound );
            collect_free_refs( e->qdom.hi, out, bound );
        }
        bound.insert( { e->name, e->primed } );
        collect_free_refs( e->kids[ 0 ], out, bound );
        return;
    }
    for ( const auto& k : e->kids )
        collect_free_refs( k, out, bound );
}

inline std::set<RefKey> free_refs( const Expr& e )
{
    std::set<RefKey> out;
    collect_free_refs( e, out );
    return out;
}

inline bool mentions_name( const Expr& e, const std::string& name )
{
    for ( const auto& [ n, p ] : free_refs( e ) )
        if ( n == name )
            return true;
    return false;
}

// Every identifier occurring anywhere, binders included. Used to pick fresh names.
inline void collect_identifiers( const Expr& e, std::set<std::string>& out )
{
    if ( !e )
        return;
    if ( e->op == Op::Ref || is_quantifier( e->op ) )
        out.insert( e->name );
    if ( is_quantifier( e->op ) && e->qdom.kind == QuantDomain::Kind::Range )
    {
        collect_identifiers( e->qdom.lo, out );
        collect_identifiers( e->qdom.hi, out );
    }
    for ( const auto& k : e->kids )
        collect_identifiers( k, out );
}

inline std::vector<Expr> flatten_and( const Expr& e )
{
    std::vector<Expr> out;
    std::vector<Expr> stack{ e };
    while ( !stack.empty() )
    {
        auto cur = stack.back();
        stack.pop_back();
        if ( cur->op == Op::And )
        {
            stack.push_back( cur->kids[ 1 ] );
            stack.push_back( cur->kids[ 0 ] );
        }
        else
            out.push_back( cur );
    }
    return out;
}

inline std::vector<Expr> flatten_or( const Expr& e )
{
    std::vector<Expr> out;
    std::vector<Expr> stack{ e };
    while ( !stack.empty() )
    {
        auto cur = stack.back();
        stack.pop_back();
        if ( cur->op == Op::Or )
        {
            stack.push_back( cur->kids[ 1 ] );
            stack.push_back( cur->kids[ 0 ] );
        }
        else
            out.push_back( cur );
    }
    return out;
}

// Constant folding over literals and boolean identities. Semantics preserving
// for every environment in which the input evaluates without error.
inline Expr simplify( const Expr& e )
{
    if ( !e )
        return e;
    auto is_true = []( const Expr& x ) { return x->op == Op::BoolLit && x->ival == 1; };
    auto is_false = []( const Expr& x ) { return x->op == Op::BoolLit && x->ival == 0; };
    auto is_const_atom = []( const Expr& x ) {
        return x->op == Op::IntLit || x->op == Op::BoolLit || x->op == Op::Bottom;
    };

    switch ( e->op )
    {
    case Op::IntLit:
    case Op::BoolLit:
    case Op::Bottom:
    case Op::Ref:
        return e;
    case Op::Forall:
    case Op::Exists:
    {
        Node n = *e;
        if ( n.qdom.kind == QuantDomain::Kind::Range )
        {
            n.qdom.lo = simplify( n.qdom.lo );
            n.qdom.hi = simplify( n.qdom.hi );
        }
        n.kids[ 0 ] = simplify( n.kids[ 0 ] );
        // A vacuous body does not depend on the binder; ranges are never empty
        // for tilde binders but may be for explicit ones, so only fold the
        // direction that is safe for empty ranges.
        if ( e->op == Op::Forall && is_true( n.kids[ 0 ] ) )
            return ex::tru();
        if ( e->op == Op::Exists && is_false( n.kids[ 0 ] ) )
            return ex::fls();
        return ex::make( std::move( n ) );
    }
    default:
        break;
    }

    std::vector<Expr> k;
    for ( const auto& c : e->kids )
        k.push_back( simplify( c ) );

    switch ( e->op )
    {
    case Op::Not:
        if ( k[ 0 ]->op == Op::BoolLit )
            return ex::boolean( k[ 0 ]->ival == 0 );
        return ex::not_( k[ 0 ] );
    case Op::And:
        if ( is_false( k[ 0 ] ) || is_false( k[ 1 ] ) )
            return ex::fls();
        if ( is_true( k[ 0 ] ) )
            return k[ 1 ];
        if ( is_true( k[ 1 ] ) )
            return k[ 0 ];
        return ex::and_( k[ 0 ], k[ 1 ] );
    case Op::Or:
        if ( is_true( k[ 0 ] ) || is_true( k[ 1 ] ) )
            return ex::tru();
        if ( is_false( k[ 0 ] ) )
            return k[ 1 ];
        if ( is_false( k[ 1 ] ) )
            return k[ 0 ];
        return ex::or_( k[ 0 ], k[ 1 ] );
    case Op::Implies:
        if ( is_false( k[ 0 ] ) || is_true( k[ 1 ] ) )
            return ex::tru();
        if ( is_true( k[ 0 ] ) )
            return k[ 1 ];
        if ( is_false( k[ 1 ] ) )
            return simplify( ex::not_( k[ 0 ] ) );
        return ex::implies( k[ 0 ], k[ 1 ] );
    case Op::Iff:
        if ( k[ 0 ]->op == Op::BoolLit && k[ 1 ]->op == Op::BoolLit )
            return ex::boolean( k[ 0 ]->ival == k[ 1 ]->ival );
        return ex::iff( k[ 0 ], k[ 1 ] );
    case Op::Eq:
    case Op::Ne:
    {
        bool same = structurally_equal( k[ 0 ], k[ 1 ] );
        bool both_const = is_const_atom( k[ 0 ] ) && is_const_atom( k[ 1 ] );
        // Equal enum-constant references fold too; distinct references may be
        // variables, so only literal atoms fold to false.
        if ( same && ( both_const || k[ 0 ]->op == Op::Ref ) && !k[ 0 ]->primed )
        {
            // A reference is equal to itself whatever it denotes.
            return ex::boolean( e->op == Op::Eq );
        }
        if ( both_const )
            return ex::boolean( ( e->op == Op::Eq ) == same );
        return ex::binary( e->op, k[ 0 ], k[ 1 ] );
    }
    case Op::Lt:
    case Op::Le:
        if ( k[ 0 ]->op == Op::IntLit && k[ 1 ]->op == Op::IntLit )
            return ex::boolean( e->op == Op::Lt ? k[ 0 ]->ival < k[ 1 ]->ival : k[ 0 ]->ival <= k[ 1 ]->ival );
        return ex::binary( e->op, k[ 0 ], k[ 1 ] );
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
        if ( k[ 0 ]->op == Op::IntLit && k[ 1 ]->op == Op::IntLit )
        {
            std::int64_t a = k[ 0 ]->ival, b = k[ 1 ]->ival, r = 0;
            bool overflow = e->op == Op::Add   ? __builtin_add_overflow( a, b, &r )
                            : e->op == Op::Sub ? __builtin_sub_overflow( a, b, &r )
                                               : __builtin_mul_overflow( a, b, &r );
            if ( !overflow )
                return ex::lit( r );
        }
        if ( e->op != Op::Mul && k[ 1 ]->op == Op::IntLit && k[ 1 ]->ival == 0 )
            return k[ 0 ];
        return ex::binary( e->op, k[ 0 ], k[ 1 ] );
    case Op::Neg:
        if ( k[ 0 ]->op == Op::IntLit && k[ 0 ]->ival != INT64_MIN )
            return ex::lit( -k[ 0 ]->ival );
        return ex::neg( k[ 0 ] );
    default:
        return e;
    }
}

} // namespace robustikit
