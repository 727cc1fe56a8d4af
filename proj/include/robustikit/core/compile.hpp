#pragma once

// Name resolution, type checking and lowering of Expr trees into a flat form
// that evaluates over a slot frame. Every model-level predicate goes through
// here, so this is also where most validation errors originate.

#include "robustikit/core/expr.hpp"
#include "robustikit/core/model.hpp"
#include "robustikit/core/value.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace robustikit
{

struct Limits
{
    std::uint64_t state_cap = 10'000'000;
    std::uint64_t quantifier_cap = 1'000'000;
    std::uint64_t param_cap = 10'000'000;
};

class ConstantTable
{
    std::vector<std::string> _names;
    std::map<std::string, int> _index;

public:
    int add( const std::string& n )
    {
        auto [ it, inserted ] = _index.emplace( n, static_cast<int>( _names.size() ) );
        if ( inserted )
            _names.push_back( n );
        return it->second;
    }

    [[nodiscard]] std::optional<int> find( const std::string& n ) const
    {
        auto it = _index.find( n );
        if ( it == _index.end() )
            return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::string& name( std::int64_t id ) const { return _names.at( static_cast<std::size_t>( id ) ); }
    [[nodiscard]] const std::vector<std::string>& names() const { return _names; }
    [[nodiscard]] std::size_t size() const { return _names.size(); }

    friend bool operator==( const ConstantTable& a, const ConstantTable& b ) { return a._names == b._names; }
};

inline std::vector<Value> domain_values( const Domain& d, const ConstantTable& table )
{
    std::vector<Value> out;
    if ( d.is_int() )
        for ( auto x = d.lo; x <= d.hi; ++x )
            out.push_back( Value::integer( x ) );
    else
        for ( const auto& m : d.members )
            out.push_back( Value::enumeration( *table.find( m ) ) );
    return out;
}

inline bool domain_contains( const Domain& d, const Value& v, const ConstantTable& table )
{
    if ( d.is_int() )
        return v.is_int() && v.v >= d.lo && v.v <= d.hi;
    if ( !v.is_enum() )
        return false;
    const auto& n = table.name( v.v );
    return std::find( d.members.begin(), d.members.end(), n ) != d.members.end();
}

enum class CType : std::uint8_t
{
    Int,
    Bool,
    Enum,
    Bottom
};

inline const char* ctype_name( CType t )
{
    switch ( t )
    {
    case CType::Int:
        return "int";
    case CType::Bool:
        return "bool";
    case CType::Enum:
        return "enum";
    default:
        return "bot";
    }
}

enum class COp : std::uint8_t
{
    Const,
    Slot,
    Unbound,
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
    ForallRange,
    ExistsRange,
    ForallSet,
    ExistsSet,
};

struct CNode
{
    COp op = COp::Const;
    int a = -1;
    int b = -1;
    int c = -1;
    int slot = -1;
    Value val;
    bool clip = false; // tilde binder over an int variable: intersect with its domain
    std::int64_t clip_lo = 0;
    std::int64_t clip_hi = 0;
    int set_off = 0;
    int set_len = 0;
};

using Env = std::vector<Value>;

// A lowered expression forest; several roots may share one code object.
struct Code
{
    std::vector<CNode> nodes;
    std::vector<Value> sets;
    std::vector<std::string> unbound; // names of unbound symbolic constants
    Limits limits;

    [[nodiscard]] Value eval( int i, Env& env ) const
    {
        const CNode& n = nodes[ static_cast<std::size_t>( i ) ];
        switch ( n.op )
        {
        case COp::Const:
            return n.val;
        case COp::Slot:
            return env[ static_cast<std::size_t>( n.slot ) ];
        case COp::Unbound:
            throw EvalError( "symbolic constant '" + unbound[ static_cast<std::size_t>( n.slot ) ] + "' is unbound" );
        case COp::Neg:
        {
            auto x = eval( n.a, env ).as_int();
            if ( x == INT64_MIN )
                throw EvalError( "integer overflow" );
            return Value::integer( -x );
        }
        case COp::Add:
        case COp::Sub:
        case COp::Mul:
        {
            auto x = eval( n.a, env ).as_int();
            auto y = eval( n.b, env ).as_int();
            std::int64_t r = 0;
            bool overflow = n.op == COp::Add   ? __builtin_add_overflow( x, y, &r )
                            : n.op == COp::Sub ? __builtin_sub_overflow( x, y, &r )
                                               : __builtin_mul_overflow( x, y, &r );
            if ( overflow )
                throw EvalError( "integer overflow" );
            return Value::integer( r );
        }
        case COp::Eq:
            return Value::boolean( eval( n.a, env ) == eval( n.b, env ) );
        case COp::Ne:
            return Value::boolean( eval( n.a, env ) != eval( n.b, env ) );
        case COp::Lt:
            return Value::boolean( eval( n.a, env ).as_int() < eval( n.b, env ).as_int() );
        case COp::Le:
            return Value::boolean( eval( n.a, env ).as_int() <= eval( n.b, env ).as_int() );
        case COp::Not:
            return Value::boolean( !eval( n.a, env ).as_bool() );
        case COp::And:
            return Value::boolean( eval( n.a, env ).as_bool() && eval( n.b, env ).as_bool() );
        case COp::Or:
            return Value::boolean( eval( n.a, env ).as_bool() || eval( n.b, env ).as_bool() );
        case COp::Implies:
            return Value::boolean( !eval( n.a, env ).as_bool() || eval( n.b, env ).as_bool() );
        case COp::Iff:
            return Value::boolean( eval( n.a, env ).as_bool() == eval( n.b, env ).as_bool() );
        case COp::ForallRange:
        case COp::ExistsRange:
        {
            auto lo = eval( n.a, env ).as_int();
            auto hi = eval( n.b, env ).as_int();
            if ( n.clip )
            {
                lo = std::max( lo, n.clip_lo );
                hi = std::min( hi, n.clip_hi );
            }
            if ( hi >= lo && static_cast<std::uint64_t>( hi - lo ) >= limits.quantifier_cap )
                throw EvalError( "quantifier range exceeds the evaluation limit" );
            const bool universal = n.op == COp::ForallRange;
            auto& slot = env[ static_cast<std::size_t>( n.slot ) ];
            for ( auto x = lo; x <= hi; ++x )
            {
                slot = Value::integer( x );
                if ( eval( n.c, env ).as_bool() != universal )
                    return Value::boolean( !universal );
            }
            return Value::boolean( universal );
        }
        case COp::ForallSet:
        case COp::ExistsSet:
        {
            const bool universal = n.op == COp::ForallSet;
            for ( int k = 0; k < n.set_len; ++k )
            {
                env[ static_cast<std::size_t>( n.slot ) ] = sets[ static_cast<std::size_t>( n.set_off + k ) ];
                if ( eval( n.c, env ).as_bool() != universal )
                    return Value::boolean( !universal );
            }
            return Value::boolean( universal );
        }
        }
        return Value::boolean( false );
    }

    [[nodiscard]] bool contains_slot( int i, int slot ) const
    {
        const CNode& n = nodes[ static_cast<std::size_t>( i ) ];
        if ( n.op == COp::Slot )
            return n.slot == slot;
        for ( int k : { n.a, n.b, n.c } )
            if ( k >= 0 && contains_slot( k, slot ) )
                return true;
        return false;
    }

    // Whether node i is an affine integer function of the given slot.
    [[nodiscard]] bool affine_in( int i, int slot ) const
    {
        const CNode& n = nodes[ static_cast<std::size_t>( i ) ];
        switch ( n.op )
        {
        case COp::Const:
        case COp::Slot:
        case COp::Unbound:
            return true;
        case COp::Neg:
            return affine_in( n.a, slot );
        case COp::Add:
        case COp::Sub:
            return affine_in( n.a, slot ) && affine_in( n.b, slot );
        case COp::Mul:
            return ( !contains_slot( n.a, slot ) && affine_in( n.b, slot ) )
                   || ( !contains_slot( n.b, slot ) && affine_in( n.a, slot ) );
        default:
            return !contains_slot( i, slot );
        }
    }

    void collect_slots( int i, int below, std::vector<int>& out ) const
    {
        const CNode& n = nodes[ static_cast<std::size_t>( i ) ];
        if ( n.op == COp::Slot && n.slot < below )
            out.push_back( n.slot );
        for ( int k : { n.a, n.b, n.c } )
            if ( k >= 0 )
                collect_slots( k, below, out );
    }
};

// One top-level conjunct of a predicate. A top-level disjunction becomes a
// branch so that the solver can split on it.
struct Conjunct
{
    int root = -1;
    std::vector<int> slots; // free slots below the binder base
    std::vector<std::vector<Conjunct>> branches;

    [[nodiscard]] bool is_branch() const { return !branches.empty(); }
};

struct Predicate
{
    std::shared_ptr<Code> code;
    int root = -1;
    std::vector<Conjunct> conjuncts;
    int frame = 0; // frame size the predicate needs

    [[nodiscard]] bool holds( Env& env ) const { return code->eval( root, env ).as_bool(); }
};

// Name environment for one compilation unit.
struct Scope
{
    struct Named
    {
        int slot = -1;
        const Domain* domain = nullptr;
        bool allows_bottom = false;
    };

    const ConstantTable* constants = nullptr;
    std::map<std::string, Named> vars;   // unprimed slot; primed = slot + prime_offset
    int prime_offset = 0;
    bool primes_allowed = false;
    std::map<std::string, Named> params;
    std::map<std::string, std::optional<std::int64_t>> consts;
    int binder_base = 0;
    Limits limits;
};

class Compiler
{
    struct Binder
    {
        std::string name;
        bool primed;
        int slot;
        CType type;
    };

    const Scope& _scope;
    Code& _code;
    std::vector<Binder> _binders;
    int _max_depth = 0;

    int emit( CNode n )
    {
        _code.nodes.push_back( n );
        return static_cast<int>( _code.nodes.size() ) - 1;
    }

    [[noreturn]] static void fail( const Expr& e, const std::string& what ) { throw ValidationError( what, e->pos ); }

    static std::string display( const std::string& name, bool primed ) { return primed ? name + "'" : name; }

    CType expect( const Expr& e, CType want, int& out )
    {
        auto [ node, t ] = lower( e );
        if ( t != want )
            fail( e, std::string( "expected " ) + ctype_name( want ) + " expression, found " + ctype_name( t ) );
        out = node;
        return t;
    }

    std::pair<int, CType> lower_ref( const Expr& e )
    {
        for ( auto it = _binders.rbegin(); it != _binders.rend(); ++it )
            if ( it->name == e->name && it->primed == e->primed )
                return { emit( { .op = COp::Slot, .slot = it->slot } ), it->type };

        if ( is_tilde_name( e->name ) )
            fail( e, "tilde variable '" + display( e->name, e->primed ) + "' used outside a quantifier" );

        if ( auto it = _scope.vars.find( e->name ); it != _scope.vars.end() )
        {
            if ( e->primed && !_scope.primes_allowed )
                fail( e, "primed reference '" + display( e->name, true ) + "' is only allowed in actions" );
            int slot = it->second.slot + ( e->primed ? _scope.prime_offset : 0 );
            return { emit( { .op = COp::Slot, .slot = slot } ),
                     it->second.domain->is_int() ? CType::Int : CType::Enum };
        }
        if ( e->primed )
            fail( e, "'" + e->name + "' is not a state variable and cannot be primed" );
        if ( auto it = _scope.params.find( e->name ); it != _scope.params.end() )
            return { emit( { .op = COp::Slot, .slot = it->second.slot } ),
                     it->second.domain->is_int() ? CType::Int : CType::Enum };
        if ( auto it = _scope.consts.find( e->name ); it != _scope.consts.end() )
        {
            if ( it->second )
                return { emit( { .op = COp::Const, .val = Value::integer( *it->second ) } ), CType::Int };
            _code.unbound.push_back( e->name );
            return { emit( { .op = COp::Unbound, .slot = static_cast<int>( _code.unbound.size() ) - 1 } ),
                     CType::Int };
        }
        if ( auto id = _scope.constants->find( e->name ) )
            return { emit( { .op = COp::Const, .val = Value::enumeration( *id ) } ), CType::Enum };
        fail( e, "unknown identifier '" + e->name + "'" );
    }

    std::pair<int, CType> lower_quant( const Expr& e )
    {
        const bool universal = e->op == Op::Forall;
        CNode n;
        CType btype = CType::Int;
        const Domain* base = nullptr;
        if ( is_tilde_name( e->name ) )
        {
            auto it = _scope.vars.find( strip_prefix( e->name ) );
            if ( it == _scope.vars.end() )
                fail( e, "tilde binder '" + e->name + "' does not shadow a state variable" );
            base = it->second.domain;
            btype = base->is_int() ? CType::Int : CType::Enum;
        }
        else
        {
            if ( e->primed )
                fail( e, "only tilde binders may be primed" );
            if ( _scope.vars.count( e->name ) || _scope.params.count( e->name ) || _scope.consts.count( e->name )
                 || _scope.constants->find( e->name ) )
                fail( e, "binder '" + e->name + "' shadows a declared name" );
        }

        switch ( e->qdom.kind )
        {
        case QuantDomain::Kind::Range:
        {
            if ( base && !base->is_int() )
                fail( e, "integer range given for enum variable '" + strip_prefix( e->name ) + "'" );
            for ( const auto& b : { e->qdom.lo, e->qdom.hi } )
                for ( const auto& [ nm, pr ] : free_refs( b ) )
                    if ( pr )
                        fail( b, "primed reference in quantifier bound" );
            expect( e->qdom.lo, CType::Int, n.a );
            expect( e->qdom.hi, CType::Int, n.b );
            n.op = universal ? COp::ForallRange : COp::ExistsRange;
            if ( base )
            {
                n.clip = true;
                n.clip_lo = base->lo;
                n.clip_hi = base->hi;
            }
            btype = CType::Int;
            break;
        }
        case QuantDomain::Kind::Set:
        {
            n.op = universal ? COp::ForallSet : COp::ExistsSet;
            n.set_off = static_cast<int>( _code.sets.size() );
            for ( const auto& m : e->qdom.members )
            {
                auto id = _scope.constants->find( m );
                if ( !id )
                    fail( e, "unknown enum constant '" + m + "'" );
                if ( base && std::find( base->members.begin(), base->members.end(), m ) == base->members.end() )
                    continue;
                _code.sets.push_back( Value::enumeration( *id ) );
            }
            n.set_len = static_cast<int>( _code.sets.size() ) - n.set_off;
            btype = CType::Enum;
            break;
        }
        case QuantDomain::Kind::Implicit:
        {
            if ( !base )
                fail( e, "binder '" + e->name + "' needs an explicit range" );
            if ( base->is_int() )
            {
                n.op = universal ? COp::ForallRange : COp::ExistsRange;
                n.a = emit( { .op = COp::Const, .val = Value::integer( base->lo ) } );
                n.b = emit( { .op = COp::Const, .val = Value::integer( base->hi ) } );
            }
            else
            {
                n.op = universal ? COp::ForallSet : COp::ExistsSet;
                n.set_off = static_cast<int>( _code.sets.size() );
                for ( const auto& m : base->members )
                    _code.sets.push_back( Value::enumeration( *_scope.constants->find( m ) ) );
                n.set_len = static_cast<int>( base->members.size() );
            }
            break;
        }
        }

        n.slot = _scope.binder_base + static_cast<int>( _binders.size() );
        _binders.push_back( { e->name, e->primed, n.slot, btype } );
        _max_depth = std::max( _max_depth, static_cast<int>( _binders.size() ) );
        expect( e->kids[ 0 ], CType::Bool, n.c );
        _binders.pop_back();
        return { emit( n ), CType::Bool };
    }

public:
    Compiler( const Scope& scope, Code& code ) : _scope( scope ), _code( code ) {}

    [[nodiscard]] int max_depth() const { return _max_depth; }

    std::pair<int, CType> lower( const Expr& e )
    {
        switch ( e->op )
        {
        case Op::IntLit:
            return { emit( { .op = COp::Const, .val = Value::integer( e->ival ) } ), CType::Int };
        case Op::BoolLit:
            return { emit( { .op = COp::Const, .val = Value::boolean( e->ival != 0 ) } ), CType::Bool };
        case Op::Bottom:
            return { emit( { .op = COp::Const, .val = Value::bottom() } ), CType::Bottom };
        case Op::Ref:
            return lower_ref( e );
        case Op::Neg:
        {
            CNode n{ .op = COp::Neg };
            expect( e->kids[ 0 ], CType::Int, n.a );
            return { emit( n ), CType::Int };
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Lt:
        case Op::Le:
        {
            CNode n;
            n.op = e->op == Op::Add   ? COp::Add
                   : e->op == Op::Sub ? COp::Sub
                   : e->op == Op::Mul ? COp::Mul
                   : e->op == Op::Lt  ? COp::Lt
                                      : COp::Le;
            expect( e->kids[ 0 ], CType::Int, n.a );
            expect( e->kids[ 1 ], CType::Int, n.b );
            bool cmp = e->op == Op::Lt || e->op == Op::Le;
            return { emit( n ), cmp ? CType::Bool : CType::Int };
        }
        case Op::Eq:
        case Op::Ne:
        {
            CNode n{ .op = e->op == Op::Eq ? COp::Eq : COp::Ne };
            auto [ a, ta ] = lower( e->kids[ 0 ] );
            auto [ b, tb ] = lower( e->kids[ 1 ] );
            if ( ta != tb && ta != CType::Bottom && tb != CType::Bottom )
                fail( e, std::string( "cannot compare " ) + ctype_name( ta ) + " with " + ctype_name( tb ) );
            n.a = a;
            n.b = b;
            return { emit( n ), CType::Bool };
        }
        case Op::Not:
        {
            CNode n{ .op = COp::Not };
            expect( e->kids[ 0 ], CType::Bool, n.a );
            return { emit( n ), CType::Bool };
        }
        case Op::And:
        case Op::Or:
        case Op::Implies:
        case Op::Iff:
        {
            CNode n;
            n.op = e->op == Op::And ? COp::And : e->op == Op::Or ? COp::Or : e->op == Op::Implies ? COp::Implies : COp::Iff;
            expect( e->kids[ 0 ], CType::Bool, n.a );
            expect( e->kids[ 1 ], CType::Bool, n.b );
            return { emit( n ), CType::Bool };
        }
        case Op::Forall:
        case Op::Exists:
            return lower_quant( e );
        }
        fail( e, "unsupported expression" );
    }

    int lower_bool( const Expr& e )
    {
        int out = -1;
        expect( e, CType::Bool, out );
        return out;
    }

    Conjunct lower_conjunct( const Expr& e )
    {
        Conjunct c;
        c.root = lower_bool( e );
        _code.collect_slots( c.root, _scope.binder_base, c.slots );
        std::sort( c.slots.begin(), c.slots.end() );
        c.slots.erase( std::unique( c.slots.begin(), c.slots.end() ), c.slots.end() );
        if ( e->op == Op::Or )
            for ( const auto& d : flatten_or( e ) )
            {
                std::vector<Conjunct> branch;
                for ( const auto& part : flatten_and( d ) )
                    branch.push_back( lower_conjunct( part ) );
                c.branches.push_back( std::move( branch ) );
            }
        return c;
    }

    Predicate lower_predicate( const Expr& e, std::shared_ptr<Code> code )
    {
        Predicate p;
        p.code = std::move( code );
        p.root = lower_bool( e );
        for ( const auto& part : flatten_and( e ) )
            p.conjuncts.push_back( lower_conjunct( part ) );
        p.frame = _scope.binder_base + _max_depth;
        return p;
    }
};

} // namespace robustikit
