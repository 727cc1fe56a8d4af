#pragma once

#include "robustikit/core/uncertainty.hpp"
#include "robustikit/dsl/lexer.hpp"

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace robustikit::dsl
{

struct Diagnostic
{
    enum class Severity : std::uint8_t
    {
        Error,
        Warning
    };

    Severity severity = Severity::Error;
    SourcePos pos;
    std::string message;

    [[nodiscard]] std::string str( const std::string& path = "" ) const
    {
        std::string where = path.empty() ? "" : path + ":";
        return where + std::to_string( pos.line ) + ":" + std::to_string( pos.column ) + ": "
               + ( severity == Severity::Error ? "error: " : "warning: " ) + message;
    }
};

struct SourceFile
{
    std::string path;
    std::string text;
    std::vector<Machine> machines;
    std::vector<UncertaintySpec> uncertainties;
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const
    {
        return std::none_of( diagnostics.begin(), diagnostics.end(),
                             []( const Diagnostic& d ) { return d.severity == Diagnostic::Severity::Error; } );
    }

    [[nodiscard]] const Machine* machine( const std::string& name ) const
    {
        for ( const auto& m : machines )
            if ( m.name == name )
                return &m;
        return nullptr;
    }

    [[nodiscard]] const UncertaintySpec* uncertainty( const std::string& name ) const
    {
        for ( const auto& u : uncertainties )
            if ( u.name == name )
                return &u;
        return nullptr;
    }
};

class Parser
{
    std::vector<Token> _toks;
    std::size_t _i = 0;

    const Token& cur() const { return _toks[ _i ]; }
    const Token& ahead( std::size_t k ) const { return _toks[ std::min( _i + k, _toks.size() - 1 ) ]; }

    bool is_kw( std::string_view k ) const { return cur().kind == Tok::Keyword && cur().text == k; }
    bool is_sym( std::string_view s ) const { return cur().kind == Tok::Sym && cur().text == s; }

    static std::string describe( const Token& t )
    {
        switch ( t.kind )
        {
        case Tok::End:
            return "end of input";
        case Tok::Int:
            return "integer " + t.text;
        default:
            return "'" + t.text + ( t.primed ? "'" : "" ) + "'";
        }
    }

    [[noreturn]] void expected( const std::string& what ) const
    {
        throw ValidationError( "syntax error: expected " + what + ", found " + describe( cur() ), cur().pos );
    }

    Token take() { return _toks[ _i < _toks.size() - 1 ? _i++ : _i ]; }

    void keyword( std::string_view k )
    {
        if ( !is_kw( k ) )
            expected( "'" + std::string( k ) + "'" );
        take();
    }

    void symbol( std::string_view s )
    {
        if ( !is_sym( s ) )
            expected( "'" + std::string( s ) + "'" );
        take();
    }

    Token plain_ident( const std::string& what )
    {
        if ( cur().kind != Tok::Ident || cur().primed || is_hat_name( cur().text ) || is_tilde_name( cur().text ) )
            expected( what );
        return take();
    }

    std::int64_t signed_int()
    {
        bool negative = false;
        if ( is_sym( "-" ) )
        {
            take();
            negative = true;
        }
        if ( cur().kind != Tok::Int )
            expected( "integer" );
        auto v = take().ival;
        return negative ? -v : v;
    }

    Domain domain()
    {
        if ( is_kw( "int" ) )
        {
            take();
            symbol( "[" );
            auto lo = signed_int();
            symbol( ".." );
            auto hi = signed_int();
            symbol( "]" );
            return Domain::interval( lo, hi );
        }
        if ( is_sym( "{" ) )
        {
            take();
            std::vector<std::string> ms;
            ms.push_back( plain_ident( "enum constant" ).text );
            while ( is_sym( "," ) )
            {
                take();
                ms.push_back( plain_ident( "enum constant" ).text );
            }
            symbol( "}" );
            return Domain::enumeration( std::move( ms ) );
        }
        expected( "domain ('int[lo..hi]' or '{a, b}')" );
    }

    ConstDecl const_decl()
    {
        ConstDecl c;
        c.pos = cur().pos;
        keyword( "const" );
        c.name = plain_ident( "constant name" ).text;
        symbol( ":" );
        auto d = domain();
        if ( !d.is_int() )
            throw ValidationError( "constant '" + c.name + "' needs an integer domain", c.pos );
        c.lo = d.lo;
        c.hi = d.hi;
        return c;
    }

    static Expr at( Expr e, SourcePos pos )
    {
        Node n = *e;
        n.pos = pos;
        return ex::make( std::move( n ) );
    }

    // ---- expressions, loosest first ----

    Expr iff_expr()
    {
        auto pos = cur().pos;
        auto lhs = implies_expr();
        while ( is_sym( "<=>" ) )
        {
            take();
            lhs = at( ex::iff( lhs, implies_expr() ), pos );
        }
        return lhs;
    }

    Expr implies_expr()
    {
        auto pos = cur().pos;
        auto lhs = or_expr();
        if ( is_sym( "=>" ) )
        {
            take();
            return at( ex::implies( lhs, implies_expr() ), pos );
        }
        return lhs;
    }

    Expr or_expr()
    {
        auto pos = cur().pos;
        auto lhs = and_expr();
        while ( is_kw( "or" ) )
        {
            take();
            lhs = at( ex::or_( lhs, and_expr() ), pos );
        }
        return lhs;
    }

    Expr and_expr()
    {
        auto pos = cur().pos;
        auto lhs = not_expr();
        while ( is_kw( "and" ) )
        {
            take();
            lhs = at( ex::and_( lhs, not_expr() ), pos );
        }
        return lhs;
    }

    Expr not_expr()
    {
        if ( is_kw( "not" ) )
        {
            auto pos = take().pos;
            return at( ex::not_( not_expr() ), pos );
        }
        return comparison();
    }

    bool at_comparison() const
    {
        return is_sym( "=" ) || is_sym( "!=" ) || is_sym( "<" ) || is_sym( "<=" ) || is_sym( ">" ) || is_sym( ">=" );
    }

    static Expr compare( const std::string& op, Expr a, Expr b, SourcePos pos )
    {
        if ( op == "=" )
            return at( ex::eq( a, b ), pos );
        if ( op == "!=" )
            return at( ex::ne( a, b ), pos );
        if ( op == "<" )
            return at( ex::lt( a, b ), pos );
        if ( op == "<=" )
            return at( ex::le( a, b ), pos );
        if ( op == ">" )
            return at( ex::lt( b, a ), pos );
        return at( ex::le( b, a ), pos );
    }

    // a <= b <= c is sugar for a <= b and b <= c.
    Expr comparison()
    {
        auto pos = cur().pos;
        auto lhs = additive();
        if ( !at_comparison() )
            return lhs;
        Expr result;
        while ( at_comparison() )
        {
            auto op = take().text;
            auto rhs = additive();
            auto c = compare( op, lhs, rhs, pos );
            result = result ? at( ex::and_( result, c ), pos ) : c;
            lhs = rhs;
        }
        return result;
    }

    Expr additive()
    {
        auto pos = cur().pos;
        auto lhs = multiplicative();
        while ( is_sym( "+" ) || is_sym( "-" ) )
        {
            bool plus = take().text == "+";
            auto rhs = multiplicative();
            lhs = at( plus ? ex::add( lhs, rhs ) : ex::sub( lhs, rhs ), pos );
        }
        return lhs;
    }

    Expr multiplicative()
    {
        auto pos = cur().pos;
        auto lhs = unary();
        while ( is_sym( "*" ) )
        {
            take();
            lhs = at( ex::mul( lhs, unary() ), pos );
        }
        return lhs;
    }

    Expr unary()
    {
        if ( is_sym( "-" ) )
        {
            auto pos = take().pos;
            if ( cur().kind == Tok::Int )
                return at( ex::lit( -take().ival ), pos );
            return at( ex::neg( unary() ), pos );
        }
        return atom();
    }

    Expr quantifier()
    {
        auto pos = cur().pos;
        bool universal = take().text == "forall";
        if ( cur().kind != Tok::Ident )
            expected( "quantifier variable" );
        auto binder = take();
        if ( is_hat_name( binder.text ) )
            throw ValidationError( "hat variable '" + binder.text + "' cannot be a quantifier variable", binder.pos );
        QuantDomain dom = ex::implicit();
        if ( is_kw( "in" ) )
        {
            take();
            if ( is_sym( "[" ) )
            {
                take();
                auto lo = additive();
                symbol( ".." );
                auto hi = additive();
                symbol( "]" );
                dom = ex::range( lo, hi );
            }
            else if ( is_sym( "{" ) )
            {
                take();
                std::vector<std::string> ms;
                ms.push_back( plain_ident( "enum constant" ).text );
                while ( is_sym( "," ) )
                {
                    take();
                    ms.push_back( plain_ident( "enum constant" ).text );
                }
                symbol( "}" );
                dom = ex::members( std::move( ms ) );
            }
            else
                expected( "'[' or '{'" );
        }
        else if ( !is_tilde_name( binder.text ) )
            expected( "'in'" );
        symbol( "." );
        auto body = iff_expr();
        return at( ex::quant( universal ? Op::Forall : Op::Exists, binder.text, binder.primed, dom, body ), pos );
    }

    Expr atom()
    {
        const Token& t = cur();
        switch ( t.kind )
        {
        case Tok::Int:
            return at( ex::lit( take().ival ), t.pos );
        case Tok::Ident:
        {
            auto tok = take();
            return at( ex::ref( tok.text, tok.primed ), tok.pos );
        }
        case Tok::Keyword:
            if ( t.text == "true" || t.text == "false" )
            {
                auto tok = take();
                return at( ex::boolean( tok.text == "true" ), tok.pos );
            }
            if ( t.text == "bot" )
                return at( ex::bot(), take().pos );
            if ( t.text == "forall" || t.text == "exists" )
                return quantifier();
            break;
        case Tok::Sym:
            if ( t.text == "(" )
            {
                take();
                auto e = iff_expr();
                symbol( ")" );
                return e;
            }
            break;
        default:
            break;
        }
        expected( "expression" );
    }

    // ---- entities ----

    ParamDecl param()
    {
        ParamDecl p;
        p.pos = cur().pos;
        keyword( "param" );
        p.name = plain_ident( "parameter name" ).text;
        symbol( ":" );
        p.domain = domain();
        if ( is_sym( "|" ) )
        {
            take();
            keyword( "bot" );
            p.allows_bottom = true;
        }
        return p;
    }

    EventDef event()
    {
        EventDef e;
        e.pos = cur().pos;
        e.kind = take().text == "plant" ? EventKind::Plant : EventKind::Controller;
        keyword( "event" );
        e.name = plain_ident( "event name" ).text;
        bool has_guard = false;
        bool has_action = false;
        while ( true )
        {
            if ( is_kw( "param" ) )
                e.params.push_back( param() );
            else if ( is_kw( "sources" ) )
            {
                take();
                e.sources.push_back( plain_ident( "event name" ).text );
                while ( is_sym( "," ) )
                {
                    take();
                    e.sources.push_back( plain_ident( "event name" ).text );
                }
            }
            else if ( is_kw( "guard" ) )
            {
                if ( has_guard )
                    throw ValidationError( "event '" + e.name + "' has two guards", cur().pos );
                take();
                e.guard = iff_expr();
                has_guard = true;
            }
            else if ( is_kw( "action" ) )
            {
                if ( has_action )
                    throw ValidationError( "event '" + e.name + "' has two actions", cur().pos );
                take();
                e.action = iff_expr();
                has_action = true;
            }
            else
                break;
        }
        if ( !has_action )
            throw ValidationError( "event '" + e.name + "' has no action", e.pos );
        return e;
    }

    Machine machine()
    {
        Machine m;
        m.pos = cur().pos;
        keyword( "machine" );
        m.name = plain_ident( "machine name" ).text;
        if ( is_kw( "derived" ) )
        {
            take();
            auto how = plain_ident( "'inject', 'preserving' or 'repurposing'" );
            if ( how.text == "inject" )
                m.provenance.method = Derivation::Inject;
            else if ( how.text == "preserving" )
                m.provenance.method = Derivation::Preserving;
            else if ( how.text == "repurposing" )
                m.provenance.method = Derivation::Repurposing;
            else
                throw ValidationError( "unknown derivation '" + how.text + "'", how.pos );
            keyword( "from" );
            m.provenance.source_machine = plain_ident( "machine name" ).text;
            keyword( "with" );
            m.provenance.uncertainty = plain_ident( "uncertainty name" ).text;
        }
        bool has_init = false;
        bool has_safety = false;
        while ( true )
        {
            if ( is_kw( "var" ) )
            {
                VarDecl v;
                v.pos = take().pos;
                auto name = cur();
                if ( name.kind != Tok::Ident || name.primed || is_tilde_name( name.text ) )
                    expected( "variable name" );
                take();
                v.name = name.text;
                symbol( ":" );
                v.domain = domain();
                m.vars.push_back( std::move( v ) );
            }
            else if ( is_kw( "const" ) )
                m.consts.push_back( const_decl() );
            else if ( is_kw( "init" ) )
            {
                if ( has_init )
                    throw ValidationError( "machine '" + m.name + "' has two init predicates", cur().pos );
                take();
                m.init = iff_expr();
                has_init = true;
            }
            else if ( is_kw( "safety" ) )
            {
                if ( has_safety )
                    throw ValidationError( "machine '" + m.name + "' has two safety invariants", cur().pos );
                take();
                m.safety = iff_expr();
                has_safety = true;
            }
            else if ( is_kw( "uncertainty" ) && !( ahead( 1 ).kind == Tok::Ident && ahead( 2 ).kind == Tok::Keyword
                                                   && ahead( 2 ).text == "for" ) )
            {
                if ( m.uncertainty )
                    throw ValidationError( "machine '" + m.name + "' has two uncertainty invariants", cur().pos );
                take();
                m.uncertainty = iff_expr();
            }
            else if ( is_kw( "plant" ) || is_kw( "ctrl" ) )
                m.events.push_back( event() );
            else
                break;
        }
        return m;
    }

    UncertaintySpec uncertainty()
    {
        UncertaintySpec u;
        u.pos = cur().pos;
        keyword( "uncertainty" );
        u.name = plain_ident( "uncertainty name" ).text;
        keyword( "for" );
        u.machine = plain_ident( "machine name" ).text;
        while ( true )
        {
            if ( is_kw( "const" ) )
                u.consts.push_back( const_decl() );
            else if ( is_kw( "relation" ) )
            {
                if ( u.relation )
                    throw ValidationError( "uncertainty '" + u.name + "' has two relations", cur().pos );
                take();
                u.relation = iff_expr();
            }
            else if ( cur().kind == Tok::Ident && !cur().primed && !is_hat_name( cur().text )
                      && !is_tilde_name( cur().text ) )
            {
                UncertaintyClause c;
                c.pos = cur().pos;
                c.var = take().text;
                if ( u.clause_for( c.var ) )
                    throw ValidationError( "second uncertainty clause for '" + c.var + "'", c.pos );
                if ( is_kw( "exact" ) )
                {
                    take();
                    c.kind = UncertaintyClause::Kind::Exact;
                }
                else if ( is_kw( "any" ) )
                {
                    take();
                    c.kind = UncertaintyClause::Kind::Any;
                }
                else if ( is_kw( "within" ) )
                {
                    take();
                    c.kind = UncertaintyClause::Kind::Within;
                    if ( cur().kind == Tok::Int )
                        c.radius.literal = take().ival;
                    else
                        c.radius.symbol = plain_ident( "radius" ).text;
                }
                else
                    expected( "'exact', 'within' or 'any'" );
                u.clauses.push_back( std::move( c ) );
            }
            else
                break;
        }
        return u;
    }

public:
    explicit Parser( std::string_view text ) : _toks( lex( text ) ) {}

    void parse_file( SourceFile& out )
    {
        while ( cur().kind != Tok::End )
        {
            if ( is_kw( "machine" ) )
                out.machines.push_back( machine() );
            else if ( is_kw( "uncertainty" ) )
                out.uncertainties.push_back( uncertainty() );
            else
                expected( "'machine' or 'uncertainty'" );
        }
    }

    Expr parse_expr()
    {
        auto e = iff_expr();
        if ( cur().kind != Tok::End )
            expected( "end of expression" );
        return e;
    }
};

// Validation beyond syntax: declared names, domains, primes, per-entity.
inline void validate( SourceFile& f )
{
    for ( const auto& m : f.machines )
    {
        try
        {
            Model model( m );
            for ( const auto& u : f.uncertainties )
                if ( u.machine == m.name )
                    Uncertainty( model, u );
        }
        catch ( const ValidationError& e )
        {
            f.diagnostics.push_back( { Diagnostic::Severity::Error, e.pos(), e.what() } );
        }
        catch ( const Error& e )
        {
            f.diagnostics.push_back( { Diagnostic::Severity::Error, m.pos, e.what() } );
        }
    }
    std::set<std::string> seen;
    for ( const auto& m : f.machines )
        if ( !seen.insert( m.name ).second )
            f.diagnostics.push_back( { Diagnostic::Severity::Error, m.pos, "duplicate machine '" + m.name + "'" } );
    seen.clear();
    for ( const auto& u : f.uncertainties )
    {
        if ( !seen.insert( u.name ).second )
            f.diagnostics.push_back( { Diagnostic::Severity::Error, u.pos, "duplicate uncertainty '" + u.name + "'" } );
        if ( !f.machine( u.machine ) )
            f.diagnostics.push_back(
                    { Diagnostic::Severity::Warning, u.pos, "machine '" + u.machine + "' is not defined in this file" } );
    }
}

inline SourceFile parse( std::string text, std::string path = "" )
{
    SourceFile f;
    f.path = std::move( path );
    f.text = std::move( text );
    try
    {
        Parser p( f.text );
        p.parse_file( f );
        validate( f );
    }
    catch ( const ValidationError& e )
    {
        f.diagnostics.push_back( { Diagnostic::Severity::Error, e.pos(), e.what() } );
    }
    std::stable_sort( f.diagnostics.begin(), f.diagnostics.end(),
                      []( const Diagnostic& a, const Diagnostic& b ) { return a.pos < b.pos; } );
    if ( !f.ok() )
    {
        f.machines.clear();
        f.uncertainties.clear();
    }
    return f;
}

// Throws the first error diagnostic.
inline SourceFile parse_or_throw( std::string text, std::string path = "" )
{
    auto f = parse( std::move( text ), path );
    for ( const auto& d : f.diagnostics )
        if ( d.severity == Diagnostic::Severity::Error )
            throw ValidationError( d.message, d.pos );
    return f;
}

inline Expr parse_expr( std::string_view text ) { return Parser( text ).parse_expr(); }

} // namespace robustikit::dsl
