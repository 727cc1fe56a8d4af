#pragma once

#include "robustikit/core/error.hpp"

#include <cctype>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace robustikit::dsl
{

enum class Tok : std::uint8_t
{
    Ident, // plain, ^hat or ~tilde
    Int,
    Keyword,
    Sym,
    End
};

struct Token
{
    Tok kind = Tok::End;
    std::string text;
    std::int64_t ival = 0;
    bool primed = false; // identifier immediately followed by '
    SourcePos pos;
};

inline const std::set<std::string>& keywords()
{
    static const std::set<std::string> k = {
        "machine", "derived", "from",   "with",  "var",    "const",    "init",   "safety", "uncertainty",
        "plant",   "ctrl",    "event",  "param", "sources", "guard",   "action", "for",    "exact",
        "within",  "any",     "relation", "int", "true",   "false",    "bot",    "not",    "and",
        "or",      "forall",  "exists", "in",
    };
    return k;
}

inline std::vector<Token> lex( std::string_view src )
{
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto peek = [ & ]( std::size_t k = 0 ) { return i + k < src.size() ? src[ i + k ] : '\0'; };
    auto advance = [ & ]() {
        if ( src[ i ] == '\n' )
        {
            ++line;
            col = 1;
        }
        else
            ++col;
        ++i;
    };
    auto ident_start = []( char c ) { return std::isalpha( static_cast<unsigned char>( c ) ) || c == '_'; };
    auto ident_char = []( char c ) { return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_'; };

    while ( i < src.size() )
    {
        char c = peek();
        if ( c == ' ' || c == '\t' || c == '\r' || c == '\n' )
        {
            advance();
            continue;
        }
        if ( c == '/' && peek( 1 ) == '/' )
        {
            while ( i < src.size() && peek() != '\n' )
                advance();
            continue;
        }
        Token t;
        t.pos = { line, col };
        if ( ident_start( c ) || ( ( c == '^' || c == '~' ) && ident_start( peek( 1 ) ) ) )
        {
            std::size_t start = i;
            advance();
            while ( i < src.size() && ident_char( peek() ) )
                advance();
            t.text = std::string( src.substr( start, i - start ) );
            bool plain = t.text[ 0 ] != '^' && t.text[ 0 ] != '~';
            t.kind = plain && keywords().count( t.text ) ? Tok::Keyword : Tok::Ident;
            if ( t.kind == Tok::Ident && peek() == '\'' )
            {
                t.primed = true;
                advance();
            }
        }
        else if ( std::isdigit( static_cast<unsigned char>( c ) ) )
        {
            std::size_t start = i;
            while ( i < src.size() && std::isdigit( static_cast<unsigned char>( peek() ) ) )
                advance();
            t.kind = Tok::Int;
            t.text = std::string( src.substr( start, i - start ) );
            try
            {
                t.ival = std::stoll( t.text );
            }
            catch ( const std::out_of_range& )
            {
                throw ValidationError( "integer literal out of range", t.pos );
            }
        }
        else
        {
            static const char* multi[] = { "<=>", "..", "!=", "<=", ">=", "=>" };
            t.kind = Tok::Sym;
            for ( const char* m : multi )
            {
                std::string_view mv( m );
                if ( src.substr( i, mv.size() ) == mv )
                {
                    t.text = std::string( mv );
                    break;
                }
            }
            if ( t.text.empty() )
            {
                if ( std::string_view( ":,[]{}()|.+-*=<>" ).find( c ) == std::string_view::npos )
                    throw ValidationError( std::string( "unexpected character '" ) + c + "'", t.pos );
                t.text = std::string( 1, c );
            }
            for ( std::size_t k = 0; k < t.text.size(); ++k )
                advance();
        }
        out.push_back( std::move( t ) );
    }
    Token end;
    end.kind = Tok::End;
    end.pos = { line, col };
    out.push_back( end );
    return out;
}

} // namespace robustikit::dsl
