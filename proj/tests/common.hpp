#pragma once

#include "robustikit/robustikit.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace testutil
{

inline std::string read_file( const std::string& path )
{
    std::ifstream in( path );
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline robustikit::dsl::SourceFile load( const std::string& name )
{
    auto path = std::string( ROBUSTIKIT_MODELS ) + "/" + name;
    return robustikit::dsl::parse_or_throw( read_file( path ), path );
}

inline robustikit::Machine machine( const std::string& file, const std::string& name )
{
    return *load( file ).machine( name );
}

inline robustikit::UncertaintySpec uncertainty( const std::string& file, const std::string& name )
{
    return *load( file ).uncertainty( name );
}

// (tn, temp) state of the heater models.
inline robustikit::Valuation heater_state( const robustikit::Model& m, const std::string& tn, std::int64_t temp )
{
    return { robustikit::Value::enumeration( *m.constants().find( tn ) ), robustikit::Value::integer( temp ) };
}

} // namespace testutil
