#include "oracle.hpp"

#include <gtest/gtest.h>

namespace
{

constexpr std::uint64_t machines = 120;

} // namespace

TEST( Oracle, GeneratedMachinesAreSmall )
{
    for ( std::uint64_t seed = 0; seed < machines; ++seed )
    {
        auto b = oracle::build( seed );
        robustikit::Model m( b.file.machines[ 0 ] );
        EXPECT_LE( m.state_count(), 120u );
        EXPECT_LE( b.g.dom.size(), 3u );
        EXPECT_LE( b.g.ctrl.size(), 4u );
        for ( const auto& d : b.g.dom )
            EXPECT_LE( d.hi - d.lo + 1, 20 );
    }
}

TEST( Oracle, ControllerPrimitives )
{
    oracle::Coverage cov;
    for ( std::uint64_t seed = 0; seed < machines; ++seed )
        ASSERT_EQ( oracle::check_primitives( seed, cov ), "" );
    EXPECT_GT( cov.shared, 100u );
    EXPECT_GT( cov.partial, 100u );
}

TEST( Oracle, InjectionKeepsUncertaintyInvariant )
{
    oracle::Coverage cov;
    for ( std::uint64_t seed = 0; seed < machines; ++seed )
        ASSERT_EQ( oracle::check_injection( seed, cov ), "" );
    EXPECT_GT( cov.transitions, 0u );
}

TEST( Oracle, PruningKeepsTransitions )
{
    oracle::Coverage cov;
    for ( std::uint64_t seed = 0; seed < machines; ++seed )
        ASSERT_EQ( oracle::check_pruning( seed, cov ), "" );
    EXPECT_GT( cov.pruned, 0u );
}

// The oracle itself must notice a wrong answer.
TEST( Oracle, DetectsPerturbedGuard )
{
    std::size_t caught = 0;
    for ( std::uint64_t seed = 0; seed < 20; ++seed )
    {
        auto b = oracle::build( seed );
        auto g = b.g;
        g.ctrl[ 0 ].param.lo -= 1;
        oracle::Oracle wrong{ g };
        robustikit::Model m( b.file.machines[ 0 ] );
        robustikit::Controller c( m );
        for ( const auto& s : wrong.states() )
            if ( oracle::flat( c.par( oracle::valuation( s ) ) ) != wrong.par( wrong.idx( s ), s ) )
            {
                ++caught;
                break;
            }
    }
    EXPECT_EQ( caught, 20u );
}
