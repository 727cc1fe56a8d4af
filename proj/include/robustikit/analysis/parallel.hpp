#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace robustikit
{

inline unsigned default_jobs()
{
    if ( const char* env = std::getenv( "ROBUSTIKIT_JOBS" ) )
    {
        try
        {
            int n = std::stoi( env );
            if ( n > 0 )
                return static_cast<unsigned>( n );
        }
        catch ( const std::exception& )
        {
        }
    }
    return std::max( 1u, std::thread::hardware_concurrency() );
}

// Runs body(chunk_begin, chunk_end) over [0, n) in contiguous chunks and
// returns the per-chunk results in index order, whatever the thread count.
template <class Result, class Body>
std::vector<Result> parallel_chunks( std::uint64_t n, unsigned jobs, Body body )
{
    const std::uint64_t chunk = std::max<std::uint64_t>( 1, std::min<std::uint64_t>( 4096, n / ( jobs * 8 + 1 ) + 1 ) );
    const std::uint64_t count = n == 0 ? 0 : ( n + chunk - 1 ) / chunk;
    std::vector<Result> results( count );
    if ( count == 0 )
        return results;

    std::atomic<std::uint64_t> next{ 0 };
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [ & ]() {
        while ( true )
        {
            auto k = next.fetch_add( 1 );
            if ( k >= count )
                return;
            try
            {
                results[ k ] = body( k * chunk, std::min( n, ( k + 1 ) * chunk ) );
            }
            catch ( ... )
            {
                std::lock_guard<std::mutex> lock( error_mutex );
                if ( !error )
                    error = std::current_exception();
                next = count;
            }
        }
    };

    const unsigned threads = static_cast<unsigned>( std::min<std::uint64_t>( std::max( 1u, jobs ), count ) );
    if ( threads <= 1 )
        worker();
    else
    {
        std::vector<std::thread> pool;
        for ( unsigned t = 0; t < threads; ++t )
            pool.emplace_back( worker );
        for ( auto& t : pool )
            t.join();
    }
    if ( error )
        std::rethrow_exception( error );
    return results;
}

} // namespace robustikit
