#pragma once

#include "cycseg/core.hpp"
#include "cycseg/decode.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace cycseg {

/// Window width, given either directly in samples or as seconds at a sample
/// rate. Seconds convert with round-half-away-from-zero.
class WindowSpec
{
 public:
   static WindowSpec
   from_samples( std::size_t width )
   {
      if( width == 0 )
         throw Error( ErrorCode::InvalidWindow,
                      "window width must be at least one sample" );
      return WindowSpec( width );
   }

   static WindowSpec
   from_seconds( double seconds, double rate_hz )
   {
      if( !( std::isfinite( seconds ) && seconds > 0.0 ) )
         throw Error( ErrorCode::InvalidWindow,
                      "window length in seconds must be positive" );
      if( !( std::isfinite( rate_hz ) && rate_hz > 0.0 ) )
         throw Error( ErrorCode::InvalidWindow,
                      "sample rate must be positive" );
      long long width = std::llround( seconds * rate_hz );
      if( width < 1 )
         throw Error( ErrorCode::InvalidWindow,
                      "window of " + std::to_string( seconds ) + " s at " +
                          std::to_string( rate_hz ) +
                          " Hz rounds to zero samples" );
      return WindowSpec( static_cast<std::size_t>( width ) );
   }

   std::size_t
   width() const noexcept
   {
      return width_;
   }

   /// Width checked against a signal of `samples` samples.
   std::size_t
   resolve( std::size_t samples ) const
   {
      if( width_ > samples )
         throw Error( ErrorCode::WindowTooLong,
                      "window of " + std::to_string( width_ ) +
                          " samples exceeds signal of " +
                          std::to_string( samples ) + " samples" );
      return width_;
   }

 private:
   explicit WindowSpec( std::size_t width ) : width_( width ) {}

   std::size_t width_;
};

/// Best in-window path value for every start t0 in [0, T - W], one layered
/// DP per start. Starts are split into contiguous chunks across `workers`
/// threads; the result does not depend on the worker count.
inline std::vector<double>
window_start_objectives( const ProbabilityMatrix& probs,
                         const CyclicTransitionModel& model,
                         const WindowSpec& spec, unsigned workers = 1 )
{
   require_same_states( probs, model );
   const std::size_t W = spec.resolve( probs.samples() );
   const std::size_t starts = probs.samples() - W + 1;
   std::vector<double> values( starts );

   auto run = [&]( std::size_t first, std::size_t last ) {
      std::vector<double> prev, cur;
      for( std::size_t t0 = first; t0 < last; ++t0 )
         values[t0] =
             detail::best_path_value( probs, model, t0, t0 + W, prev, cur );
   };

   workers = std::max( 1u, std::min<unsigned>(
                               workers, static_cast<unsigned>( starts ) ) );
   if( workers == 1 )
   {
      run( 0, starts );
      return values;
   }
   std::vector<std::jthread> pool;
   pool.reserve( workers );
   for( unsigned w = 0; w < workers; ++w )
   {
      std::size_t first = starts * w / workers;
      std::size_t last = starts * ( w + 1 ) / workers;
      pool.emplace_back( run, first, last );
   }
   pool.clear();
   return values;
}

namespace detail {

inline WindowDecodeResult
decode_window_at( const ProbabilityMatrix& probs,
                  const CyclicTransitionModel& model, std::size_t start,
                  std::size_t width )
{
   DecodedSequence inner =
       viterbi_decode( probs.slice( start, start + width ), model );
   return { start, width, std::move( inner.states ), inner.objective };
}

} // namespace detail

/// Optimal contiguous window of exactly W samples together with its best
/// transition-valid assignment. Windows may touch either end of the signal.
/// Equal objectives resolve to the earliest start.
///
/// Single pass over time keeping, for every state s and every count k of
/// samples assigned so far, the best path value ending at (t, s). Each
/// value is accumulated from its window's first sample forward, so window
/// values are bit-identical to a fresh DP over that window.
inline WindowDecodeResult
window_decode( const ProbabilityMatrix& probs,
               const CyclicTransitionModel& model, const WindowSpec& spec )
{
   require_same_states( probs, model );
   const std::size_t T = probs.samples();
   const std::size_t L = model.states();
   const std::size_t W = spec.resolve( T );

   // value[k * L + s]: best path over k + 1 samples ending at (t, s).
   std::vector<double> prev( W * L ), cur( W * L );
   std::size_t best_start = 0;
   double best_value = 0.0;
   bool have_best = false;

   for( std::size_t t = 0; t < T; ++t )
   {
      auto row = probs.row( t );
      const std::size_t depth = std::min( W, t + 1 );
      std::copy( row.begin(), row.end(), cur.begin() );
      for( std::size_t k = 1; k < depth; ++k )
      {
         std::span<const double> before( prev.data() + ( k - 1 ) * L, L );
         for( std::size_t s = 0; s < L; ++s )
            cur[k * L + s] =
                before[detail::best_predecessor( model, before, s )] + row[s];
      }
      if( depth == W )
      {
         std::span<const double> full( cur.data() + ( W - 1 ) * L, L );
         double v = full[detail::first_max_index( full )];
         if( !have_best || v > best_value )
         {
            best_value = v;
            best_start = t + 1 - W;
            have_best = true;
         }
      }
      std::swap( prev, cur );
   }

   return detail::decode_window_at( probs, model, best_start, W );
}

/// Same optimum as window_decode, found by solving one layered DP per
/// candidate start (T - W + 1 of them) and keeping the earliest best.
inline WindowDecodeResult
window_decode_per_start( const ProbabilityMatrix& probs,
                         const CyclicTransitionModel& model,
                         const WindowSpec& spec, unsigned workers = 1 )
{
   std::vector<double> values =
       window_start_objectives( probs, model, spec, workers );
   std::size_t best = detail::first_max_index( values );
   return detail::decode_window_at( probs, model, best, spec.width() );
}

} // namespace cycseg
