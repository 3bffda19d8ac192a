#pragma once

#include "cycseg/core.hpp"

#include <cstdint>
#include <vector>

namespace cycseg {

/// Per-sample argmax. Ties go to the smaller state index. The result may
/// contain transitions the cyclic model forbids.
inline DecodedSequence
argmax_decode( const ProbabilityMatrix& probs )
{
   DecodedSequence out;
   out.states.resize( probs.samples() );
   for( std::size_t t = 0; t < probs.samples(); ++t )
   {
      auto row = probs.row( t );
      std::size_t best = 0;
      for( std::size_t s = 1; s < row.size(); ++s )
         if( row[s] > row[best] )
            best = s;
      out.states[t] = best;
      out.objective += row[best];
   }
   return out;
}

/// Layered DAG whose origin-to-destination paths are exactly the
/// transition-valid state sequences. Vertex 0 is the origin, vertex
/// 1 + t*L + s is (t, s) and the last vertex is the destination. Arcs are
/// stored grouped by source layer, which is a topological order.
struct DecodingGraph
{
   struct Arc
   {
      std::size_t from;
      std::size_t to;
      double distance;
   };

   std::size_t samples = 0;
   std::size_t states = 0;
   std::vector<Arc> arcs;

   std::size_t
   vertex_count() const noexcept
   {
      return samples * states + 2;
   }
   std::size_t
   origin() const noexcept
   {
      return 0;
   }
   std::size_t
   destination() const noexcept
   {
      return samples * states + 1;
   }
   std::size_t
   vertex( std::size_t t, std::size_t s ) const noexcept
   {
      return 1 + t * states + s;
   }
};

inline DecodingGraph
build_decoding_graph( const ProbabilityMatrix& probs,
                      const CyclicTransitionModel& model )
{
   require_same_states( probs, model );
   DecodingGraph g;
   g.samples = probs.samples();
   g.states = probs.states();
   g.arcs.reserve( 2 * g.samples * g.states );

   for( std::size_t s = 0; s < g.states; ++s )
      g.arcs.push_back( { g.origin(), g.vertex( 0, s ), probs( 0, s ) } );
   for( std::size_t t = 0; t + 1 < g.samples; ++t )
      for( std::size_t s = 0; s < g.states; ++s )
      {
         g.arcs.push_back(
             { g.vertex( t, s ), g.vertex( t + 1, s ), probs( t + 1, s ) } );
         std::size_t n = model.next( s );
         g.arcs.push_back(
             { g.vertex( t, s ), g.vertex( t + 1, n ), probs( t + 1, n ) } );
      }
   for( std::size_t s = 0; s < g.states; ++s )
      g.arcs.push_back(
          { g.vertex( g.samples - 1, s ), g.destination(), 0.0 } );
   return g;
}

namespace detail {

// Best predecessor of s among {s, s-1 mod L}; equal values resolve to the
// smaller index.
inline std::size_t
best_predecessor( const CyclicTransitionModel& model,
                  std::span<const double> score, std::size_t s )
{
   std::size_t a = s;
   std::size_t b = model.previous( s );
   if( b < a )
      std::swap( a, b );
   return score[b] > score[a] ? b : a;
}

inline std::size_t
first_max_index( std::span<const double> score )
{
   std::size_t best = 0;
   for( std::size_t s = 1; s < score.size(); ++s )
      if( score[s] > score[best] )
         best = s;
   return best;
}

/// Best transition-valid path value over rows [begin, end); no backtrack.
inline double
best_path_value( const ProbabilityMatrix& probs,
                 const CyclicTransitionModel& model, std::size_t begin,
                 std::size_t end, std::vector<double>& prev,
                 std::vector<double>& cur )
{
   const std::size_t L = model.states();
   prev.assign( probs.row( begin ).begin(), probs.row( begin ).end() );
   cur.resize( L );
   for( std::size_t t = begin + 1; t < end; ++t )
   {
      auto row = probs.row( t );
      for( std::size_t s = 0; s < L; ++s )
         cur[s] = prev[best_predecessor( model, prev, s )] + row[s];
      std::swap( prev, cur );
   }
   return prev[first_max_index( prev )];
}

} // namespace detail

/// Most likely transition-valid sequence: longest origin-destination path
/// in the decoding graph, computed layer by layer. Among equally good
/// sequences the one with the smallest final state wins, then the smallest
/// predecessor at each step going backwards.
inline DecodedSequence
viterbi_decode( const ProbabilityMatrix& probs,
                const CyclicTransitionModel& model )
{
   require_same_states( probs, model );
   const std::size_t T = probs.samples();
   const std::size_t L = model.states();

   // back(t, s) is the predecessor state of (t, s) on its best path.
   Matrix<std::uint32_t> back( T, L, 0 );
   std::vector<double> prev( probs.row( 0 ).begin(), probs.row( 0 ).end() );
   std::vector<double> cur( L );
   for( std::size_t t = 1; t < T; ++t )
   {
      auto row = probs.row( t );
      for( std::size_t s = 0; s < L; ++s )
      {
         std::size_t p = detail::best_predecessor( model, prev, s );
         back( t, s ) = static_cast<std::uint32_t>( p );
         cur[s] = prev[p] + row[s];
      }
      std::swap( prev, cur );
   }

   DecodedSequence out;
   out.states.resize( T );
   std::size_t s = detail::first_max_index( prev );
   out.objective = prev[s];
   for( std::size_t t = T; t-- > 0; )
   {
      out.states[t] = s;
      s = back( t, s );
   }
   return out;
}

} // namespace cycseg
