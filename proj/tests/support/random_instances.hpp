#pragma once

#include "cycseg/core.hpp"

#include <random>

namespace cycseg::testing {

/// Random row-stochastic matrix. With `dyadic` set, every entry is a
/// multiple of 1/8 so path sums are exact and ties are common.
inline ProbabilityMatrix
random_probabilities( std::mt19937_64& rng, std::size_t samples,
                      std::size_t states, bool dyadic )
{
   Matrix<double> m( samples, states, 0.0 );
   if( dyadic )
   {
      std::uniform_int_distribution<std::size_t> pick( 0, states - 1 );
      for( std::size_t t = 0; t < samples; ++t )
         for( int unit = 0; unit < 8; ++unit )
            m( t, pick( rng ) ) += 0.125;
   }
   else
   {
      std::uniform_real_distribution<double> u( 0.001, 1.0 );
      for( std::size_t t = 0; t < samples; ++t )
      {
         double sum = 0.0;
         for( std::size_t s = 0; s < states; ++s )
            sum += m( t, s ) = u( rng );
         for( std::size_t s = 0; s < states; ++s )
            m( t, s ) /= sum;
      }
   }
   return validate_probability_matrix( std::move( m ) );
}

/// Uniformly random transition-valid sequence.
inline StateSequence
random_valid_sequence( std::mt19937_64& rng,
                       const CyclicTransitionModel& model,
                       std::size_t length )
{
   StateSequence seq( length );
   std::uniform_int_distribution<std::size_t> first( 0, model.states() - 1 );
   std::bernoulli_distribution advance( 0.5 );
   seq[0] = first( rng );
   for( std::size_t t = 1; t < length; ++t )
      seq[t] = advance( rng ) ? model.next( seq[t - 1] ) : seq[t - 1];
   return seq;
}

inline ProbabilityMatrix
one_hot( const StateSequence& states, std::size_t L )
{
   Matrix<double> m( states.size(), L, 0.0 );
   for( std::size_t t = 0; t < states.size(); ++t )
      m( t, states[t] ) = 1.0;
   return validate_probability_matrix( std::move( m ) );
}

} // namespace cycseg::testing
