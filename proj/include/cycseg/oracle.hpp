#pragma once

// Exhaustive reference solvers for small instances. They share no code with
// the dynamic programs in decode.hpp / window.hpp beyond the domain types.

#include "cycseg/core.hpp"
#include "cycseg/window.hpp"

#include <cstdint>
#include <functional>

namespace cycseg::oracle {

inline constexpr std::size_t kMaxSamples = 16;
inline constexpr std::size_t kMaxStates = 5;
inline constexpr std::size_t kMaxWindow = 8;

/// Calls `visit` with every transition-valid sequence of the given length
/// and returns how many there were (L * 2^(length-1)).
inline std::uint64_t
enumerate_valid_sequences(
    const CyclicTransitionModel& model, std::size_t length,
    const std::function<void( const StateSequence& )>& visit )
{
   if( length == 0 )
      return 0;
   const std::uint64_t choices = std::uint64_t{ 1 } << ( length - 1 );
   std::uint64_t count = 0;
   StateSequence seq( length );
   for( std::size_t first = 0; first < model.states(); ++first )
      for( std::uint64_t bits = 0; bits < choices; ++bits )
      {
         // bit t-1 set: advance at step t, otherwise stay.
         seq[0] = first;
         for( std::size_t t = 1; t < length; ++t )
            seq[t] = ( bits >> ( t - 1 ) ) & 1u ? model.next( seq[t - 1] )
                                                 : seq[t - 1];
         visit( seq );
         ++count;
      }
   return count;
}

/// Tie rule shared with the decoders: compare from the last sample
/// backwards, smaller state first.
inline bool
reverse_lex_less( const StateSequence& a, const StateSequence& b )
{
   for( std::size_t i = a.size(); i-- > 0; )
      if( a[i] != b[i] )
         return a[i] < b[i];
   return false;
}

namespace detail {

inline DecodedSequence
best_over_rows( const ProbabilityMatrix& probs,
                const CyclicTransitionModel& model, std::size_t offset,
                std::size_t length, std::uint64_t* enumerated )
{
   DecodedSequence best;
   bool have = false;
   std::uint64_t n = enumerate_valid_sequences(
       model, length, [&]( const StateSequence& seq ) {
          double value = path_objective( probs, seq, offset );
          if( !have || value > best.objective ||
              ( value == best.objective &&
                reverse_lex_less( seq, best.states ) ) )
          {
             best.states = seq;
             best.objective = value;
             have = true;
          }
       } );
   if( enumerated )
      *enumerated += n;
   return best;
}

} // namespace detail

inline DecodedSequence
brute_force_full( const ProbabilityMatrix& probs,
                  const CyclicTransitionModel& model,
                  std::uint64_t* enumerated = nullptr )
{
   require_same_states( probs, model );
   if( probs.samples() > kMaxSamples || model.states() > kMaxStates )
      throw Error( ErrorCode::InstanceTooLarge,
                   "brute force limited to T <= 16 and L <= 5" );
   return detail::best_over_rows( probs, model, 0, probs.samples(),
                                  enumerated );
}

inline WindowDecodeResult
brute_force_window( const ProbabilityMatrix& probs,
                    const CyclicTransitionModel& model,
                    const WindowSpec& spec )
{
   require_same_states( probs, model );
   const std::size_t W = spec.resolve( probs.samples() );
   if( probs.samples() > kMaxSamples || W > kMaxWindow ||
       model.states() > kMaxStates )
      throw Error( ErrorCode::InstanceTooLarge,
                   "brute force limited to T <= 16, W <= 8 and L <= 5" );

   WindowDecodeResult best;
   bool have = false;
   for( std::size_t start = 0; start + W <= probs.samples(); ++start )
   {
      DecodedSequence here =
          detail::best_over_rows( probs, model, start, W, nullptr );
      if( !have || here.objective > best.objective )
      {
         best = { start, W, std::move( here.states ), here.objective };
         have = true;
      }
   }
   return best;
}

} // namespace cycseg::oracle
