// Argmax vs constrained decode on three samples of three states, then the best
// two-sample window of a short two-state signal.

#include "cycseg/decode.hpp"
#include "cycseg/window.hpp"

#include <iostream>

namespace {

void
print( const char* label, const cycseg::StateSequence& s, double objective )
{
   std::cout << label << ':';
   for( auto v : s )
      std::cout << ' ' << v;
   std::cout << "  (objective " << objective << ")\n";
}

} // namespace

int
main()
{
   using namespace cycseg;

   auto probs = validate_probability_matrix(
       { { 0.6, 0.2, 0.2 }, { 0.1, 0.2, 0.7 }, { 0.5, 0.3, 0.2 } } );
   CyclicTransitionModel model( 3 );

   auto greedy = argmax_decode( probs );
   print( "argmax ", greedy.states, greedy.objective );
   if( !is_valid_sequence( model, greedy.states ) )
      std::cout << "         ^ not allowed by the cyclic model\n";
   auto best = viterbi_decode( probs, model );
   print( "viterbi", best.states, best.objective );

   auto signal = validate_probability_matrix(
       { { 0.5, 0.5 }, { 0.1, 0.9 }, { 0.2, 0.8 }, { 0.9, 0.1 }, { 0.5, 0.5 } } );
   auto w = window_decode( signal, CyclicTransitionModel( 2 ), WindowSpec::from_samples( 2 ) );
   std::cout << "window  : start " << w.start << ", width " << w.width << '\n';
   print( "         states", w.states, w.objective );
}
