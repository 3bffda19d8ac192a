#include "cycseg/lstm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace cycseg {
namespace {

GateWeights
scalar_gate( double wx, double bias )
{
   GateWeights g{ Matrix<double>( 1, 1, wx ), Matrix<double>( 1, 1, 0.7 ), { bias } };
   return g;
}

LstmWeights
scalar_weights()
{
   LstmWeights w;
   w.features = 1;
   w.memory = 1;
   w.states = 2;
   w.forward = { scalar_gate( 0.4, 0.1 ), scalar_gate( -0.2, 0.05 ),
                 scalar_gate( 0.9, -0.1 ), scalar_gate( 1.2, 0.3 ) };
   w.backward = { scalar_gate( 0.2, 0.0 ), scalar_gate( 0.3, 0.1 ),
                  scalar_gate( -0.5, 0.2 ), scalar_gate( 0.7, -0.4 ) };
   w.output = Matrix<double>( 2, 2, 0.0 );
   return w;
}

Matrix<double>
random_features( std::mt19937_64& rng, std::size_t T, std::size_t N )
{
   std::normal_distribution<double> g( 0.0, 1.0 );
   Matrix<double> x( T, N );
   for( std::size_t t = 0; t < T; ++t )
      for( double& v : x.row( t ) )
         v = g( rng );
   return x;
}

// Single step with x = 0.5 and zero initial state, evaluated by an
// independent scalar script; the recurrent weights do not contribute.
TEST( LstmForward, HandExecutedSingleStep )
{
   Matrix<double> x( 1, 1, 0.5 );
   auto h = lstm_forward( scalar_weights(), x, GateMode::TanhGates );
   ASSERT_EQ( h.rows(), 1u );
   ASSERT_EQ( h.cols(), 2u );
   EXPECT_NEAR( h( 0, 0 ), 0.06868696533332015, 1e-15 );
   EXPECT_NEAR( h( 0, 1 ), -0.0024254894238199204, 1e-15 );

   auto hs = lstm_forward( scalar_weights(), x, GateMode::Standard );
   EXPECT_NEAR( hs( 0, 0 ), 0.2286176486314137, 1e-15 );
   EXPECT_NEAR( hs( 0, 1 ), -0.01278285218254514, 1e-15 );
}

TEST( LstmForward, ZeroWeightsGiveZeroHiddenAndUniformOutput )
{
   auto w = random_lstm_weights( 3, 5, 4, 1, 0.0 );
   std::mt19937_64 rng( 2 );
   auto x = random_features( rng, 20, 3 );
   for( auto mode : { GateMode::TanhGates, GateMode::Standard } )
   {
      auto h = lstm_forward( w, x, mode );
      for( double v : h.data() )
         EXPECT_EQ( v, 0.0 );
      auto p = output_probabilities( w.output, h );
      for( std::size_t t = 0; t < p.samples(); ++t )
         for( std::size_t s = 0; s < 4; ++s )
            EXPECT_EQ( p( t, s ), 0.25 );
   }
}

TEST( LstmForward, TimeReversalSwapsDirections )
{
   std::mt19937_64 rng( 3 );
   auto w = random_lstm_weights( 4, 6, 3, 77, 0.8 );
   auto x = random_features( rng, 25, 4 );
   auto swapped = w;
   std::swap( swapped.forward, swapped.backward );
   Matrix<double> reversed( x.rows(), x.cols() );
   for( std::size_t t = 0; t < x.rows(); ++t )
      std::copy( x.row( t ).begin(), x.row( t ).end(),
                 reversed.row( x.rows() - 1 - t ).begin() );

   for( auto mode : { GateMode::TanhGates, GateMode::Standard } )
   {
      auto h = lstm_forward( w, x, mode );
      auto hr = lstm_forward( swapped, reversed, mode );
      const std::size_t T = x.rows(), M = w.memory;
      for( std::size_t t = 0; t < T; ++t )
         for( std::size_t m = 0; m < M; ++m )
         {
            EXPECT_NEAR( hr( T - 1 - t, m ), h( t, M + m ), 1e-12 );
            EXPECT_NEAR( hr( T - 1 - t, M + m ), h( t, m ), 1e-12 );
         }
   }
}

TEST( LstmForward, HiddenStaysInTanhEnvelopeAndIsDeterministic )
{
   std::mt19937_64 rng( 4 );
   auto w = random_lstm_weights( 2, 4, 4, 5, 3.0 );
   auto x = random_features( rng, 50, 2 );
   for( auto mode : { GateMode::TanhGates, GateMode::Standard } )
   {
      auto h = lstm_forward( w, x, mode );
      for( double v : h.data() )
      {
         EXPECT_LE( v, 1.0 );
         EXPECT_GE( v, -1.0 );
      }
      EXPECT_EQ( h, lstm_forward( w, x, mode ) );
   }
}

TEST( LstmForward, Errors )
{
   auto w = random_lstm_weights( 3, 2, 2, 1 );
   auto code_of = [&]( auto&& fn ) {
      try
      {
         fn();
      }
      catch( const Error& e )
      {
         return e.code();
      }
      return ErrorCode::Io;
   };
   EXPECT_EQ( code_of( [&] { lstm_forward( w, Matrix<double>( 4, 2 ) ); } ),
              ErrorCode::ShapeMismatch );
   Matrix<double> bad( 2, 3, 0.0 );
   bad( 1, 2 ) = std::numeric_limits<double>::infinity();
   EXPECT_EQ( code_of( [&] { lstm_forward( w, bad ); } ),
              ErrorCode::NonFiniteInput );
   auto broken = w;
   broken.forward.forget_gate.bias.pop_back();
   EXPECT_EQ( code_of( [&] { lstm_forward( broken, Matrix<double>( 4, 3 ) ); } ),
              ErrorCode::ShapeMismatch );
   EXPECT_EQ( code_of( [&] {
                 output_probabilities( Matrix<double>( 2, 3 ), Matrix<double>( 1, 4 ) );
              } ),
              ErrorCode::ShapeMismatch );
}

TEST( OutputProbabilities, ClosedFormTwoStates )
{
   Matrix<double> w( 2, 1, 0.0 );
   w( 0, 0 ) = std::log( 3.0 );
   Matrix<double> h( 1, 1, 1.0 );
   auto p = output_probabilities( w, h );
   EXPECT_NEAR( p( 0, 0 ), 0.75, 1e-15 );
   EXPECT_NEAR( p( 0, 1 ), 0.25, 1e-15 );
}

TEST( Softmax, ShiftInvariance )
{
   std::mt19937_64 rng( 6 );
   std::normal_distribution<double> g( 0.0, 3.0 );
   for( int trial = 0; trial < 200; ++trial )
   {
      std::vector<double> logits( 5 );
      for( double& v : logits )
         v = g( rng );
      auto shifted = logits, plain = logits, offset = logits;
      for( double& v : offset )
         v += 17.5;
      softmax( shifted );
      softmax( plain, false );
      softmax( offset );
      double sum = 0.0;
      for( std::size_t i = 0; i < logits.size(); ++i )
      {
         EXPECT_NEAR( shifted[i], plain[i], 1e-12 );
         EXPECT_NEAR( shifted[i], offset[i], 1e-12 );
         EXPECT_GT( shifted[i], 0.0 );
         sum += shifted[i];
      }
      EXPECT_NEAR( sum, 1.0, 1e-12 );
   }
}

TEST( LstmWeightsJson, RoundTripAndErrors )
{
   auto w = random_lstm_weights( 3, 4, 5, 12 );
   auto j = to_json( w );
   auto back = lstm_weights_from_json( j );
   EXPECT_EQ( back.output, w.output );
   EXPECT_EQ( back.backward.candidate.recurrent, w.backward.candidate.recurrent );
   EXPECT_EQ( back.forward.forget_gate.bias, w.forward.forget_gate.bias );

   auto missing = j;
   missing["forward"].erase( "output_gate" );
   try
   {
      lstm_weights_from_json( missing );
      FAIL();
   }
   catch( const Error& e )
   {
      EXPECT_EQ( e.code(), ErrorCode::Parse );
      EXPECT_NE( std::string( e.what() ).find( "forward.output_gate" ),
                 std::string::npos );
   }

   auto wrong_shape = j;
   wrong_shape["memory"] = 3;
   try
   {
      lstm_weights_from_json( wrong_shape );
      FAIL();
   }
   catch( const Error& e )
   {
      EXPECT_EQ( e.code(), ErrorCode::ShapeMismatch );
   }
}

} // namespace
} // namespace cycseg
