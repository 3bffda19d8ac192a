#pragma once

// Bidirectional LSTM inference producing per-sample state probabilities.
// Inference only; weights come from elsewhere (or the seeded initializer,
// which exists to build test fixtures).

#include "cycseg/core.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace cycseg {

/// Which activation sits on each gate.
///  TanhGates: i = tanh, f = logistic, o = tanh, candidate = logistic.
///  Standard: i, f, o = logistic, candidate = tanh.
/// In both modes c_t = f * c_{t-1} + i * g(candidate) and h_t = tanh(c_t) * o.
enum class GateMode { TanhGates, Standard };

struct GateWeights
{
   Matrix<double> input;      // M x N
   Matrix<double> recurrent;  // M x M
   std::vector<double> bias;  // M
};

struct DirectionWeights
{
   GateWeights input_gate;
   GateWeights forget_gate;
   GateWeights output_gate;
   GateWeights candidate;
};

struct LstmWeights
{
   std::size_t features = 0;  // N
   std::size_t memory = 0;    // M
   std::size_t states = 0;    // L
   DirectionWeights forward;
   DirectionWeights backward;
   Matrix<double> output;     // L x 2M, shared by both directions

   void
   validate() const
   {
      auto fail = []( const std::string& what ) {
         throw Error( ErrorCode::ShapeMismatch, what );
      };
      if( features == 0 || memory == 0 || states < 2 )
         fail( "weights need N >= 1, M >= 1 and L >= 2" );
      auto check_finite = []( std::span<const double> v, const std::string& what ) {
         for( double x : v )
            if( !std::isfinite( x ) )
               throw Error( ErrorCode::NonFiniteInput, what + " is not finite" );
      };
      auto check_gate = [&]( const GateWeights& g, const std::string& name ) {
         if( g.input.rows() != memory || g.input.cols() != features )
            fail( name + ".input must be " + std::to_string( memory ) + "x" +
                  std::to_string( features ) );
         if( g.recurrent.rows() != memory || g.recurrent.cols() != memory )
            fail( name + ".recurrent must be " + std::to_string( memory ) + "x" +
                  std::to_string( memory ) );
         if( g.bias.size() != memory )
            fail( name + ".bias must have " + std::to_string( memory ) +
                  " entries" );
         check_finite( g.input.data(), name + ".input" );
         check_finite( g.recurrent.data(), name + ".recurrent" );
         check_finite( g.bias, name + ".bias" );
      };
      for( auto [dir, label] :
           { std::pair{ &forward, "forward" }, std::pair{ &backward, "backward" } } )
      {
         std::string p = label;
         check_gate( dir->input_gate, p + ".input_gate" );
         check_gate( dir->forget_gate, p + ".forget_gate" );
         check_gate( dir->output_gate, p + ".output_gate" );
         check_gate( dir->candidate, p + ".candidate" );
      }
      if( output.rows() != states || output.cols() != 2 * memory )
         fail( "output must be " + std::to_string( states ) + "x" +
               std::to_string( 2 * memory ) );
      check_finite( output.data(), "output" );
   }
};

inline double
logistic( double x )
{
   return 1.0 / ( 1.0 + std::exp( -x ) );
}

namespace detail {

// W_x x + W_h h + b for one gate.
inline void
gate_preactivation( const GateWeights& g, std::span<const double> x,
                    std::span<const double> h, std::vector<double>& out )
{
   const std::size_t M = g.bias.size();
   out.assign( g.bias.begin(), g.bias.end() );
   for( std::size_t m = 0; m < M; ++m )
   {
      double acc = 0.0;
      auto wx = g.input.row( m );
      for( std::size_t n = 0; n < x.size(); ++n )
         acc += wx[n] * x[n];
      auto wh = g.recurrent.row( m );
      for( std::size_t k = 0; k < M; ++k )
         acc += wh[k] * h[k];
      out[m] += acc;
   }
}

// Runs one direction over all samples and writes h into columns
// [column, column + M) of `hidden`.
inline void
run_direction( const DirectionWeights& w, const Matrix<double>& x,
               bool reverse, GateMode mode, std::size_t column,
               Matrix<double>& hidden )
{
   const std::size_t T = x.rows();
   const std::size_t M = w.input_gate.bias.size();
   std::vector<double> h( M, 0.0 ), c( M, 0.0 );
   std::vector<double> i( M ), f( M ), o( M ), g( M );
   for( std::size_t step = 0; step < T; ++step )
   {
      const std::size_t t = reverse ? T - 1 - step : step;
      auto xt = x.row( t );
      gate_preactivation( w.input_gate, xt, h, i );
      gate_preactivation( w.forget_gate, xt, h, f );
      gate_preactivation( w.output_gate, xt, h, o );
      gate_preactivation( w.candidate, xt, h, g );
      for( std::size_t m = 0; m < M; ++m )
      {
         double in, forget, out, cand;
         if( mode == GateMode::TanhGates )
         {
            in = std::tanh( i[m] );
            forget = logistic( f[m] );
            out = std::tanh( o[m] );
            cand = logistic( g[m] );
         }
         else
         {
            in = logistic( i[m] );
            forget = logistic( f[m] );
            out = logistic( o[m] );
            cand = std::tanh( g[m] );
         }
         c[m] = c[m] * forget + in * cand;
         h[m] = std::tanh( c[m] ) * out;
         hidden( t, column + m ) = h[m];
      }
   }
}

} // namespace detail

/// Hidden states for a T x N feature sequence: row t is the forward state
/// followed by the backward state. Both passes start from zero h and c.
inline Matrix<double>
lstm_forward( const LstmWeights& weights, const Matrix<double>& features,
              GateMode mode = GateMode::TanhGates )
{
   weights.validate();
   if( features.rows() == 0 )
      throw Error( ErrorCode::ShapeMismatch, "feature sequence is empty" );
   if( features.cols() != weights.features )
      throw Error( ErrorCode::ShapeMismatch,
                   "features have " + std::to_string( features.cols() ) +
                       " columns, weights expect " +
                       std::to_string( weights.features ) );
   for( std::size_t t = 0; t < features.rows(); ++t )
      for( double v : features.row( t ) )
         if( !std::isfinite( v ) )
            throw Error( ErrorCode::NonFiniteInput,
                         "feature row " + std::to_string( t ) +
                             " is not finite" );

   Matrix<double> hidden( features.rows(), 2 * weights.memory, 0.0 );
   detail::run_direction( weights.forward, features, false, mode, 0, hidden );
   detail::run_direction( weights.backward, features, true, mode,
                          weights.memory, hidden );
   return hidden;
}

/// In-place softmax. Subtracts the maximum first unless `shift` is false.
inline void
softmax( std::span<double> logits, bool shift = true )
{
   double top = 0.0;
   if( shift && !logits.empty() )
      top = *std::max_element( logits.begin(), logits.end() );
   double sum = 0.0;
   for( double& v : logits )
      sum += v = std::exp( v - top );
   for( double& v : logits )
      v /= sum;
}

/// Softmax output layer applied to every hidden row.
inline ProbabilityMatrix
output_probabilities( const Matrix<double>& output_weights,
                      const Matrix<double>& hidden,
                      std::optional<double> rate_hz = std::nullopt )
{
   if( output_weights.cols() != hidden.cols() )
      throw Error( ErrorCode::ShapeMismatch,
                   "output weights have " +
                       std::to_string( output_weights.cols() ) +
                       " columns, hidden state has " +
                       std::to_string( hidden.cols() ) );
   const std::size_t L = output_weights.rows();
   Matrix<double> probs( hidden.rows(), L, 0.0 );
   for( std::size_t t = 0; t < hidden.rows(); ++t )
   {
      auto h = hidden.row( t );
      auto out = probs.row( t );
      for( std::size_t s = 0; s < L; ++s )
      {
         auto w = output_weights.row( s );
         double acc = 0.0;
         for( std::size_t k = 0; k < h.size(); ++k )
            acc += w[k] * h[k];
         out[s] = acc;
      }
      softmax( out );
   }
   return validate_probability_matrix( std::move( probs ), rate_hz );
}

inline ProbabilityMatrix
infer_probabilities( const LstmWeights& weights,
                     const Matrix<double>& features,
                     GateMode mode = GateMode::TanhGates,
                     std::optional<double> rate_hz = std::nullopt )
{
   return output_probabilities( weights.output,
                                lstm_forward( weights, features, mode ),
                                rate_hz );
}

/// Every weight and bias drawn uniformly from [-range, range].
inline LstmWeights
random_lstm_weights( std::size_t features, std::size_t memory,
                     std::size_t states, std::uint64_t seed,
                     double range = 0.05 )
{
   std::mt19937_64 rng( seed );
   std::uniform_real_distribution<double> u( -range, range );
   auto fill = [&]( std::size_t r, std::size_t c ) {
      Matrix<double> m( r, c );
      for( std::size_t i = 0; i < r; ++i )
         for( double& v : m.row( i ) )
            v = u( rng );
      return m;
   };
   auto gate = [&]() {
      GateWeights g{ fill( memory, features ), fill( memory, memory ), {} };
      g.bias.resize( memory );
      for( double& b : g.bias )
         b = u( rng );
      return g;
   };
   auto direction = [&]() {
      DirectionWeights d;
      d.input_gate = gate();
      d.forget_gate = gate();
      d.output_gate = gate();
      d.candidate = gate();
      return d;
   };
   LstmWeights w;
   w.features = features;
   w.memory = memory;
   w.states = states;
   w.forward = direction();
   w.backward = direction();
   w.output = fill( states, 2 * memory );
   return w;
}

// ---------------------------------------------------------------------------
// Weight file (JSON)
//
// {
//   "features": N, "memory": M, "states": L,
//   "forward":  { "input_gate":  { "input": [[..]], "recurrent": [[..]], "bias": [..] },
//                 "forget_gate": {..}, "output_gate": {..}, "candidate": {..} },
//   "backward": { same keys },
//   "output": [[..]]            // L rows of 2M; forward half first
// }

namespace detail {

inline nlohmann::json
matrix_to_json( const Matrix<double>& m )
{
   auto rows = nlohmann::json::array();
   for( std::size_t r = 0; r < m.rows(); ++r )
      rows.push_back( std::vector<double>( m.row( r ).begin(), m.row( r ).end() ) );
   return rows;
}

inline Matrix<double>
matrix_from_json( const nlohmann::json& j, const std::string& key )
{
   if( !j.is_array() )
      throw Error( ErrorCode::Parse, key + " must be an array of rows" );
   try
   {
      return Matrix<double>::from_rows( j.get<std::vector<std::vector<double>>>() );
   }
   catch( const Error& e )
   {
      throw Error( ErrorCode::ShapeMismatch, key + ": " + e.what() );
   }
}

inline const nlohmann::json&
require_key( const nlohmann::json& j, const std::string& key,
             const std::string& where )
{
   if( !j.is_object() || !j.contains( key ) )
      throw Error( ErrorCode::Parse, "missing key " + where + key );
   return j.at( key );
}

} // namespace detail

inline nlohmann::json
to_json( const LstmWeights& w )
{
   auto gate = []( const GateWeights& g ) {
      return nlohmann::json{ { "input", detail::matrix_to_json( g.input ) },
                             { "recurrent", detail::matrix_to_json( g.recurrent ) },
                             { "bias", g.bias } };
   };
   auto direction = [&]( const DirectionWeights& d ) {
      return nlohmann::json{ { "input_gate", gate( d.input_gate ) },
                             { "forget_gate", gate( d.forget_gate ) },
                             { "output_gate", gate( d.output_gate ) },
                             { "candidate", gate( d.candidate ) } };
   };
   return { { "features", w.features },
            { "memory", w.memory },
            { "states", w.states },
            { "forward", direction( w.forward ) },
            { "backward", direction( w.backward ) },
            { "output", detail::matrix_to_json( w.output ) } };
}

inline LstmWeights
lstm_weights_from_json( const nlohmann::json& j )
{
   using detail::require_key;
   try
   {
      auto gate = [&]( const nlohmann::json& parent, const std::string& name,
                       const std::string& where ) {
         const auto& g = require_key( parent, name, where );
         std::string here = where + name + ".";
         GateWeights out{
             detail::matrix_from_json( require_key( g, "input", here ),
                                       here + "input" ),
             detail::matrix_from_json( require_key( g, "recurrent", here ),
                                       here + "recurrent" ),
             require_key( g, "bias", here ).get<std::vector<double>>() };
         return out;
      };
      auto direction = [&]( const std::string& name ) {
         const auto& d = require_key( j, name, "" );
         std::string where = name + ".";
         DirectionWeights out;
         out.input_gate = gate( d, "input_gate", where );
         out.forget_gate = gate( d, "forget_gate", where );
         out.output_gate = gate( d, "output_gate", where );
         out.candidate = gate( d, "candidate", where );
         return out;
      };
      LstmWeights w;
      w.features = require_key( j, "features", "" ).get<std::size_t>();
      w.memory = require_key( j, "memory", "" ).get<std::size_t>();
      w.states = require_key( j, "states", "" ).get<std::size_t>();
      w.forward = direction( "forward" );
      w.backward = direction( "backward" );
      w.output = detail::matrix_from_json( require_key( j, "output", "" ), "output" );
      w.validate();
      return w;
   }
   catch( const nlohmann::json::exception& e )
   {
      throw Error( ErrorCode::Parse, std::string( "weight file: " ) + e.what() );
   }
}

inline LstmWeights
load_lstm_weights( const std::string& path )
{
   std::ifstream in( path );
   if( !in )
      throw Error( ErrorCode::Io, "cannot open " + path );
   nlohmann::json j;
   try
   {
      in >> j;
   }
   catch( const nlohmann::json::exception& e )
   {
      throw Error( ErrorCode::Parse, path + ": " + e.what() );
   }
   return lstm_weights_from_json( j );
}

} // namespace cycseg
