#pragma once

#include "cycseg/core.hpp"
#include "cycseg/lstm.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cycseg {

struct NoiseBurst
{
   double start_s = 0.0;
   double length_s = 0.0;
   double uniformity = 1.0; // lambda in [0, 1]
};

struct SynthConfig
{
   std::size_t states = 4;
   double rate_hz = 50.0;
   double duration_s = 20.0;
   std::vector<double> mean_samples;
   std::vector<double> std_samples;
   double temperature = 0.5;
   // Gaussian logit noise: sigma_t = logit_noise + lambda_t * burst_logit_noise.
   // Both zero gives the plain tempered one-hot emission.
   double logit_noise = 0.0;
   double burst_logit_noise = 0.0;
   // AR(1) coefficient of the per-state noise over time; 0 draws it i.i.d.
   double noise_correlation = 0.0;
   std::vector<NoiseBurst> bursts;
   std::uint64_t seed = 0;

   std::size_t
   samples() const
   {
      return static_cast<std::size_t>( std::llround( duration_s * rate_hz ) );
   }

   SampleRange
   burst_range( const NoiseBurst& b ) const
   {
      auto begin = static_cast<std::size_t>( std::llround( b.start_s * rate_hz ) );
      auto len = static_cast<std::size_t>( std::llround( b.length_s * rate_hz ) );
      return { begin, std::min( begin + len, samples() ) };
   }

   void
   validate() const
   {
      auto fail = [] [[noreturn]] ( const std::string& what ) {
         throw Error( ErrorCode::InvalidConfig, what );
      };
      if( states < 2 )
         fail( "states must be at least 2" );
      if( !( rate_hz > 0.0 ) || !std::isfinite( rate_hz ) )
         fail( "rate_hz must be positive" );
      if( !( duration_s > 0.0 ) || !std::isfinite( duration_s ) || samples() == 0 )
         fail( "duration_s must cover at least one sample" );
      if( mean_samples.size() != states || std_samples.size() != states )
         fail( "mean_samples/std_samples need one entry per state" );
      for( std::size_t s = 0; s < states; ++s )
      {
         if( !( mean_samples[s] > 0.0 ) || !std::isfinite( mean_samples[s] ) )
            fail( "mean duration of state " + std::to_string( s ) + " must be positive" );
         if( !( std_samples[s] >= 0.0 ) || !std::isfinite( std_samples[s] ) )
            fail( "std duration of state " + std::to_string( s ) + " must be >= 0" );
      }
      if( !( temperature > 0.0 ) || !std::isfinite( temperature ) )
         fail( "temperature must be positive" );
      if( !( logit_noise >= 0.0 ) || !( burst_logit_noise >= 0.0 ) )
         fail( "logit noise must be >= 0" );
      if( !( noise_correlation >= 0.0 && noise_correlation < 1.0 ) )
         fail( "noise_correlation must lie in [0, 1)" );
      for( const auto& b : bursts )
      {
         if( !( b.uniformity >= 0.0 && b.uniformity <= 1.0 ) )
            fail( "burst uniformity must lie in [0, 1]" );
         if( !( b.start_s >= 0.0 ) || !( b.length_s > 0.0 ) ||
             b.start_s + b.length_s > duration_s + 0.5 / rate_hz )
            fail( "burst must lie within the signal" );
      }
   }
};

/// PCG-like defaults: S1, systole, S2, diastole at 50 Hz.
inline SynthConfig
pcg_preset( std::uint64_t seed = 0 )
{
   SynthConfig c;
   c.states = 4;
   c.rate_hz = 50.0;
   c.duration_s = 20.0;
   c.mean_samples = { 0.12 * 50, 0.30 * 50, 0.10 * 50, 0.45 * 50 };
   c.std_samples = { 1.0, 2.0, 1.0, 3.0 };
   c.temperature = 0.5;
   c.seed = seed;
   return c;
}

namespace detail {

// Independent streams for durations and emissions from one seed.
inline std::mt19937_64
synth_stream( std::uint64_t seed, std::uint32_t stream )
{
   std::seed_seq seq{ static_cast<std::uint32_t>( seed ),
                      static_cast<std::uint32_t>( seed >> 32 ), stream };
   return std::mt19937_64( seq );
}

} // namespace detail

/// Cyclic semi-Markov sequence 0, 1, ..., L-1, 0, ... truncated to the duration.
inline StateSequence
generate_ground_truth( const SynthConfig& cfg )
{
   cfg.validate();
   auto rng = detail::synth_stream( cfg.seed, 1 );
   const std::size_t T = cfg.samples();
   StateSequence out;
   out.reserve( T );
   std::size_t state = 0;
   while( out.size() < T )
   {
      std::normal_distribution<double> dur( cfg.mean_samples[state],
                                            cfg.std_samples[state] );
      long long n = 0;
      for( int attempt = 0; attempt < 1000 && n < 1; ++attempt )
         n = std::llround( dur( rng ) );
      n = std::max( n, 1LL );
      for( long long k = 0; k < n && out.size() < T; ++k )
         out.push_back( state );
      state = ( state + 1 ) % cfg.states;
   }
   return out;
}

inline ProbabilityMatrix
emit_probabilities( const StateSequence& gt, const SynthConfig& cfg )
{
   cfg.validate();
   if( gt.size() != cfg.samples() )
      throw Error( ErrorCode::InvalidConfig,
                   "ground truth length does not match the configured duration" );
   check_states_in_range( CyclicTransitionModel( cfg.states ), gt );

   const std::size_t T = gt.size(), L = cfg.states;
   std::vector<double> lambda( T, 0.0 );
   for( const auto& b : cfg.bursts )
   {
      auto r = cfg.burst_range( b );
      for( std::size_t t = r.begin; t < r.end; ++t )
         lambda[t] = b.uniformity;
   }

   auto rng = detail::synth_stream( cfg.seed, 2 );
   std::normal_distribution<double> noise( 0.0, 1.0 );
   const bool noisy = cfg.logit_noise > 0.0 || cfg.burst_logit_noise > 0.0;
   const double rho = cfg.noise_correlation;
   const double innovation = std::sqrt( 1.0 - rho * rho );
   Matrix<double> m( T, L );
   std::vector<double> row( L ), eps( L, 0.0 );
   for( std::size_t t = 0; t < T; ++t )
   {
      const double sigma = cfg.logit_noise + lambda[t] * cfg.burst_logit_noise;
      for( std::size_t s = 0; s < L; ++s )
      {
         double z = s == gt[t] ? 1.0 : 0.0;
         if( noisy )
         {
            // Unit-variance stationary AR(1) per state.
            eps[s] = t == 0 ? noise( rng ) : rho * eps[s] + innovation * noise( rng );
            z += sigma * eps[s];
         }
         row[s] = z / cfg.temperature;
      }
      softmax( row );
      for( std::size_t s = 0; s < L; ++s )
         m( t, s ) = ( 1.0 - lambda[t] ) * row[s] + lambda[t] / static_cast<double>( L );
   }
   return validate_probability_matrix( std::move( m ), cfg.rate_hz );
}

struct SynthRecording
{
   std::string name;
   SynthConfig config;
   StateSequence ground_truth;
   ProbabilityMatrix probabilities;
};

inline SynthRecording
generate_recording( const SynthConfig& cfg, std::string name = "recording" )
{
   auto gt = generate_ground_truth( cfg );
   auto p = emit_probabilities( gt, cfg );
   return { std::move( name ), cfg, std::move( gt ), std::move( p ) };
}

/// Benchmark corpus settings: 20 s PCG-like recordings at 50 Hz, one 4 s
/// burst with lambda 0.9 at a random sample-aligned position, temporally
/// correlated logit noise that grows inside the burst.
struct CorpusSettings
{
   std::size_t recordings = 100;
   double duration_s = 20.0;
   double burst_length_s = 4.0;
   double burst_uniformity = 0.9;
   double temperature = 0.5;
   double logit_noise = 0.2;
   double burst_logit_noise = 1.5;
   double noise_correlation = 0.8;
   std::uint64_t master_seed = 20240601;
};

inline std::string
corpus_recording_name( std::size_t index )
{
   std::string digits = std::to_string( index );
   return "rec_" + std::string( digits.size() < 4 ? 4 - digits.size() : 0, '0' ) +
          digits;
}

inline SynthConfig
corpus_config( const CorpusSettings& settings, std::size_t index )
{
   std::seed_seq seq{ static_cast<std::uint32_t>( settings.master_seed ),
                      static_cast<std::uint32_t>( settings.master_seed >> 32 ),
                      static_cast<std::uint32_t>( index ) };
   std::mt19937_64 rng( seq );
   SynthConfig c = pcg_preset( rng() );
   c.duration_s = settings.duration_s;
   c.temperature = settings.temperature;
   c.logit_noise = settings.logit_noise;
   c.burst_logit_noise = settings.burst_logit_noise;
   c.noise_correlation = settings.noise_correlation;
   const auto T = static_cast<long long>( c.samples() );
   const auto len = std::llround( settings.burst_length_s * c.rate_hz );
   if( len > 0 && len <= T )
   {
      std::uniform_int_distribution<long long> start( 0, T - len );
      c.bursts.push_back( { static_cast<double>( start( rng ) ) / c.rate_hz,
                            settings.burst_length_s, settings.burst_uniformity } );
   }
   c.validate();
   return c;
}

inline std::vector<SynthRecording>
generate_corpus( const CorpusSettings& settings )
{
   std::vector<SynthRecording> out;
   out.reserve( settings.recordings );
   for( std::size_t i = 0; i < settings.recordings; ++i )
      out.push_back( generate_recording( corpus_config( settings, i ),
                                         corpus_recording_name( i ) ) );
   return out;
}

} // namespace cycseg
