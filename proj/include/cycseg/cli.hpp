#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so
// tests can drive it in-process.
//
// Exit codes: 0 success, 2 usage or I/O, 3 validation/domain.

#include "cycseg/compare.hpp"
#include "cycseg/decode.hpp"
#include "cycseg/io.hpp"
#include "cycseg/lpexport.hpp"
#include "cycseg/lstm.hpp"
#include "cycseg/metrics.hpp"
#include "cycseg/synth.hpp"
#include "cycseg/window.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace cycseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;

namespace detail {

namespace fs = std::filesystem;

struct ProbabilitySource
{
   std::string probs;
   std::string weights;
   std::string features;
   std::string gate_mode = "tanh-gates";
};

inline void
add_probability_source( CLI::App& cmd, ProbabilitySource& src )
{
   cmd.add_option( "--probs", src.probs, "Probability matrix CSV (T rows, L columns)" );
   cmd.add_option( "--weights", src.weights, "LSTM weight JSON" );
   cmd.add_option( "--features", src.features, "Feature matrix CSV (T rows, N columns)" );
   cmd.add_option( "--gate-mode", src.gate_mode, "Gate activations" )
       ->check( CLI::IsMember( { "tanh-gates", "standard" } ) );
}

struct UsageError : std::runtime_error
{
   using std::runtime_error::runtime_error;
};

inline GateMode
parse_gate_mode( const std::string& s )
{
   return s == "standard" ? GateMode::Standard : GateMode::TanhGates;
}

inline ProbabilityMatrix
load_source( const ProbabilitySource& src, std::optional<double> rate )
{
   const bool have_matrix = !src.probs.empty();
   const bool have_net = !src.weights.empty() || !src.features.empty();
   if( have_matrix == have_net )
      throw UsageError( "give exactly one of --probs or --weights with --features" );
   if( have_matrix )
      return io::load_probabilities( src.probs, rate );
   if( src.weights.empty() || src.features.empty() )
      throw UsageError( "--weights and --features go together" );
   auto w = load_lstm_weights( src.weights );
   auto x = io::read_matrix_csv( src.features );
   return infer_probabilities( w, x, parse_gate_mode( src.gate_mode ), rate );
}

inline std::optional<double>
optional_rate( const CLI::Option* opt, double value )
{
   if( opt->count() )
      return value;
   return std::nullopt;
}

inline std::set<std::size_t>
complement( const std::set<std::size_t>& positive, std::size_t states )
{
   std::set<std::size_t> out;
   for( std::size_t s = 0; s < states; ++s )
      if( !positive.count( s ) )
         out.insert( s );
   return out;
}

inline nlohmann::json
to_json( const MetricsReport& r )
{
   nlohmann::json j{ { "accuracy", r.accuracy },
                     { "sensitivity", r.sensitivity },
                     { "specificity", r.specificity },
                     { "tp", r.tp },
                     { "fp", r.fp },
                     { "tn", r.tn },
                     { "fn", r.fn },
                     { "unmatched_negative", r.unmatched_negative },
                     { "sensitivity_undefined", r.sensitivity_undefined },
                     { "specificity_undefined", r.specificity_undefined } };
   if( r.evaluated_range )
      j["evaluated_range"] = { r.evaluated_range->begin, r.evaluated_range->end };
   else
      j["evaluated_range"] = nullptr;
   return j;
}

inline nlohmann::json
to_json( const SynthConfig& c )
{
   nlohmann::json bursts = nlohmann::json::array();
   for( const auto& b : c.bursts )
      bursts.push_back(
          { { "start_s", b.start_s }, { "length_s", b.length_s }, { "uniformity", b.uniformity } } );
   return { { "states", c.states },
            { "rate_hz", c.rate_hz },
            { "duration_s", c.duration_s },
            { "mean_samples", c.mean_samples },
            { "std_samples", c.std_samples },
            { "temperature", c.temperature },
            { "logit_noise", c.logit_noise },
            { "burst_logit_noise", c.burst_logit_noise },
            { "noise_correlation", c.noise_correlation },
            { "bursts", bursts },
            { "seed", c.seed } };
}

inline void
write_recording( const fs::path& dir, const SynthRecording& rec )
{
   auto matrix = dir / ( rec.name + ".csv" );
   io::write_matrix_csv( matrix, rec.probabilities.values() );
   io::MatrixMetadata meta;
   meta.rate_hz = rec.config.rate_hz;
   if( rec.config.states == 4 )
      meta.state_names = { "S1", "systole", "S2", "diastole" };
   meta.extra["synth"] = to_json( rec.config );
   io::write_sidecar( matrix, meta );
   io::write_annotation_csv( dir / ( rec.name + ".ann.csv" ), rec.ground_truth );
}

/// Recordings are the "<name>.ann.csv" files with a matching "<name>.csv".
inline std::vector<CompareInput>
read_corpus( const fs::path& dir, std::optional<double> rate )
{
   if( !fs::is_directory( dir ) )
      throw Error( ErrorCode::Io, dir.string() + " is not a directory" );
   std::vector<std::string> names;
   const std::string suffix = ".ann.csv";
   for( const auto& entry : fs::directory_iterator( dir ) )
   {
      auto file = entry.path().filename().string();
      if( file.size() > suffix.size() &&
          file.compare( file.size() - suffix.size(), suffix.size(), suffix ) == 0 )
         names.push_back( file.substr( 0, file.size() - suffix.size() ) );
   }
   if( names.empty() )
      throw Error( ErrorCode::Io, dir.string() + " contains no recordings" );
   std::sort( names.begin(), names.end() );
   std::vector<CompareInput> out;
   for( const auto& n : names )
      out.push_back( { n, io::read_annotation_csv( dir / ( n + suffix ) ),
                       io::load_probabilities( dir / ( n + ".csv" ), rate ) } );
   return out;
}

inline WindowSpec
window_from_flags( const CLI::Option* seconds_opt, double seconds,
                   const CLI::Option* samples_opt, std::size_t samples,
                   std::optional<double> rate )
{
   if( samples_opt->count() )
      return WindowSpec::from_samples( samples );
   if( !seconds_opt->count() )
      throw UsageError( "give --samples or --seconds" );
   if( !rate )
      throw UsageError( "--seconds needs a sample rate (--rate or sidecar rate_hz)" );
   return WindowSpec::from_seconds( seconds, *rate );
}

} // namespace detail

inline int
run_cli( const std::vector<std::string>& args, std::ostream& out = std::cout,
         std::ostream& err = std::cerr )
{
   using namespace detail;

   CLI::App app{ "Cyclic-constrained state decoding and optimal window selection",
                 "cycseg" };
   app.require_subcommand( 1 );
   std::function<void()> action;

   // decode ---------------------------------------------------------------
   ProbabilitySource decode_src;
   std::size_t decode_states = 0;
   double decode_rate = 0.0;
   std::string decode_method = "viterbi", decode_out;
   auto* decode = app.add_subcommand( "decode", "Decode the most likely state sequence" );
   add_probability_source( *decode, decode_src );
   decode->add_option( "--states", decode_states, "Number of states L" )->required();
   auto* decode_rate_opt = decode->add_option( "--rate", decode_rate, "Sample rate (Hz)" );
   decode->add_option( "--method", decode_method )
       ->check( CLI::IsMember( { "argmax", "viterbi" } ) );
   decode->add_option( "--out", decode_out, "State CSV to write" )->required();
   decode->callback( [&] {
      action = [&] {
         auto probs = load_source( decode_src, optional_rate( decode_rate_opt, decode_rate ) );
         CyclicTransitionModel model( decode_states );
         require_same_states( probs, model );
         auto result = decode_method == "argmax" ? argmax_decode( probs )
                                                 : viterbi_decode( probs, model );
         if( !is_valid_sequence( model, result.states ) )
            err << "warning: sequence violates transition model\n";
         io::write_states_csv( decode_out, result.states );
         out << "objective: " << format_number( result.objective ) << '\n';
      };
   } );

   // window ---------------------------------------------------------------
   ProbabilitySource window_src;
   std::size_t window_states = 0, window_samples = 0;
   double window_seconds = 0.0, window_rate = 0.0;
   unsigned window_workers = 1;
   std::string window_out, window_plot;
   auto* window = app.add_subcommand( "window", "Select and decode the best window" );
   add_probability_source( *window, window_src );
   window->add_option( "--states", window_states )->required();
   auto* window_seconds_opt = window->add_option( "--seconds", window_seconds );
   auto* window_rate_opt = window->add_option( "--rate", window_rate );
   auto* window_samples_opt = window->add_option( "--samples", window_samples );
   window_samples_opt->excludes( window_seconds_opt );
   window->add_option( "--workers", window_workers, "Threads for the per-start DP" );
   window->add_option( "--out", window_out, "Result JSON" )->required();
   window->add_option( "--emit-plot", window_plot, "SVG plot" );
   window->callback( [&] {
      action = [&] {
         auto probs = load_source( window_src, optional_rate( window_rate_opt, window_rate ) );
         auto spec = window_from_flags( window_seconds_opt, window_seconds,
                                        window_samples_opt, window_samples,
                                        probs.rate_hz() );
         CyclicTransitionModel model( window_states );
         require_same_states( probs, model );
         auto result = window_workers > 1
                           ? window_decode_per_start( probs, model, spec, window_workers )
                           : window_decode( probs, model, spec );
         io::write_json( window_out, { { "start", result.start },
                                       { "width", result.width },
                                       { "objective", result.objective },
                                       { "states", result.states } } );
         if( !window_plot.empty() )
            io::write_file( window_plot, io::window_svg( probs, result ) );
         out << "start: " << result.start << "\nwidth: " << result.width
             << "\nobjective: " << format_number( result.objective ) << '\n';
      };
   } );

   // eval -----------------------------------------------------------------
   std::string eval_gt, eval_est, eval_out;
   double eval_rate = 0.0, eval_tolerance = 60.0;
   std::vector<std::size_t> eval_window, eval_positive, eval_negative;
   auto* eval = app.add_subcommand( "eval", "Score an estimated sequence" );
   eval->add_option( "--gt", eval_gt, "Ground-truth state CSV" )->required();
   eval->add_option( "--est", eval_est, "Estimated state CSV" )->required();
   eval->add_option( "--rate", eval_rate )->required();
   eval->add_option( "--tolerance-ms", eval_tolerance );
   eval->add_option( "--window", eval_window, "start,len" )
       ->delimiter( ',' )
       ->expected( 2 );
   eval->add_option( "--positive", eval_positive )->delimiter( ',' )->required();
   eval->add_option( "--negative", eval_negative, "Defaults to all other states" )
       ->delimiter( ',' );
   eval->add_option( "--out", eval_out, "Report JSON" )->required();
   eval->callback( [&] {
      action = [&] {
         auto gt = io::read_states_csv( eval_gt );
         auto est = io::read_states_csv( eval_est );
         std::set<std::size_t> pos( eval_positive.begin(), eval_positive.end() );
         std::set<std::size_t> neg( eval_negative.begin(), eval_negative.end() );
         if( eval_negative.empty() )
         {
            std::size_t L = 0;
            for( auto s : gt )
               L = std::max( L, s + 1 );
            for( auto s : est )
               L = std::max( L, s + 1 );
            neg = complement( pos, L );
         }
         std::optional<SampleRange> range;
         if( !eval_window.empty() )
            range = SampleRange{ eval_window[0], eval_window[0] + eval_window[1] };
         auto r = evaluate( gt, est, pos, neg, eval_rate, eval_tolerance, range );
         nlohmann::json row = to_json( r );
         row["name"] = fs::path( eval_est ).stem().string();
         io::write_json( eval_out,
                         { { "recordings", nlohmann::json::array( { row } ) },
                           { "aggregate",
                             { { "accuracy", { { "mean", r.accuracy }, { "median", r.accuracy } } },
                               { "sensitivity",
                                 { { "mean", r.sensitivity }, { "median", r.sensitivity } } },
                               { "specificity",
                                 { { "mean", r.specificity }, { "median", r.specificity } } } } } } );
         out << "accuracy: " << r.accuracy << "\nsensitivity: " << r.sensitivity
             << "\nspecificity: " << r.specificity << "\nTP " << r.tp << " FP " << r.fp
             << " TN " << r.tn << " FN " << r.fn << '\n';
      };
   } );

   // compare --------------------------------------------------------------
   std::string compare_corpus, compare_out;
   double compare_seconds = 5.0, compare_rate = 0.0, compare_tolerance = 60.0;
   std::size_t compare_trials = 1;
   std::uint64_t compare_seed = 0;
   unsigned compare_workers = 1;
   std::vector<std::size_t> compare_positive{ 0, 2 };
   auto* compare = app.add_subcommand(
       "compare", "Argmax vs windowed decode vs argmax in optimal/random windows" );
   compare->add_option( "--corpus", compare_corpus )->required();
   compare->add_option( "--seconds", compare_seconds );
   auto* compare_rate_opt = compare->add_option( "--rate", compare_rate );
   compare->add_option( "--trials", compare_trials, "Random windows per recording" );
   compare->add_option( "--seed", compare_seed );
   compare->add_option( "--tolerance-ms", compare_tolerance );
   compare->add_option( "--positive", compare_positive )->delimiter( ',' );
   compare->add_option( "--workers", compare_workers );
   compare->add_option( "--out", compare_out, "Report JSON" )->required();
   compare->callback( [&] {
      action = [&] {
         auto inputs = read_corpus( compare_corpus, optional_rate( compare_rate_opt, compare_rate ) );
         auto rate = inputs.front().probabilities.rate_hz();
         if( !rate )
            throw UsageError( "no sample rate: pass --rate or add rate_hz sidecars" );
         CompareOptions opt;
         opt.rate_hz = *rate;
         opt.window = WindowSpec::from_seconds( compare_seconds, *rate );
         opt.tolerance_ms = compare_tolerance;
         opt.positive_states = { compare_positive.begin(), compare_positive.end() };
         opt.negative_states =
             complement( opt.positive_states, inputs.front().probabilities.states() );
         opt.trials = compare_trials;
         opt.seed = compare_seed;
         opt.workers = compare_workers;
         auto report = run_compare( inputs, opt );
         io::write_json( compare_out, cycseg::to_json( report ) );
         out << format_table( report );
      };
   } );

   // synth ----------------------------------------------------------------
   std::string synth_dir;
   CorpusSettings synth_settings;
   auto* synth = app.add_subcommand( "synth", "Write a seeded PCG-like corpus" );
   synth->add_option( "--out-dir", synth_dir )->required();
   synth->add_option( "--recordings", synth_settings.recordings );
   synth->add_option( "--seed", synth_settings.master_seed );
   synth->add_option( "--duration", synth_settings.duration_s, "Seconds per recording" );
   synth->add_option( "--burst-length", synth_settings.burst_length_s );
   synth->add_option( "--burst-uniformity", synth_settings.burst_uniformity );
   synth->add_option( "--temperature", synth_settings.temperature );
   synth->add_option( "--logit-noise", synth_settings.logit_noise );
   synth->add_option( "--burst-noise", synth_settings.burst_logit_noise );
   synth->add_option( "--noise-correlation", synth_settings.noise_correlation );
   synth->callback( [&] {
      action = [&] {
         fs::create_directories( synth_dir );
         for( std::size_t i = 0; i < synth_settings.recordings; ++i )
            write_recording( synth_dir,
                             generate_recording( corpus_config( synth_settings, i ),
                                                 corpus_recording_name( i ) ) );
         out << "wrote " << synth_settings.recordings << " recordings to " << synth_dir
             << '\n';
      };
   } );

   // export-lp ------------------------------------------------------------
   std::string lp_probs, lp_formulation = "sequence-linear", lp_cardinality = "samples",
                         lp_out;
   std::size_t lp_states = 0, lp_samples = 0;
   double lp_seconds = 0.0, lp_rate = 0.0;
   auto* lp = app.add_subcommand( "export-lp", "Write a CPLEX LP model" );
   lp->add_option( "--probs", lp_probs )->required();
   lp->add_option( "--states", lp_states )->required();
   lp->add_option( "--formulation", lp_formulation )
       ->check( CLI::IsMember( { "sequence-linear", "window-path" } ) );
   auto* lp_samples_opt = lp->add_option( "--samples", lp_samples );
   auto* lp_seconds_opt = lp->add_option( "--seconds", lp_seconds );
   auto* lp_rate_opt = lp->add_option( "--rate", lp_rate );
   lp_samples_opt->excludes( lp_seconds_opt );
   lp->add_option( "--cardinality", lp_cardinality, "Window-size row convention" )
       ->check( CLI::IsMember( { "samples", "literal" } ) );
   lp->add_option( "--out", lp_out )->required();
   lp->callback( [&] {
      action = [&] {
         auto probs = io::load_probabilities( lp_probs, optional_rate( lp_rate_opt, lp_rate ) );
         CyclicTransitionModel model( lp_states );
         require_same_states( probs, model );
         std::string text;
         if( lp_formulation == "sequence-linear" )
            text = export_sequence_linear( probs, model );
         else
         {
            auto spec = window_from_flags( lp_seconds_opt, lp_seconds, lp_samples_opt,
                                           lp_samples, probs.rate_hz() );
            text = export_window_path( probs, model, spec,
                                       lp_cardinality == "literal"
                                           ? CardinalityConvention::LiteralArcCount
                                           : CardinalityConvention::SampleCount );
         }
         write_text_file( lp_out, text );
      };
   } );

   // infer ----------------------------------------------------------------
   ProbabilitySource infer_src;
   double infer_rate = 0.0;
   std::string infer_out;
   auto* infer = app.add_subcommand( "infer", "Run the bidirectional LSTM on features" );
   infer->add_option( "--weights", infer_src.weights )->required();
   infer->add_option( "--features", infer_src.features )->required();
   infer->add_option( "--gate-mode", infer_src.gate_mode )
       ->check( CLI::IsMember( { "tanh-gates", "standard" } ) );
   auto* infer_rate_opt = infer->add_option( "--rate", infer_rate );
   infer->add_option( "--out", infer_out, "Probability matrix CSV" )->required();
   infer->callback( [&] {
      action = [&] {
         auto probs = load_source( infer_src, optional_rate( infer_rate_opt, infer_rate ) );
         io::write_matrix_csv( infer_out, probs.values() );
         io::MatrixMetadata meta;
         meta.rate_hz = probs.rate_hz();
         io::write_sidecar( infer_out, meta );
      };
   } );

   // random-weights -------------------------------------------------------
   std::size_t rw_features = 0, rw_memory = 0, rw_states = 0;
   std::uint64_t rw_seed = 0;
   double rw_range = 0.05;
   std::string rw_out;
   auto* rw = app.add_subcommand( "random-weights", "Write a seeded random weight file" );
   rw->add_option( "--features", rw_features )->required();
   rw->add_option( "--memory", rw_memory )->required();
   rw->add_option( "--states", rw_states )->required();
   rw->add_option( "--seed", rw_seed );
   rw->add_option( "--range", rw_range );
   rw->add_option( "--out", rw_out )->required();
   rw->callback( [&] {
      action = [&] {
         io::write_json( rw_out, cycseg::to_json( random_lstm_weights(
                                     rw_features, rw_memory, rw_states, rw_seed, rw_range ) ) );
      };
   } );

   std::vector<std::string> reversed( args.rbegin(), args.rend() );
   try
   {
      app.parse( reversed );
   }
   catch( const CLI::CallForHelp& )
   {
      out << app.help();
      return kExitOk;
   }
   catch( const CLI::ParseError& e )
   {
      err << "error: " << e.what() << '\n' << app.help();
      return kExitUsage;
   }

   try
   {
      action();
   }
   catch( const UsageError& e )
   {
      err << "error: " << e.what() << '\n' << app.help();
      return kExitUsage;
   }
   catch( const Error& e )
   {
      err << "error: " << e.what() << '\n';
      const bool io = e.code() == ErrorCode::Io || e.code() == ErrorCode::Parse ||
                      e.code() == ErrorCode::WriteFailure;
      return io ? kExitUsage : kExitValidation;
   }
   catch( const std::filesystem::filesystem_error& e )
   {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
   }
   return kExitOk;
}

} // namespace cycseg::cli
