#pragma once

// Baseline vs constrained-window comparison over a set of recordings.

#include "cycseg/decode.hpp"
#include "cycseg/metrics.hpp"
#include "cycseg/window.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cycseg {

enum class CompareMethod {
   ArgmaxFull,
   WindowDecode,
   WindowArgmax,
   RandomWindowArgmax,
};

inline constexpr std::array<CompareMethod, 4> kCompareMethods{
    CompareMethod::ArgmaxFull, CompareMethod::WindowDecode,
    CompareMethod::WindowArgmax, CompareMethod::RandomWindowArgmax };

inline const char*
to_string( CompareMethod m )
{
   switch( m )
   {
   case CompareMethod::ArgmaxFull: return "argmax_full";
   case CompareMethod::WindowDecode: return "window_decode";
   case CompareMethod::WindowArgmax: return "window_argmax";
   case CompareMethod::RandomWindowArgmax: return "random_window_argmax";
   }
   return "unknown";
}

struct CompareInput
{
   std::string name;
   StateSequence ground_truth;
   ProbabilityMatrix probabilities;
};

struct CompareOptions
{
   WindowSpec window = WindowSpec::from_samples( 250 );
   double rate_hz = 50.0;
   double tolerance_ms = 60.0;
   std::set<std::size_t> positive_states{ 0, 2 };
   std::set<std::size_t> negative_states{ 1, 3 };
   std::size_t trials = 1; // random windows per recording
   std::uint64_t seed = 0;
   unsigned workers = 1;
};

struct MethodScore
{
   double accuracy = 0.0;
   double sensitivity = 0.0;
   double specificity = 0.0;
   std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct RecordingRow
{
   std::string name;
   std::size_t window_start = 0;
   std::array<MethodScore, kCompareMethods.size()> scores{};
};

struct Aggregate
{
   double mean = 0.0;
   double median = 0.0;
};

struct MethodAggregate
{
   Aggregate accuracy, sensitivity, specificity;
};

struct RunReport
{
   std::vector<RecordingRow> rows;
   std::array<MethodAggregate, kCompareMethods.size()> aggregates{};
   std::size_t window_width = 0;

   const MethodAggregate&
   aggregate( CompareMethod m ) const
   {
      return aggregates[static_cast<std::size_t>( m )];
   }
};

namespace detail {

inline MethodScore
score_of( const MetricsReport& r )
{
   return { r.accuracy, r.sensitivity, r.specificity, r.tp, r.fp, r.tn, r.fn };
}

// Both sequences cut to the window and scored as a standalone recording.
inline MethodScore
score_window( const StateSequence& gt, const StateSequence& est_window,
              std::size_t start, const CompareOptions& opt )
{
   std::span<const std::size_t> g( gt.data() + start, est_window.size() );
   return score_of( evaluate( g, est_window, opt.positive_states,
                              opt.negative_states, opt.rate_hz, opt.tolerance_ms ) );
}

inline StateSequence
argmax_slice( const ProbabilityMatrix& probs, std::size_t start, std::size_t width )
{
   return argmax_decode( probs.slice( start, start + width ) ).states;
}

inline RecordingRow
compare_one( const CompareInput& in, std::size_t index, const CompareOptions& opt )
{
   if( in.ground_truth.size() != in.probabilities.samples() )
      throw Error( ErrorCode::LengthMismatch,
                   in.name + ": ground truth has " +
                       std::to_string( in.ground_truth.size() ) +
                       " samples, probabilities have " +
                       std::to_string( in.probabilities.samples() ) );
   const std::size_t T = in.probabilities.samples();
   const std::size_t W = opt.window.resolve( T );
   CyclicTransitionModel model( in.probabilities.states() );
   RecordingRow row;
   row.name = in.name;

   auto& s = row.scores;
   const auto& gt = in.ground_truth;
   s[0] = score_of( evaluate( gt, argmax_decode( in.probabilities ).states,
                              opt.positive_states, opt.negative_states,
                              opt.rate_hz, opt.tolerance_ms ) );

   auto win = window_decode( in.probabilities, model, opt.window );
   row.window_start = win.start;
   s[1] = score_window( gt, win.states, win.start, opt );
   s[2] = score_window( gt, argmax_slice( in.probabilities, win.start, W ),
                        win.start, opt );

   std::seed_seq seq{ static_cast<std::uint32_t>( opt.seed ),
                      static_cast<std::uint32_t>( opt.seed >> 32 ),
                      static_cast<std::uint32_t>( index ) };
   std::mt19937_64 rng( seq );
   std::uniform_int_distribution<std::size_t> pick( 0, T - W );
   MethodScore& r = s[3];
   const std::size_t K = std::max<std::size_t>( opt.trials, 1 );
   for( std::size_t k = 0; k < K; ++k )
   {
      std::size_t start = pick( rng );
      auto m = score_window( gt, argmax_slice( in.probabilities, start, W ), start, opt );
      r.accuracy += m.accuracy / static_cast<double>( K );
      r.sensitivity += m.sensitivity / static_cast<double>( K );
      r.specificity += m.specificity / static_cast<double>( K );
      r.tp += m.tp;
      r.fp += m.fp;
      r.tn += m.tn;
      r.fn += m.fn;
   }
   return row;
}

inline Aggregate
aggregate_of( std::vector<double> v )
{
   Aggregate a;
   if( v.empty() )
      return a;
   double sum = 0.0;
   for( double x : v )
      sum += x;
   a.mean = sum / static_cast<double>( v.size() );
   std::sort( v.begin(), v.end() );
   std::size_t n = v.size();
   a.median = n % 2 ? v[n / 2] : ( v[n / 2 - 1] + v[n / 2] ) / 2.0;
   return a;
}

} // namespace detail

/// Runs every method on every recording. Rows are ordered by name whatever
/// the worker count.
inline RunReport
run_compare( const std::vector<CompareInput>& inputs, const CompareOptions& opt )
{
   RunReport report;
   report.window_width = opt.window.width();
   report.rows.resize( inputs.size() );
   const unsigned workers =
       std::max( 1u, std::min<unsigned>( opt.workers,
                                          static_cast<unsigned>( inputs.size() ) ) );
   std::vector<std::exception_ptr> errors( workers );
   {
      std::vector<std::jthread> pool;
      for( unsigned w = 0; w < workers; ++w )
         pool.emplace_back( [&, w] {
            try
            {
               for( std::size_t i = w; i < inputs.size(); i += workers )
                  report.rows[i] = detail::compare_one( inputs[i], i, opt );
            }
            catch( ... )
            {
               errors[w] = std::current_exception();
            }
         } );
   }
   for( auto& e : errors )
      if( e )
         std::rethrow_exception( e );

   std::sort( report.rows.begin(), report.rows.end(),
              []( const auto& a, const auto& b ) { return a.name < b.name; } );
   for( std::size_t m = 0; m < kCompareMethods.size(); ++m )
   {
      std::vector<double> a, se, sp;
      for( const auto& row : report.rows )
      {
         a.push_back( row.scores[m].accuracy );
         se.push_back( row.scores[m].sensitivity );
         sp.push_back( row.scores[m].specificity );
      }
      report.aggregates[m] = { detail::aggregate_of( a ), detail::aggregate_of( se ),
                               detail::aggregate_of( sp ) };
   }
   return report;
}

inline nlohmann::json
to_json( const MethodScore& s )
{
   return { { "accuracy", s.accuracy },     { "sensitivity", s.sensitivity },
            { "specificity", s.specificity }, { "tp", s.tp },
            { "fp", s.fp },                 { "tn", s.tn },
            { "fn", s.fn } };
}

inline nlohmann::json
to_json( const RunReport& r )
{
   nlohmann::json j;
   j["window_width"] = r.window_width;
   j["recordings"] = nlohmann::json::array();
   for( const auto& row : r.rows )
   {
      nlohmann::json jr{ { "name", row.name }, { "window_start", row.window_start } };
      for( auto m : kCompareMethods )
         jr[to_string( m )] = to_json( row.scores[static_cast<std::size_t>( m )] );
      j["recordings"].push_back( std::move( jr ) );
   }
   for( auto m : kCompareMethods )
   {
      const auto& a = r.aggregate( m );
      auto pair = []( const Aggregate& x ) {
         return nlohmann::json{ { "mean", x.mean }, { "median", x.median } };
      };
      j["aggregate"][to_string( m )] = { { "accuracy", pair( a.accuracy ) },
                                         { "sensitivity", pair( a.sensitivity ) },
                                         { "specificity", pair( a.specificity ) } };
   }
   return j;
}

inline std::string
format_table( const RunReport& r )
{
   std::ostringstream out;
   out << std::left << std::setw( 22 ) << "method" << std::right;
   for( const char* h : { "A mean", "A med", "Sens mean", "Sens med", "Spec mean",
                          "Spec med" } )
      out << std::setw( 11 ) << h;
   out << '\n' << std::fixed << std::setprecision( 4 );
   for( auto m : kCompareMethods )
   {
      const auto& a = r.aggregate( m );
      out << std::left << std::setw( 22 ) << to_string( m ) << std::right;
      for( const auto* x : { &a.accuracy, &a.sensitivity, &a.specificity } )
         out << std::setw( 11 ) << x->mean << std::setw( 11 ) << x->median;
      out << '\n';
   }
   return out.str();
}

} // namespace cycseg
