#pragma once

#include "cycseg/core.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

namespace cycseg {

struct Event
{
   std::size_t state = 0;
   std::size_t start = 0;
   std::size_t end = 0; // inclusive
   double center = 0.0;

   friend bool
   operator==( const Event&, const Event& ) = default;
};

using EventSet = std::vector<Event>;

/// Maximal runs of one state, ordered by start. With `restrict`, only runs
/// whose center lies inside the window are kept; runs are not clipped.
inline EventSet
extract_events( std::span<const std::size_t> states,
                std::optional<SampleRange> restrict = std::nullopt )
{
   EventSet events;
   std::size_t t = 0;
   while( t < states.size() )
   {
      std::size_t end = t;
      while( end + 1 < states.size() && states[end + 1] == states[t] )
         ++end;
      Event e{ states[t], t, end, ( static_cast<double>( t ) + end ) / 2.0 };
      if( !restrict || restrict->contains( e.center ) )
         events.push_back( e );
      t = end + 1;
   }
   return events;
}

struct MetricsReport
{
   double accuracy = 0.0;
   double sensitivity = 1.0;
   double specificity = 1.0;
   std::int64_t tp = 0;
   std::int64_t fp = 0;
   std::int64_t tn = 0;
   std::int64_t fn = 0;
   // Unmatched negative ground-truth events; counted in no bucket.
   std::int64_t unmatched_negative = 0;
   bool sensitivity_undefined = false;
   bool specificity_undefined = false;
   std::optional<SampleRange> evaluated_range;
};

namespace detail {

struct MatchCount
{
   std::int64_t matched = 0;
   std::int64_t unmatched_gt = 0;
   std::int64_t unmatched_est = 0;
};

// One-to-one greedy matching of same-state events, nearest centers first.
// Equal distances resolve by ground-truth then estimate order.
inline MatchCount
match_events( const EventSet& gt, const EventSet& est, std::size_t state,
              double tolerance_samples )
{
   std::vector<std::size_t> g, e;
   for( std::size_t i = 0; i < gt.size(); ++i )
      if( gt[i].state == state )
         g.push_back( i );
   for( std::size_t j = 0; j < est.size(); ++j )
      if( est[j].state == state )
         e.push_back( j );

   std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
   for( std::size_t a = 0; a < g.size(); ++a )
      for( std::size_t b = 0; b < e.size(); ++b )
      {
         double d = std::abs( gt[g[a]].center - est[e[b]].center );
         if( d < tolerance_samples )
            pairs.emplace_back( d, a, b );
      }
   std::sort( pairs.begin(), pairs.end() );

   std::vector<bool> used_g( g.size() ), used_e( e.size() );
   MatchCount out;
   for( const auto& [d, a, b] : pairs )
   {
      if( used_g[a] || used_e[b] )
         continue;
      used_g[a] = used_e[b] = true;
      ++out.matched;
   }
   out.unmatched_gt = static_cast<std::int64_t>( g.size() ) - out.matched;
   out.unmatched_est = static_cast<std::int64_t>( e.size() ) - out.matched;
   return out;
}

} // namespace detail

/// Sample accuracy plus event-level Sens/Spec. Events match when their
/// centers are strictly closer than tolerance_ms.
inline MetricsReport
evaluate( std::span<const std::size_t> gt, std::span<const std::size_t> est,
          const std::set<std::size_t>& positive_states,
          const std::set<std::size_t>& negative_states, double rate_hz,
          double tolerance_ms = 60.0,
          std::optional<SampleRange> restrict = std::nullopt )
{
   if( gt.size() != est.size() )
   {
      std::ostringstream msg;
      msg << "ground truth has " << gt.size() << " samples, estimate has "
          << est.size();
      throw Error( ErrorCode::LengthMismatch, msg.str() );
   }
   if( !( rate_hz > 0.0 ) || !std::isfinite( rate_hz ) )
      throw Error( ErrorCode::InvalidConfig, "rate_hz must be positive" );
   if( !( tolerance_ms >= 0.0 ) )
      throw Error( ErrorCode::InvalidConfig, "tolerance_ms must be non-negative" );

   SampleRange range = restrict.value_or( SampleRange{ 0, gt.size() } );
   if( range.size() == 0 || range.end > gt.size() )
      throw Error( ErrorCode::EmptyEvaluationRange,
                   "evaluation range is empty or exceeds the sequence" );

   MetricsReport r;
   r.evaluated_range = restrict;

   std::size_t hits = 0;
   for( std::size_t t = range.begin; t < range.end; ++t )
      hits += gt[t] == est[t];
   r.accuracy = static_cast<double>( hits ) / static_cast<double>( range.size() );

   const double tol = tolerance_ms * rate_hz / 1000.0;
   auto ge = extract_events( gt, restrict );
   auto ee = extract_events( est, restrict );
   for( std::size_t s : positive_states )
   {
      auto m = detail::match_events( ge, ee, s, tol );
      r.tp += m.matched;
      r.fn += m.unmatched_gt;
      r.fp += m.unmatched_est;
   }
   for( std::size_t s : negative_states )
   {
      auto m = detail::match_events( ge, ee, s, tol );
      r.tn += m.matched;
      r.unmatched_negative += m.unmatched_gt;
   }

   if( r.tp + r.fn > 0 )
      r.sensitivity = static_cast<double>( r.tp ) / static_cast<double>( r.tp + r.fn );
   else
      r.sensitivity_undefined = true;
   if( r.tn + r.fp > 0 )
      r.specificity = static_cast<double>( r.tn ) / static_cast<double>( r.tn + r.fp );
   else
      r.specificity_undefined = true;
   return r;
}

} // namespace cycseg
