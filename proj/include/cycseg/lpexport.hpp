#pragma once

// Integer-programming views of the decoding problems, written as CPLEX LP
// text so any external MILP solver can cross-check the dynamic programs.
//
// Formulations, by role:
//   SequenceQuadratic    full-sequence decode with quadratic transition rows
//   SequenceLinear       the same with every allowed product a*a' replaced by
//                        a continuous z and three linking rows
//   WindowQuadratic      best-window decode with b_t "unassigned" flags
//   WindowLinear         its linearization
//   WindowPath           constrained path through the layered graph extended
//                        with before-window (b) and after-window (b') chains
// Only SequenceLinear and WindowPath are emitted as files; the other three
// are covered by size accounting.

#include "cycseg/core.hpp"
#include "cycseg/window.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace cycseg {

enum class Formulation {
   SequenceQuadratic,
   SequenceLinear,
   WindowQuadratic,
   WindowLinear,
   WindowPath,
};

inline const char*
to_string( Formulation f )
{
   switch( f )
   {
   case Formulation::SequenceQuadratic: return "sequence-quadratic";
   case Formulation::SequenceLinear: return "sequence-linear";
   case Formulation::WindowQuadratic: return "window-quadratic";
   case Formulation::WindowLinear: return "window-linear";
   case Formulation::WindowPath: return "window-path";
   }
   return "unknown";
}

struct FormulationSizes
{
   std::int64_t variables = 0;
   std::int64_t binary_variables = 0;
   std::int64_t constraints = 0;
   Formulation formulation = Formulation::SequenceQuadratic;

   friend bool
   operator==( const FormulationSizes&, const FormulationSizes& ) = default;
};

/// Closed-form model sizes for a T-sample, L-state instance.
inline FormulationSizes
formulation_sizes( std::int64_t T, std::int64_t L, Formulation f )
{
   if( T < 1 || L < 2 )
      throw Error( ErrorCode::InvalidConfig, "need T >= 1 and L >= 2" );
   switch( f )
   {
   case Formulation::SequenceQuadratic:
      return { T * L, T * L, 2 * T - 1, f };
   case Formulation::SequenceLinear:
      return { T * L + 2 * L * ( T - 1 ), T * L,
               2 * T - 1 + 6 * L * ( T - 1 ), f };
   case Formulation::WindowQuadratic:
      return { T * L + T, T * L + T, 2 * T + 1, f };
   case Formulation::WindowLinear:
      return { T * L + T + ( T - 1 ) * ( 2 + 2 * L ) + 1, T * L + T,
               2 * T + 1 + 3 * ( 2 * T - 1 ) + 6 * L * ( T - 1 ), f };
   case Formulation::WindowPath:
      return { 4 * T * L + 2 * ( L + T - 1 ), 4 * T * L + 2 * ( L + T - 1 ),
               2 * ( T - 1 ) + L * T + 3, f };
   }
   return {};
}

/// Arcs actually present in the extended window graph: 2LT grid arcs plus
/// 2 + 2L(T-1) + 2(T-2) chain arcs. This is 4L below the WindowPath variable
/// count from formulation_sizes().
inline std::int64_t
window_path_arc_count( std::int64_t T, std::int64_t L )
{
   return 4 * T * L + 2 * ( T - L - 1 );
}

// ---------------------------------------------------------------------------
// Minimal LP model and writer

enum class Relation { LessEqual, GreaterEqual, Equal };

struct LinearTerm
{
   double coefficient;
   std::string variable;
};

struct LinearConstraint
{
   std::string name;
   std::vector<LinearTerm> terms;
   Relation relation;
   double rhs;
};

struct VariableBound
{
   std::string variable;
   double lower;
   double upper;
};

struct LpModel
{
   bool maximize = true;
   std::vector<std::string> comments;
   std::vector<LinearTerm> objective;
   std::vector<LinearConstraint> constraints;
   std::vector<VariableBound> bounds;
   std::vector<std::string> binaries;
};

/// 12 significant digits.
inline std::string
format_number( double v )
{
   char buf[32];
   std::snprintf( buf, sizeof buf, "%.12g", v );
   return buf;
}

namespace detail {

class LpLineWriter
{
 public:
   explicit LpLineWriter( std::string& out ) : out_( out ) {}

   void
   begin( const std::string& head )
   {
      out_ += head;
      width_ = head.size();
   }

   void
   token( const std::string& text )
   {
      if( width_ + text.size() + 1 > kMaxWidth )
      {
         out_ += "\n   ";
         width_ = 3;
      }
      out_ += ' ';
      out_ += text;
      width_ += text.size() + 1;
   }

   void
   terms( const std::vector<LinearTerm>& terms )
   {
      bool first = true;
      for( const auto& t : terms )
      {
         if( t.coefficient == 0.0 )
            continue;
         double mag = std::abs( t.coefficient );
         std::string text = t.coefficient < 0 ? "- " : ( first ? "" : "+ " );
         if( mag != 1.0 )
            text += format_number( mag ) + " ";
         text += t.variable;
         token( text );
         first = false;
      }
      if( first )
         token( "0 " + ( terms.empty() ? std::string( "x_unused" )
                                       : terms.front().variable ) );
   }

   void
   end_line()
   {
      out_ += '\n';
   }

 private:
   static constexpr std::size_t kMaxWidth = 240;
   std::string& out_;
   std::size_t width_ = 0;
};

} // namespace detail

inline std::string
to_lp_string( const LpModel& model )
{
   std::string out;
   for( const auto& c : model.comments )
      out += "\\ " + c + "\n";
   out += model.maximize ? "Maximize\n" : "Minimize\n";
   detail::LpLineWriter w( out );
   w.begin( " obj:" );
   w.terms( model.objective );
   w.end_line();

   out += "Subject To\n";
   for( const auto& c : model.constraints )
   {
      w.begin( " " + c.name + ":" );
      w.terms( c.terms );
      const char* rel = c.relation == Relation::LessEqual      ? "<="
                        : c.relation == Relation::GreaterEqual ? ">="
                                                               : "=";
      w.token( std::string( rel ) + " " + format_number( c.rhs ) );
      w.end_line();
   }

   if( !model.bounds.empty() )
   {
      out += "Bounds\n";
      for( const auto& b : model.bounds )
         out += " " + format_number( b.lower ) + " <= " + b.variable +
                " <= " + format_number( b.upper ) + "\n";
   }
   if( !model.binaries.empty() )
   {
      out += "Binary\n";
      w.begin( "" );
      for( const auto& b : model.binaries )
         w.token( b );
      w.end_line();
   }
   out += "End\n";
   return out;
}

inline void
write_text_file( const std::string& path, const std::string& text )
{
   std::ofstream f( path, std::ios::binary );
   if( f )
      f << text;
   if( !f )
      throw Error( ErrorCode::WriteFailure, "cannot write " + path );
}

// ---------------------------------------------------------------------------
// Full-sequence linearized model

inline std::string
assignment_var( std::size_t t, std::size_t s )
{
   return "a_" + std::to_string( t ) + "_" + std::to_string( s );
}

/// Product of a_{t-1,s} and a_{t,s'}.
inline std::string
product_var( std::size_t t, std::size_t s, std::size_t s_next )
{
   return "z_" + std::to_string( t ) + "_" + std::to_string( s ) + "_" +
          std::to_string( s_next );
}

inline LpModel
sequence_linear_model( const ProbabilityMatrix& probs,
                       const CyclicTransitionModel& model )
{
   require_same_states( probs, model );
   const std::size_t T = probs.samples();
   const std::size_t L = model.states();
   auto sizes = formulation_sizes( static_cast<std::int64_t>( T ),
                                   static_cast<std::int64_t>( L ),
                                   Formulation::SequenceLinear );

   LpModel lp;
   lp.maximize = true;
   lp.comments = {
       "cycseg LP export",
       "formulation: sequence-linear",
       "samples: " + std::to_string( T ) + " states: " + std::to_string( L ),
       "variables: " + std::to_string( sizes.variables ),
       "binary variables: " + std::to_string( sizes.binary_variables ),
       "constraints: " + std::to_string( sizes.constraints ),
   };

   for( std::size_t t = 0; t < T; ++t )
      for( std::size_t s = 0; s < L; ++s )
         lp.objective.push_back( { probs( t, s ), assignment_var( t, s ) } );

   for( std::size_t t = 0; t < T; ++t )
   {
      LinearConstraint one{ "assign_" + std::to_string( t ), {},
                            Relation::Equal, 1.0 };
      for( std::size_t s = 0; s < L; ++s )
         one.terms.push_back( { 1.0, assignment_var( t, s ) } );
      lp.constraints.push_back( std::move( one ) );
   }

   for( std::size_t t = 1; t < T; ++t )
   {
      LinearConstraint step{ "transition_" + std::to_string( t ), {},
                             Relation::Equal, 1.0 };
      std::vector<LinearConstraint> links;
      for( std::size_t s = 0; s < L; ++s )
         for( std::size_t s_next : { s, model.next( s ) } )
         {
            std::string z = product_var( t, s, s_next );
            std::string from = assignment_var( t - 1, s );
            std::string to = assignment_var( t, s_next );
            std::string tag = z.substr( 2 );
            step.terms.push_back( { 1.0, z } );
            links.push_back( { "zfrom_" + tag, { { 1.0, z }, { -1.0, from } },
                               Relation::LessEqual, 0.0 } );
            links.push_back( { "zto_" + tag, { { 1.0, z }, { -1.0, to } },
                               Relation::LessEqual, 0.0 } );
            links.push_back(
                { "zboth_" + tag, { { 1.0, z }, { -1.0, from }, { -1.0, to } },
                  Relation::GreaterEqual, -1.0 } );
            lp.bounds.push_back( { z, 0.0, 1.0 } );
         }
      lp.constraints.push_back( std::move( step ) );
      for( auto& c : links )
         lp.constraints.push_back( std::move( c ) );
   }

   for( std::size_t t = 0; t < T; ++t )
      for( std::size_t s = 0; s < L; ++s )
         lp.binaries.push_back( assignment_var( t, s ) );
   return lp;
}

inline std::string
export_sequence_linear( const ProbabilityMatrix& probs,
                        const CyclicTransitionModel& model )
{
   return to_lp_string( sequence_linear_model( probs, model ) );
}

// ---------------------------------------------------------------------------
// Constrained window path

/// How the window-width row is written.
///  SampleCount: every arc entering a grid vertex v_ts carries p_ts (entry
///    arcs from the b chain included) and those arcs sum to W. The optimum
///    is exactly the best-window likelihood for every window position.
///  LiteralArcCount: chain arcs carry 0 and the original grid arcs sum to W.
///    An interior window then loses its first sample's probability and
///    covers W + 1 samples; kept for reproducing the printed model.
enum class CardinalityConvention { SampleCount, LiteralArcCount };

struct PathArc
{
   std::size_t from;
   std::size_t to;
   double distance;
   bool grid;         // original layered-graph arc
   bool enters_grid;  // head is some v_ts
};

/// Vertex and arc lists of the extended window graph. Chain vertices b_t
/// (t = 0..T-2, "window not started, next sample may open it") and b'_t
/// (t = 1..T-1, "window closed before t").
struct WindowPathGraph
{
   std::vector<std::string> vertices;
   std::vector<PathArc> arcs;
   std::size_t origin = 0;
   std::size_t destination = 0;

   std::string
   arc_var( const PathArc& a ) const
   {
      return "y_" + vertices[a.from] + "__" + vertices[a.to];
   }
};

inline WindowPathGraph
build_window_path_graph( const ProbabilityMatrix& probs,
                         const CyclicTransitionModel& model,
                         CardinalityConvention convention )
{
   require_same_states( probs, model );
   const std::size_t T = probs.samples();
   const std::size_t L = model.states();
   WindowPathGraph g;
   auto add_vertex = [&]( std::string name ) {
      g.vertices.push_back( std::move( name ) );
      return g.vertices.size() - 1;
   };
   g.origin = add_vertex( "o" );
   std::vector<std::size_t> grid( T * L );
   for( std::size_t t = 0; t < T; ++t )
      for( std::size_t s = 0; s < L; ++s )
         grid[t * L + s] =
             add_vertex( "v_" + std::to_string( t ) + "_" + std::to_string( s ) );
   std::vector<std::size_t> before, after( T, 0 );
   for( std::size_t t = 0; t + 1 < T; ++t )
      before.push_back( add_vertex( "b_" + std::to_string( t ) ) );
   for( std::size_t t = 1; t < T; ++t )
      after[t] = add_vertex( "bp_" + std::to_string( t ) );
   g.destination = add_vertex( "d" );

   auto v = [&]( std::size_t t, std::size_t s ) { return grid[t * L + s]; };
   const bool literal = convention == CardinalityConvention::LiteralArcCount;

   for( std::size_t s = 0; s < L; ++s )
      g.arcs.push_back( { g.origin, v( 0, s ), probs( 0, s ), true, true } );
   for( std::size_t t = 0; t + 1 < T; ++t )
      for( std::size_t s = 0; s < L; ++s )
         for( std::size_t n : { s, model.next( s ) } )
            g.arcs.push_back(
                { v( t, s ), v( t + 1, n ), probs( t + 1, n ), true, true } );
   for( std::size_t s = 0; s < L; ++s )
      g.arcs.push_back( { v( T - 1, s ), g.destination, 0.0, true, false } );

   if( T >= 2 )
   {
      g.arcs.push_back( { g.origin, before[0], 0.0, false, false } );
      for( std::size_t t = 0; t + 1 < T; ++t )
      {
         if( t + 2 < T )
            g.arcs.push_back( { before[t], before[t + 1], 0.0, false, false } );
         for( std::size_t s = 0; s < L; ++s )
            g.arcs.push_back( { before[t], v( t + 1, s ),
                                literal ? 0.0 : probs( t + 1, s ), false,
                                true } );
      }
      for( std::size_t t = 0; t + 1 < T; ++t )
         for( std::size_t s = 0; s < L; ++s )
            g.arcs.push_back(
                { v( t, s ), after[t + 1], 0.0, false, false } );
      for( std::size_t t = 1; t + 1 < T; ++t )
         g.arcs.push_back( { after[t], after[t + 1], 0.0, false, false } );
      g.arcs.push_back( { after[T - 1], g.destination, 0.0, false, false } );
   }
   return g;
}

inline LpModel
window_path_model( const ProbabilityMatrix& probs,
                   const CyclicTransitionModel& model, const WindowSpec& spec,
                   CardinalityConvention convention =
                       CardinalityConvention::SampleCount )
{
   const std::size_t W = spec.resolve( probs.samples() );
   const std::size_t T = probs.samples();
   const std::size_t L = model.states();
   WindowPathGraph g = build_window_path_graph( probs, model, convention );
   const bool literal = convention == CardinalityConvention::LiteralArcCount;

   auto table = formulation_sizes( static_cast<std::int64_t>( T ),
                                   static_cast<std::int64_t>( L ),
                                   Formulation::WindowPath );
   LpModel lp;
   lp.maximize = false;
   lp.comments = {
       "cycseg LP export",
       "formulation: window-path",
       "samples: " + std::to_string( T ) + " states: " + std::to_string( L ) +
           " window: " + std::to_string( W ),
       literal ? "cardinality: literal-arcs (grid arcs sum to W; chain arcs "
                 "carry 0)"
               : "cardinality: samples (arcs entering grid vertices sum to W; "
                 "each carries p of its head)",
       "variables: " + std::to_string( g.arcs.size() ) +
           " (closed form: " + std::to_string( table.variables ) + ")",
       "binary variables: " + std::to_string( g.arcs.size() ) +
           " (closed form: " + std::to_string( table.binary_variables ) + ")",
       "constraints: " + std::to_string( table.constraints ),
   };

   std::vector<std::vector<LinearTerm>> inflow( g.vertices.size() ),
       outflow( g.vertices.size() );
   LinearConstraint width{ "cardinality", {}, Relation::Equal,
                           static_cast<double>( W ) };
   for( const auto& a : g.arcs )
   {
      std::string y = g.arc_var( a );
      if( a.distance != 0.0 )
         lp.objective.push_back( { -a.distance, y } );
      inflow[a.to].push_back( { 1.0, y } );
      outflow[a.from].push_back( { 1.0, y } );
      if( literal ? a.grid : a.enters_grid )
         width.terms.push_back( { 1.0, y } );
      lp.binaries.push_back( y );
   }
   if( lp.objective.empty() )
      lp.objective.push_back( { 0.0, g.arc_var( g.arcs.front() ) } );

   lp.constraints.push_back(
       { "source", outflow[g.origin], Relation::Equal, 1.0 } );
   lp.constraints.push_back(
       { "sink", inflow[g.destination], Relation::Equal, 1.0 } );
   for( std::size_t u = 0; u < g.vertices.size(); ++u )
   {
      if( u == g.origin || u == g.destination )
         continue;
      LinearConstraint flow{ "flow_" + g.vertices[u], inflow[u],
                             Relation::Equal, 0.0 };
      for( const auto& t : outflow[u] )
         flow.terms.push_back( { -1.0, t.variable } );
      lp.constraints.push_back( std::move( flow ) );
   }
   lp.constraints.push_back( std::move( width ) );
   return lp;
}

inline std::string
export_window_path( const ProbabilityMatrix& probs,
                    const CyclicTransitionModel& model, const WindowSpec& spec,
                    CardinalityConvention convention =
                        CardinalityConvention::SampleCount )
{
   return to_lp_string( window_path_model( probs, model, spec, convention ) );
}

} // namespace cycseg
