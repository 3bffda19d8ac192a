#pragma once

// File formats: headerless matrix CSV with a same-basename JSON sidecar,
// one-state-per-line CSV, run-length annotation CSV and a small SVG plot.

#include "cycseg/core.hpp"
#include "cycseg/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cycseg::io {

namespace fs = std::filesystem;

inline std::string
read_text_file( const fs::path& path )
{
   std::ifstream in( path, std::ios::binary );
   if( !in )
      throw Error( ErrorCode::Io, "cannot open " + path.string() );
   std::ostringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

inline void
write_file( const fs::path& path, const std::string& text )
{
   std::ofstream out( path, std::ios::binary );
   out << text;
   out.flush();
   if( !out )
      throw Error( ErrorCode::Io, "cannot write " + path.string() );
}

namespace detail {

inline std::string
trim( std::string_view s )
{
   auto b = s.find_first_not_of( " \t\r" );
   if( b == std::string_view::npos )
      return {};
   auto e = s.find_last_not_of( " \t\r" );
   return std::string( s.substr( b, e - b + 1 ) );
}

inline std::vector<std::string>
lines_of( const std::string& text )
{
   std::vector<std::string> out;
   std::istringstream in( text );
   for( std::string line; std::getline( in, line ); )
      out.push_back( trim( line ) );
   while( !out.empty() && out.back().empty() )
      out.pop_back();
   return out;
}

[[noreturn]] inline void
parse_error( const fs::path& path, std::size_t line, const std::string& what )
{
   throw Error( ErrorCode::Parse,
                path.string() + ":" + std::to_string( line ) + ": " + what );
}

inline double
parse_double( const std::string& tok, const fs::path& path, std::size_t line )
{
   double v = 0.0;
   auto t = trim( tok );
   auto [ptr, ec] = std::from_chars( t.data(), t.data() + t.size(), v );
   if( t.empty() || ec != std::errc() || ptr != t.data() + t.size() )
      parse_error( path, line, "not a number: '" + t + "'" );
   return v;
}

inline long long
parse_int( const std::string& tok, const fs::path& path, std::size_t line )
{
   long long v = 0;
   auto t = trim( tok );
   auto [ptr, ec] = std::from_chars( t.data(), t.data() + t.size(), v );
   if( t.empty() || ec != std::errc() || ptr != t.data() + t.size() )
      parse_error( path, line, "not an integer: '" + t + "'" );
   return v;
}

inline std::vector<std::string>
split_commas( const std::string& line )
{
   std::vector<std::string> out;
   std::string cell;
   std::istringstream in( line );
   while( std::getline( in, cell, ',' ) )
      out.push_back( cell );
   if( !line.empty() && line.back() == ',' )
      out.emplace_back();
   return out;
}

} // namespace detail

inline std::string
format_double( double v )
{
   char buf[32];
   std::snprintf( buf, sizeof buf, "%.17g", v );
   return buf;
}

inline Matrix<double>
read_matrix_csv( const fs::path& path )
{
   auto lines = detail::lines_of( read_text_file( path ) );
   if( lines.empty() )
      throw Error( ErrorCode::Parse, path.string() + ": empty matrix file" );
   std::vector<std::vector<double>> rows;
   rows.reserve( lines.size() );
   for( std::size_t i = 0; i < lines.size(); ++i )
   {
      if( lines[i].empty() )
         detail::parse_error( path, i + 1, "blank line" );
      std::vector<double> row;
      for( const auto& cell : detail::split_commas( lines[i] ) )
         row.push_back( detail::parse_double( cell, path, i + 1 ) );
      if( !rows.empty() && row.size() != rows.front().size() )
         throw Error( ErrorCode::NonRectangular,
                      path.string() + ":" + std::to_string( i + 1 ) + ": expected " +
                          std::to_string( rows.front().size() ) + " columns, found " +
                          std::to_string( row.size() ) );
      rows.push_back( std::move( row ) );
   }
   return Matrix<double>::from_rows( rows );
}

inline void
write_matrix_csv( const fs::path& path, const Matrix<double>& m )
{
   std::string text;
   for( std::size_t r = 0; r < m.rows(); ++r )
   {
      for( std::size_t c = 0; c < m.cols(); ++c )
      {
         if( c )
            text += ',';
         text += format_double( m( r, c ) );
      }
      text += '\n';
   }
   write_file( path, text );
}

struct MatrixMetadata
{
   std::optional<double> rate_hz;
   std::vector<std::string> state_names;
   nlohmann::json extra = nlohmann::json::object();
};

inline fs::path
sidecar_path( const fs::path& matrix_path )
{
   auto p = matrix_path;
   return p.replace_extension( ".json" );
}

inline nlohmann::json
read_json( const fs::path& path )
{
   auto text = read_text_file( path );
   try
   {
      return nlohmann::json::parse( text );
   }
   catch( const nlohmann::json::exception& e )
   {
      throw Error( ErrorCode::Parse, path.string() + ": " + e.what() );
   }
}

inline void
write_json( const fs::path& path, const nlohmann::json& j )
{
   write_file( path, j.dump( 2 ) + "\n" );
}

/// Missing sidecar yields empty metadata.
inline MatrixMetadata
read_sidecar( const fs::path& matrix_path )
{
   MatrixMetadata meta;
   auto path = sidecar_path( matrix_path );
   if( !fs::exists( path ) )
      return meta;
   auto j = read_json( path );
   try
   {
      if( !j.is_object() )
         throw Error( ErrorCode::Parse, path.string() + ": expected an object" );
      if( j.contains( "rate_hz" ) && !j["rate_hz"].is_null() )
         meta.rate_hz = j["rate_hz"].get<double>();
      if( j.contains( "state_names" ) )
         meta.state_names = j["state_names"].get<std::vector<std::string>>();
      for( auto it = j.begin(); it != j.end(); ++it )
         if( it.key() != "rate_hz" && it.key() != "state_names" )
            meta.extra[it.key()] = it.value();
   }
   catch( const nlohmann::json::exception& e )
   {
      throw Error( ErrorCode::Parse, path.string() + ": " + e.what() );
   }
   return meta;
}

inline void
write_sidecar( const fs::path& matrix_path, const MatrixMetadata& meta )
{
   nlohmann::json j = meta.extra;
   if( meta.rate_hz )
      j["rate_hz"] = *meta.rate_hz;
   if( !meta.state_names.empty() )
      j["state_names"] = meta.state_names;
   write_json( sidecar_path( matrix_path ), j );
}

/// Reads and validates a probability matrix. An explicit rate overrides the
/// sidecar. Validation errors keep their code and gain the file name.
inline ProbabilityMatrix
load_probabilities( const fs::path& path, std::optional<double> rate_hz = std::nullopt )
{
   auto raw = read_matrix_csv( path );
   auto meta = read_sidecar( path );
   try
   {
      return validate_probability_matrix( std::move( raw ),
                                          rate_hz ? rate_hz : meta.rate_hz );
   }
   catch( const RowNotNormalizedError& e )
   {
      throw Error( e.code(), path.string() + ": " + e.what() + " (line " +
                                 std::to_string( e.row() + 1 ) + ")" );
   }
   catch( const Error& e )
   {
      throw Error( e.code(), path.string() + ": " + e.what() );
   }
}

inline StateSequence
read_states_csv( const fs::path& path )
{
   auto lines = detail::lines_of( read_text_file( path ) );
   StateSequence out;
   out.reserve( lines.size() );
   for( std::size_t i = 0; i < lines.size(); ++i )
   {
      auto v = detail::parse_int( lines[i], path, i + 1 );
      if( v < 0 )
         detail::parse_error( path, i + 1, "negative state" );
      out.push_back( static_cast<std::size_t>( v ) );
   }
   return out;
}

inline void
write_states_csv( const fs::path& path, std::span<const std::size_t> states )
{
   std::string text;
   for( auto s : states )
      text += std::to_string( s ) + '\n';
   write_file( path, text );
}

/// Rows "start,end,state" with end inclusive.
inline void
write_annotation_csv( const fs::path& path, std::span<const std::size_t> states )
{
   std::string text;
   for( const auto& e : extract_events( states ) )
      text += std::to_string( e.start ) + ',' + std::to_string( e.end ) + ',' +
              std::to_string( e.state ) + '\n';
   write_file( path, text );
}

/// Expands an annotation file; runs must tile [0, T) in order.
inline StateSequence
read_annotation_csv( const fs::path& path )
{
   auto lines = detail::lines_of( read_text_file( path ) );
   StateSequence out;
   for( std::size_t i = 0; i < lines.size(); ++i )
   {
      auto cells = detail::split_commas( lines[i] );
      if( cells.size() != 3 )
         detail::parse_error( path, i + 1, "expected start,end,state" );
      auto start = detail::parse_int( cells[0], path, i + 1 );
      auto end = detail::parse_int( cells[1], path, i + 1 );
      auto state = detail::parse_int( cells[2], path, i + 1 );
      if( start != static_cast<long long>( out.size() ) || end < start || state < 0 )
         detail::parse_error( path, i + 1, "runs must be contiguous and ordered" );
      out.insert( out.end(), static_cast<std::size_t>( end - start + 1 ),
                  static_cast<std::size_t>( state ) );
   }
   return out;
}

/// Per-sample max probability with the chosen window shaded.
inline std::string
window_svg( const ProbabilityMatrix& probs, const WindowDecodeResult& window )
{
   const double width = 800.0, height = 200.0;
   const double T = static_cast<double>( probs.samples() );
   auto x_of = [&]( double t ) { return t / std::max( T - 1.0, 1.0 ) * width; };
   std::ostringstream svg;
   svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
       << "\">\n";
   svg << "<rect x=\"" << x_of( static_cast<double>( window.start ) ) << "\" y=\"0\" width=\""
       << x_of( static_cast<double>( window.start + window.width - 1 ) ) -
              x_of( static_cast<double>( window.start ) )
       << "\" height=\"" << height << "\" fill=\"#cce5ff\"/>\n";
   svg << "<polyline fill=\"none\" stroke=\"#333\" stroke-width=\"1\" points=\"";
   for( std::size_t t = 0; t < probs.samples(); ++t )
   {
      auto row = probs.row( t );
      double m = *std::max_element( row.begin(), row.end() );
      svg << x_of( static_cast<double>( t ) ) << ',' << ( 1.0 - m ) * height << ' ';
   }
   svg << "\"/>\n</svg>\n";
   return svg.str();
}

} // namespace cycseg::io
