#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cycseg {

enum class ErrorCode {
   Io,
   Parse,
   NonRectangular,
   RowNotNormalized,
   NegativeEntry,
   NonFiniteInput,
   TooFewStates,
   StateOutOfRange,
   DimensionMismatch,
   ShapeMismatch,
   WindowTooLong,
   InvalidWindow,
   InstanceTooLarge,
   WriteFailure,
   LengthMismatch,
   EmptyEvaluationRange,
   InvalidConfig,
};

inline const char*
to_string( ErrorCode code )
{
   switch( code )
   {
   case ErrorCode::Io: return "Io";
   case ErrorCode::Parse: return "Parse";
   case ErrorCode::NonRectangular: return "NonRectangular";
   case ErrorCode::RowNotNormalized: return "RowNotNormalized";
   case ErrorCode::NegativeEntry: return "NegativeEntry";
   case ErrorCode::NonFiniteInput: return "NonFiniteInput";
   case ErrorCode::TooFewStates: return "TooFewStates";
   case ErrorCode::StateOutOfRange: return "StateOutOfRange";
   case ErrorCode::DimensionMismatch: return "DimensionMismatch";
   case ErrorCode::ShapeMismatch: return "ShapeMismatch";
   case ErrorCode::WindowTooLong: return "WindowTooLong";
   case ErrorCode::InvalidWindow: return "InvalidWindow";
   case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
   case ErrorCode::WriteFailure: return "WriteFailure";
   case ErrorCode::LengthMismatch: return "LengthMismatch";
   case ErrorCode::EmptyEvaluationRange: return "EmptyEvaluationRange";
   case ErrorCode::InvalidConfig: return "InvalidConfig";
   }
   return "Unknown";
}

/// Base exception for every failure raised by the library. The code lets
/// callers (the CLI in particular) branch without string matching.
class Error : public std::runtime_error
{
 public:
   Error( ErrorCode code, const std::string& what )
       : std::runtime_error( what ), code_( code )
   {
   }

   ErrorCode
   code() const noexcept
   {
      return code_;
   }

 private:
   ErrorCode code_;
};

class RowNotNormalizedError : public Error
{
 public:
   RowNotNormalizedError( std::size_t row, double sum )
       : Error( ErrorCode::RowNotNormalized, describe( row, sum ) ),
         row_( row ), sum_( sum )
   {
   }

   std::size_t
   row() const noexcept
   {
      return row_;
   }
   double
   sum() const noexcept
   {
      return sum_;
   }

 private:
   static std::string
   describe( std::size_t row, double sum )
   {
      std::ostringstream os;
      os.precision( 12 );
      os << "row " << row << " sums to " << sum << ", expected 1";
      return os.str();
   }

   std::size_t row_;
   double sum_;
};

/// Dense row-major matrix.
template <typename T>
class Matrix
{
 public:
   Matrix() = default;

   Matrix( std::size_t rows, std::size_t cols, T fill = T{} )
       : rows_( rows ), cols_( cols ), data_( rows * cols, fill )
   {
   }

   static Matrix
   from_rows( const std::vector<std::vector<T>>& rows )
   {
      Matrix m( rows.size(), rows.empty() ? 0 : rows.front().size() );
      for( std::size_t r = 0; r < rows.size(); ++r )
      {
         if( rows[r].size() != m.cols_ )
            throw Error( ErrorCode::NonRectangular,
                         "row " + std::to_string( r ) + " has " +
                             std::to_string( rows[r].size() ) +
                             " entries, expected " +
                             std::to_string( m.cols_ ) );
         for( std::size_t c = 0; c < m.cols_; ++c )
            m( r, c ) = rows[r][c];
      }
      return m;
   }

   std::size_t
   rows() const noexcept
   {
      return rows_;
   }
   std::size_t
   cols() const noexcept
   {
      return cols_;
   }
   bool
   empty() const noexcept
   {
      return data_.empty();
   }

   T&
   operator()( std::size_t r, std::size_t c )
   {
      return data_[r * cols_ + c];
   }
   const T&
   operator()( std::size_t r, std::size_t c ) const
   {
      return data_[r * cols_ + c];
   }

   std::span<T>
   row( std::size_t r )
   {
      return { data_.data() + r * cols_, cols_ };
   }
   std::span<const T>
   row( std::size_t r ) const
   {
      return { data_.data() + r * cols_, cols_ };
   }

   std::span<const T>
   data() const noexcept
   {
      return data_;
   }

   /// Rows [begin, end) as a new matrix.
   Matrix
   slice_rows( std::size_t begin, std::size_t end ) const
   {
      Matrix m( end - begin, cols_ );
      std::copy( data_.begin() + begin * cols_, data_.begin() + end * cols_,
                 m.data_.begin() );
      return m;
   }

   friend bool
   operator==( const Matrix&, const Matrix& ) = default;

 private:
   std::size_t rows_ = 0;
   std::size_t cols_ = 0;
   std::vector<T> data_;
};

using StateSequence = std::vector<std::size_t>;

/// Half-open sample interval [begin, end).
struct SampleRange
{
   std::size_t begin = 0;
   std::size_t end = 0;

   std::size_t
   size() const noexcept
   {
      return end > begin ? end - begin : 0;
   }
   bool
   contains( double x ) const noexcept
   {
      return x >= static_cast<double>( begin ) && x < static_cast<double>( end );
   }

   friend bool
   operator==( const SampleRange&, const SampleRange& ) = default;
};

inline constexpr double kRowSumTolerance = 1e-6;

/// Validated T x L matrix of per-sample state probabilities.
/// Only constructible through validate_probability_matrix().
class ProbabilityMatrix
{
 public:
   std::size_t
   samples() const noexcept
   {
      return values_.rows();
   }
   std::size_t
   states() const noexcept
   {
      return values_.cols();
   }
   double
   operator()( std::size_t t, std::size_t s ) const
   {
      return values_( t, s );
   }
   std::span<const double>
   row( std::size_t t ) const
   {
      return values_.row( t );
   }
   const Matrix<double>&
   values() const noexcept
   {
      return values_;
   }
   std::optional<double>
   rate_hz() const noexcept
   {
      return rate_hz_;
   }

   /// Rows [begin, end) keep their validated status.
   ProbabilityMatrix
   slice( std::size_t begin, std::size_t end ) const
   {
      return ProbabilityMatrix( values_.slice_rows( begin, end ), rate_hz_ );
   }

 private:
   ProbabilityMatrix( Matrix<double> values, std::optional<double> rate )
       : values_( std::move( values ) ), rate_hz_( rate )
   {
   }

   friend ProbabilityMatrix
   validate_probability_matrix( Matrix<double> raw,
                                std::optional<double> rate_hz );

   Matrix<double> values_;
   std::optional<double> rate_hz_;
};

/// Checks shape, sign and row sums. Rows within kRowSumTolerance of one are
/// rescaled to sum to one; anything further off is rejected. Rows already
/// within rounding noise of one are kept verbatim.
inline ProbabilityMatrix
validate_probability_matrix( Matrix<double> raw,
                             std::optional<double> rate_hz = std::nullopt )
{
   if( raw.rows() == 0 )
      throw Error( ErrorCode::NonRectangular, "matrix has no rows" );
   if( raw.cols() < 2 )
      throw Error( ErrorCode::TooFewStates,
                   "need at least 2 states, got " +
                       std::to_string( raw.cols() ) );
   if( rate_hz && !( std::isfinite( *rate_hz ) && *rate_hz > 0.0 ) )
      throw Error( ErrorCode::InvalidConfig, "sample rate must be positive" );

   for( std::size_t t = 0; t < raw.rows(); ++t )
   {
      auto row = raw.row( t );
      double sum = 0.0;
      for( std::size_t s = 0; s < row.size(); ++s )
      {
         if( !std::isfinite( row[s] ) )
            throw Error( ErrorCode::NonFiniteInput,
                         "row " + std::to_string( t ) + " column " +
                             std::to_string( s ) + " is not finite" );
         if( row[s] < 0.0 )
            throw Error( ErrorCode::NegativeEntry,
                         "row " + std::to_string( t ) + " column " +
                             std::to_string( s ) + " is negative" );
         sum += row[s];
      }
      if( std::abs( sum - 1.0 ) > kRowSumTolerance )
         throw RowNotNormalizedError( t, sum );
      if( std::abs( sum - 1.0 ) > 1e-12 )
         for( double& v : row )
            v /= sum;
   }
   return ProbabilityMatrix( std::move( raw ), rate_hz );
}

inline ProbabilityMatrix
validate_probability_matrix( const std::vector<std::vector<double>>& raw,
                             std::optional<double> rate_hz = std::nullopt )
{
   return validate_probability_matrix( Matrix<double>::from_rows( raw ),
                                       rate_hz );
}

/// State s may persist or advance to (s + 1) mod L. For L = 2 this admits
/// every transition.
class CyclicTransitionModel
{
 public:
   explicit CyclicTransitionModel( std::size_t states,
                                   std::vector<std::string> names = {} )
       : states_( states ), names_( std::move( names ) )
   {
      if( states_ < 2 )
         throw Error( ErrorCode::TooFewStates,
                      "need at least 2 states, got " +
                          std::to_string( states_ ) );
      if( !names_.empty() && names_.size() != states_ )
         throw Error( ErrorCode::DimensionMismatch,
                      "expected " + std::to_string( states_ ) +
                          " state names, got " +
                          std::to_string( names_.size() ) );
   }

   std::size_t
   states() const noexcept
   {
      return states_;
   }

   const std::vector<std::string>&
   state_names() const noexcept
   {
      return names_;
   }

   std::size_t
   next( std::size_t s ) const noexcept
   {
      return ( s + 1 ) % states_;
   }

   std::size_t
   previous( std::size_t s ) const noexcept
   {
      return ( s + states_ - 1 ) % states_;
   }

   bool
   allows( std::size_t from, std::size_t to ) const noexcept
   {
      return to == from || to == next( from );
   }

   /// Adjacency matrix: ones at (s, s) and (s, s+1 mod L).
   Matrix<int>
   adjacency() const
   {
      Matrix<int> q( states_, states_, 0 );
      for( std::size_t s = 0; s < states_; ++s )
      {
         q( s, s ) = 1;
         q( s, next( s ) ) = 1;
      }
      return q;
   }

 private:
   std::size_t states_;
   std::vector<std::string> names_;
};

inline void
check_states_in_range( const CyclicTransitionModel& model,
                       std::span<const std::size_t> states )
{
   for( std::size_t t = 0; t < states.size(); ++t )
      if( states[t] >= model.states() )
         throw Error( ErrorCode::StateOutOfRange,
                      "state " + std::to_string( states[t] ) + " at index " +
                          std::to_string( t ) + " is outside [0, " +
                          std::to_string( model.states() ) + ")" );
}

inline bool
is_valid_sequence( const CyclicTransitionModel& model,
                   std::span<const std::size_t> states )
{
   check_states_in_range( model, states );
   for( std::size_t t = 1; t < states.size(); ++t )
      if( !model.allows( states[t - 1], states[t] ) )
         return false;
   return true;
}

struct DecodedSequence
{
   StateSequence states;
   double objective = 0.0;
};

struct WindowDecodeResult
{
   std::size_t start = 0;
   std::size_t width = 0;
   StateSequence states;
   double objective = 0.0;

   SampleRange
   range() const noexcept
   {
      return { start, start + width };
   }

   /// One entry per sample: true where no state is assigned.
   std::vector<bool>
   unassigned_mask( std::size_t samples ) const
   {
      std::vector<bool> mask( samples, true );
      for( std::size_t t = start; t < start + width && t < samples; ++t )
         mask[t] = false;
      return mask;
   }
};

/// Sum of p[offset + i][states[i]], accumulated in time order.
inline double
path_objective( const ProbabilityMatrix& probs,
                std::span<const std::size_t> states, std::size_t offset = 0 )
{
   double sum = 0.0;
   for( std::size_t i = 0; i < states.size(); ++i )
      sum += probs( offset + i, states[i] );
   return sum;
}

inline void
require_same_states( const ProbabilityMatrix& probs,
                     const CyclicTransitionModel& model )
{
   if( probs.states() != model.states() )
      throw Error( ErrorCode::DimensionMismatch,
                   "probability matrix has " +
                       std::to_string( probs.states() ) +
                       " states, transition model has " +
                       std::to_string( model.states() ) );
}

} // namespace cycseg
