#include "cycseg/cli.hpp"
#include "support/lp_parser.hpp"
#include "support/random_instances.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

namespace cycseg {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test
{
 protected:
   void
   SetUp() override
   {
      dir_ = fs::temp_directory_path() /
             ( "cycseg_cli_" +
               std::string( ::testing::UnitTest::GetInstance()->current_test_info()->name() ) );
      fs::remove_all( dir_ );
      fs::create_directories( dir_ );
   }
   void
   TearDown() override
   {
      fs::remove_all( dir_ );
   }

   std::string
   path( const std::string& name ) const
   {
      return ( dir_ / name ).string();
   }

   std::string
   write_matrix( const std::string& name, const std::vector<std::vector<double>>& rows )
   {
      io::write_matrix_csv( path( name ), Matrix<double>::from_rows( rows ) );
      return path( name );
   }

   int
   run( std::vector<std::string> args )
   {
      out_.str( "" );
      err_.str( "" );
      return cli::run_cli( args, out_, err_ );
   }

   fs::path dir_;
   std::ostringstream out_, err_;
};

const std::vector<std::vector<double>> kArgmaxInvalid{
    { 0.6, 0.2, 0.2 }, { 0.1, 0.2, 0.7 }, { 0.5, 0.3, 0.2 } };
const std::vector<std::vector<double>> kFiveByTwo{
    { 0.5, 0.5 }, { 0.1, 0.9 }, { 0.2, 0.8 }, { 0.9, 0.1 }, { 0.5, 0.5 } };

TEST_F( CliTest, DecodeViterbi )
{
   auto p = write_matrix( "p.csv", kArgmaxInvalid );
   ASSERT_EQ( run( { "decode", "--probs", p, "--states", "3", "--method", "viterbi",
                     "--out", path( "s.csv" ) } ),
              0 )
       << err_.str();
   EXPECT_EQ( io::read_states_csv( path( "s.csv" ) ), ( StateSequence{ 1, 2, 0 } ) );
   EXPECT_NE( out_.str().find( "objective: 1.4" ), std::string::npos );
   EXPECT_EQ( err_.str(), "" );
}

TEST_F( CliTest, DecodeArgmaxWarns )
{
   auto p = write_matrix( "p.csv", kArgmaxInvalid );
   ASSERT_EQ( run( { "decode", "--probs", p, "--states", "3", "--method", "argmax",
                     "--out", path( "s.csv" ) } ),
              0 );
   EXPECT_NE( err_.str().find( "sequence violates transition model" ), std::string::npos );
   EXPECT_EQ( io::read_states_csv( path( "s.csv" ) ), ( StateSequence{ 0, 2, 0 } ) );
}

TEST_F( CliTest, DecodeUsageAndValidationErrors )
{
   EXPECT_EQ( run( { "decode", "--states", "3", "--out", path( "s.csv" ) } ), 2 );
   EXPECT_NE( err_.str().find( "--probs" ), std::string::npos );
   EXPECT_EQ( run( {} ), 2 );
   EXPECT_EQ( run( { "decode", "--probs", path( "missing.csv" ), "--states", "3", "--out",
                     path( "s.csv" ) } ),
              2 );

   auto bad = write_matrix( "bad.csv", { { 0.5, 0.5 }, { 0.5, 0.6 } } );
   EXPECT_EQ( run( { "decode", "--probs", bad, "--states", "2", "--out", path( "s.csv" ) } ),
              3 );
   EXPECT_NE( err_.str().find( "bad.csv" ), std::string::npos );
   EXPECT_NE( err_.str().find( "line 2" ), std::string::npos );

   auto p = write_matrix( "p.csv", kArgmaxInvalid );
   EXPECT_EQ( run( { "decode", "--probs", p, "--states", "4", "--out", path( "s.csv" ) } ), 3 );

   io::write_file( path( "junk.csv" ), "0.5,abc\n" );
   EXPECT_EQ( run( { "decode", "--probs", path( "junk.csv" ), "--states", "2", "--out",
                     path( "s.csv" ) } ),
              2 );
}

TEST_F( CliTest, WindowBySamplesAndSeconds )
{
   auto p = write_matrix( "p.csv", kFiveByTwo );
   ASSERT_EQ( run( { "window", "--probs", p, "--states", "2", "--samples", "2", "--out",
                     path( "w.json" ), "--emit-plot", path( "w.svg" ) } ),
              0 )
       << err_.str();
   auto j = io::read_json( path( "w.json" ) );
   EXPECT_EQ( j["start"], 1 );
   EXPECT_EQ( j["width"], 2 );
   EXPECT_EQ( j["states"], nlohmann::json::array( { 1, 1 } ) );
   EXPECT_NE( io::read_text_file( path( "w.svg" ) ).find( "<svg" ), std::string::npos );

   std::mt19937_64 rng( 1 );
   auto big = testing::random_probabilities( rng, 300, 4, false );
   io::write_matrix_csv( path( "big.csv" ), big.values() );
   ASSERT_EQ( run( { "window", "--probs", path( "big.csv" ), "--states", "4", "--seconds",
                     "5", "--rate", "50", "--out", path( "b.json" ) } ),
              0 )
       << err_.str();
   EXPECT_EQ( io::read_json( path( "b.json" ) )["width"], 250 );

   // Same answer from the threaded per-start route.
   ASSERT_EQ( run( { "window", "--probs", path( "big.csv" ), "--states", "4", "--seconds",
                     "5", "--rate", "50", "--workers", "3", "--out", path( "c.json" ) } ),
              0 );
   EXPECT_EQ( io::read_json( path( "b.json" ) ), io::read_json( path( "c.json" ) ) );

   EXPECT_EQ( run( { "window", "--probs", p, "--states", "2", "--seconds", "0", "--rate",
                     "50", "--out", path( "w.json" ) } ),
              3 );
   EXPECT_EQ( run( { "window", "--probs", p, "--states", "2", "--samples", "6", "--out",
                     path( "w.json" ) } ),
              3 );
   EXPECT_EQ( run( { "window", "--probs", p, "--states", "2", "--seconds", "1", "--out",
                     path( "w.json" ) } ),
              2 );
}

TEST_F( CliTest, EvalIdentityMismatchAndRoundTrip )
{
   auto p = write_matrix( "p.csv", kArgmaxInvalid );
   ASSERT_EQ( run( { "decode", "--probs", p, "--states", "3", "--out", path( "s.csv" ) } ),
              0 );
   ASSERT_EQ( run( { "eval", "--gt", path( "s.csv" ), "--est", path( "s.csv" ), "--rate",
                     "50", "--positive", "0,2", "--out", path( "r.json" ) } ),
              0 )
       << err_.str();
   auto j = io::read_json( path( "r.json" ) );
   const auto& row = j["recordings"][0];
   EXPECT_EQ( row["accuracy"], 1.0 );
   EXPECT_EQ( row["sensitivity"], 1.0 );
   EXPECT_EQ( row["specificity"], 1.0 );
   EXPECT_EQ( row["fp"], 0 );
   EXPECT_EQ( row["fn"], 0 );

   io::write_states_csv( path( "short.csv" ), StateSequence{ 1, 2 } );
   EXPECT_EQ( run( { "eval", "--gt", path( "s.csv" ), "--est", path( "short.csv" ),
                     "--rate", "50", "--positive", "0", "--out", path( "r.json" ) } ),
              3 );
}

TEST_F( CliTest, EvalBoundaryFixture )
{
   auto runs = []( std::initializer_list<std::pair<std::size_t, std::size_t>> spec ) {
      StateSequence out;
      for( auto [s, n] : spec )
         out.insert( out.end(), n, s );
      return out;
   };
   io::write_states_csv( path( "gt.csv" ), runs( { { 1, 10 }, { 0, 5 }, { 1, 15 } } ) );
   io::write_states_csv( path( "est.csv" ), runs( { { 1, 13 }, { 0, 5 }, { 1, 12 } } ) );
   auto eval = [&]( const std::string& tol ) {
      EXPECT_EQ( run( { "eval", "--gt", path( "gt.csv" ), "--est", path( "est.csv" ),
                        "--rate", "50", "--tolerance-ms", tol, "--positive", "0", "--out",
                        path( "r.json" ) } ),
                 0 );
      return io::read_json( path( "r.json" ) )["recordings"][0];
   };
   auto at60 = eval( "60" );
   EXPECT_EQ( at60["tp"], 0 );
   EXPECT_EQ( at60["fp"], 1 );
   EXPECT_EQ( at60["fn"], 1 );
   EXPECT_EQ( at60["tn"], 2 );
   EXPECT_EQ( eval( "80" )["tp"], 1 );

   ASSERT_EQ( run( { "eval", "--gt", path( "gt.csv" ), "--est", path( "est.csv" ), "--rate",
                     "50", "--positive", "0", "--window", "0,10", "--out", path( "r.json" ) } ),
              0 );
   auto w = io::read_json( path( "r.json" ) )["recordings"][0];
   EXPECT_EQ( w["evaluated_range"], nlohmann::json::array( { 0, 10 } ) );
   EXPECT_EQ( w["accuracy"], 1.0 );
}

TEST_F( CliTest, SynthAndCompare )
{
   auto corpus = path( "corpus" );
   ASSERT_EQ( run( { "synth", "--out-dir", corpus, "--recordings", "4", "--seed", "5",
                     "--duration", "10" } ),
              0 )
       << err_.str();
   EXPECT_TRUE( fs::exists( dir_ / "corpus" / "rec_0003.csv" ) );
   EXPECT_TRUE( fs::exists( dir_ / "corpus" / "rec_0003.json" ) );
   EXPECT_TRUE( fs::exists( dir_ / "corpus" / "rec_0003.ann.csv" ) );
   auto meta = io::read_sidecar( dir_ / "corpus" / "rec_0003.csv" );
   EXPECT_EQ( meta.rate_hz, 50.0 );
   EXPECT_EQ( meta.state_names.size(), 4u );

   // Files round-trip the generator exactly.
   CorpusSettings s;
   s.recordings = 4;
   s.master_seed = 5;
   s.duration_s = 10;
   auto rec = generate_recording( corpus_config( s, 3 ), "rec_0003" );
   EXPECT_EQ( io::read_annotation_csv( dir_ / "corpus" / "rec_0003.ann.csv" ),
              rec.ground_truth );
   EXPECT_EQ( io::load_probabilities( dir_ / "corpus" / "rec_0003.csv" ).values(),
              rec.probabilities.values() );

   std::vector<std::string> args{ "compare", "--corpus", corpus, "--seconds", "5",
                                  "--trials", "3", "--seed", "9", "--out", path( "a.json" ) };
   ASSERT_EQ( run( args ), 0 ) << err_.str();
   EXPECT_NE( out_.str().find( "window_decode" ), std::string::npos );
   args.back() = path( "b.json" );
   args.push_back( "--workers" );
   args.push_back( "2" );
   ASSERT_EQ( run( args ), 0 );
   auto a = io::read_json( path( "a.json" ) );
   EXPECT_EQ( a, io::read_json( path( "b.json" ) ) );
   ASSERT_EQ( a["recordings"].size(), 4u );
   EXPECT_EQ( a["recordings"][0]["name"], "rec_0000" );
   EXPECT_EQ( a["window_width"], 250 );

   for( auto m : kCompareMethods )
   {
      double sum = 0.0;
      for( const auto& row : a["recordings"] )
         sum += row[to_string( m )]["accuracy"].get<double>();
      EXPECT_NEAR( a["aggregate"][to_string( m )]["accuracy"]["mean"].get<double>(),
                   sum / 4.0, 1e-12 );
   }

   fs::create_directories( dir_ / "empty" );
   EXPECT_EQ( run( { "compare", "--corpus", path( "empty" ), "--out", path( "c.json" ) } ),
              2 );
}

TEST_F( CliTest, ExportLp )
{
   auto p = write_matrix( "p.csv", kFiveByTwo );
   ASSERT_EQ( run( { "export-lp", "--probs", p, "--states", "2", "--formulation",
                     "sequence-linear", "--out", path( "a.lp" ) } ),
              0 )
       << err_.str();
   auto seq = testing::parse_lp( io::read_text_file( path( "a.lp" ) ) );
   EXPECT_EQ( seq.declared( "variables" ),
              formulation_sizes( 5, 2, Formulation::SequenceLinear ).variables );

   ASSERT_EQ( run( { "export-lp", "--probs", p, "--states", "2", "--formulation",
                     "window-path", "--samples", "2", "--out", path( "b.lp" ) } ),
              0 );
   EXPECT_FALSE( testing::parse_lp( io::read_text_file( path( "b.lp" ) ) ).maximize );
   ASSERT_EQ( run( { "export-lp", "--probs", p, "--states", "2", "--formulation",
                     "window-path", "--samples", "2", "--cardinality", "literal", "--out",
                     path( "c.lp" ) } ),
              0 );
   EXPECT_NE( io::read_text_file( path( "c.lp" ) ).find( "literal-arcs" ), std::string::npos );

   EXPECT_EQ( run( { "export-lp", "--probs", p, "--states", "2", "--formulation", "mps",
                     "--out", path( "d.lp" ) } ),
              2 );
   EXPECT_EQ( run( { "export-lp", "--probs", p, "--states", "2", "--formulation",
                     "window-path", "--samples", "9", "--out", path( "d.lp" ) } ),
              3 );
   EXPECT_EQ( run( { "export-lp", "--probs", p, "--states", "2", "--out",
                     path( "nodir/x.lp" ) } ),
              2 );
}

TEST_F( CliTest, InferAndDecodeFromWeights )
{
   ASSERT_EQ( run( { "random-weights", "--features", "3", "--memory", "4", "--states", "4",
                     "--seed", "2", "--range", "0.5", "--out", path( "w.json" ) } ),
              0 )
       << err_.str();
   std::mt19937_64 rng( 3 );
   std::normal_distribution<double> g;
   Matrix<double> x( 40, 3 );
   for( std::size_t t = 0; t < 40; ++t )
      for( double& v : x.row( t ) )
         v = g( rng );
   io::write_matrix_csv( path( "x.csv" ), x );

   ASSERT_EQ( run( { "infer", "--weights", path( "w.json" ), "--features", path( "x.csv" ),
                     "--gate-mode", "standard", "--rate", "50", "--out", path( "p.csv" ) } ),
              0 )
       << err_.str();
   auto p = io::load_probabilities( path( "p.csv" ) );
   EXPECT_EQ( p.samples(), 40u );
   EXPECT_EQ( p.rate_hz(), 50.0 );
   auto expected = infer_probabilities( load_lstm_weights( path( "w.json" ) ), x,
                                        GateMode::Standard );
   for( std::size_t t = 0; t < 40; ++t )
      for( std::size_t s = 0; s < 4; ++s )
         EXPECT_NEAR( p( t, s ), expected( t, s ), 1e-15 );

   ASSERT_EQ( run( { "decode", "--weights", path( "w.json" ), "--features", path( "x.csv" ),
                     "--gate-mode", "standard", "--states", "4", "--out", path( "s.csv" ) } ),
              0 )
       << err_.str();
   EXPECT_EQ( io::read_states_csv( path( "s.csv" ) ),
              viterbi_decode( expected, CyclicTransitionModel( 4 ) ).states );

   EXPECT_EQ( run( { "decode", "--weights", path( "w.json" ), "--states", "4", "--out",
                     path( "s.csv" ) } ),
              2 );
   EXPECT_EQ( run( { "decode", "--probs", path( "p.csv" ), "--weights", path( "w.json" ),
                     "--features", path( "x.csv" ), "--states", "4", "--out",
                     path( "s.csv" ) } ),
              2 );
   io::write_matrix_csv( path( "x2.csv" ), Matrix<double>( 5, 2, 0.0 ) );
   EXPECT_EQ( run( { "infer", "--weights", path( "w.json" ), "--features", path( "x2.csv" ),
                     "--out", path( "p2.csv" ) } ),
              3 );
}

} // namespace
} // namespace cycseg
