#include "cycseg/cli.hpp"

int
main( int argc, char** argv )
{
   std::vector<std::string> args( argv + 1, argv + argc );
   return cycseg::cli::run_cli( args );
}
