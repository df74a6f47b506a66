#include "cli.hpp"

int main(int argc, char** argv) { return blowtime::cli::parse_and_dispatch(argc, argv); }
