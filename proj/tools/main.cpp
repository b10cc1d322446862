#include "cli.hpp"

int main(int argc, char** argv) { return sodcal::cli::run(argc, argv); }
