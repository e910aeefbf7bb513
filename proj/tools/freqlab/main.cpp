#include "freqlab/runner.hpp"

int main(int argc, char** argv) { return freqlab::cli_main(argc, argv); }
