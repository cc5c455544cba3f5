#include "knet/cli.hpp"

int main(int argc, char** argv) { return knet::cli::run(argc, argv); }
