#include "logprep/cli.hpp"

int main(int argc, char** argv) { return logprep::cli::run(argc, argv); }
