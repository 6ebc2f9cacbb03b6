#include "tsudetect/cli.hpp"

int main(int argc, char** argv) { return tsudetect::cli::run(argc, argv); }
