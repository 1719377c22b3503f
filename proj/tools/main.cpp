#include "fingergan/cli.hpp"

int main(int argc, char** argv) { return fingergan::cli::run(argc, argv); }
