#include "tunelz/cli.hpp"

int main(int argc, char** argv) { return tunelz::cli::run(argc, argv); }
