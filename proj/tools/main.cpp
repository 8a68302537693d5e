#include "mobs/cli.hpp"

int main(int argc, char** argv) { return mobs::cli_main(argc, argv); }
