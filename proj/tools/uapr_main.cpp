#include "uapr/cli.hpp"

int main(int argc, char** argv) { return uapr::cli::cli_main(argc, argv); }
