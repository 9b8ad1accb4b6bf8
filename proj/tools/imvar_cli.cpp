#include "imvar/cli.hpp"

int main(int argc, char** argv) { return imvar::cli_main(argc, argv); }
