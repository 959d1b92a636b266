#include "kuraduel/expcli.hpp"

int main(int argc, char** argv) { return kuraduel::cli_main(argc, argv); }
