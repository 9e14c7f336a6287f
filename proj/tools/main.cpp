#include "pae/cli.hpp"

int main(int argc, char** argv) { return pae::cli_dispatch(argc, argv); }
