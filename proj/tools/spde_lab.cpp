#include <spde_lab/cli.hpp>

int main(int argc, char** argv) { return spde_lab::cli::run(argc, argv); }
