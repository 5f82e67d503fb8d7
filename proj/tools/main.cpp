#include "commands.hpp"

int main(int argc, char** argv) { return seg::cli::run(argc, argv); }
