#include "otmatch/io.hpp"

int main(int argc, char** argv) { return otm::cli::run(argc, argv); }
