#include "gauge/harness.hpp"

int main(int argc, char** argv) { return gauge::run_cli(argc, argv); }
