// meanforce — config-driven experiments on thermal open quantum systems.
//
//   meanforce <experiment> --config <path> [--out <path>] [--cross-check] [--sweep <dir>]
//
// Experiments: static-thermo | evolve | jc | check-commutators.
// Exit codes: 0 success, 2 config error, 3 contract violation, 4 cross-check
// failure.

#include <string>
#include <vector>

#include "meanforce/runner.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return meanforce::cli::run_main(args);
}
