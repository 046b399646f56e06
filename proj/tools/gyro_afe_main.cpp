#include "gyro_afe/cli.hpp"

int main(int argc, char** argv) { return gyro_afe::cli::run(argc, argv); }
