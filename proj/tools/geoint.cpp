// SPDX-License-Identifier: Apache-2.0

#include "geoint_cli.hpp"

int main(int argc, char** argv) { return geoint::cli::run(argc, argv); }
