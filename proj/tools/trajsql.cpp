// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "trajsql/cli/cli.h"

int main(int argc, char** argv) { return trajsql::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
