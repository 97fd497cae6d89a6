// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "lambdanet/cli.hpp"

int main(int argc, char** argv) { return lambdanet::cli::run(argc, argv, std::cout, std::cerr); }
