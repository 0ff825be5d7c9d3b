// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance driver: runs every criterion of the reference suite at its
// stated tolerance and prints one PASS/FAIL line per criterion.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "coneext/suite.hpp"

int main(int argc, char** argv) {
  coneext::SuiteOptions opts;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      opts.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only.push_back(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--inject-sign-error") == 0) {
      opts.inject_sign_error = true;
    } else {
      std::fprintf(stderr, "usage: %s [--seed N] [--criterion K]... [--inject-sign-error]\n",
                   argv[0]);
      return 2;
    }
  }
  std::vector<coneext::CriterionResult> results =
      coneext::run_acceptance_suite(opts, coneext::Tolerances{}, only);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-4s %2d  %-55s %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str(), r.seconds);
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "all criteria passed" : "FAILURES present");
  return all ? 0 : 1;
}
