// Acceptance runner: one PASS/FAIL line per criterion, with the individual
// checks underneath. A criterion passes when all its checks pass and it ran
// within its wall-clock budget. Exit status is 0 only if every requested
// criterion passed.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "backbone/io.hpp"
#include "backbone/verify.hpp"

using namespace backbone;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Two CLI verify runs with the same seed must write identical reports.
CheckResult cli_repeat(const std::string& cli, std::uint64_t seed, const std::string& dir) {
  CheckResult r;
  r.criterion = 12;
  r.name = "c12.cli_repeat_identical";
  r.target = 1.0;
  std::string outputs[2];
  for (int i = 0; i < 2; ++i) {
    const std::string out = dir + "/verify_run" + std::to_string(i) + ".csv";
    const std::string cmd = "\"" + cli + "\" verify --quick --seed " + std::to_string(seed) + " --out \"" + out +
                            "\" 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) {
      r.status = CheckStatus::Fail;
      r.detail = "could not launch " + cli;
      return r;
    }
    outputs[i] = slurp(out);
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  r.status = same ? CheckStatus::Pass : CheckStatus::Fail;
  r.measured = same ? 1.0 : 0.0;
  r.detail = "backbone verify --quick, " + std::to_string(outputs[0].size()) + " bytes";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> criteria;
  std::uint64_t seed = 20240611;
  unsigned threads = 0;
  std::string cli;
  std::string workdir = ".";
  app.add_option("--criterion", criteria, "Criterion number (repeatable, default all)")->check(CLI::Range(1, 12));
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "Monte Carlo threads");
  app.add_option("--cli", cli, "backbone executable, for the command-line determinism check");
  app.add_option("--workdir", workdir, "Scratch directory for CLI outputs");
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty()) {
    for (int c = 1; c <= kCriterionCount; ++c) criteria.push_back(c);
  }

  bool all_pass = true;
  for (int c : criteria) {
    VerifyConfig vc;
    vc.seed = seed;
    vc.threads = threads;
    vc.criteria = {c};
    const auto start = std::chrono::steady_clock::now();
    VerifyReport report = run_verify_suite(vc);
    if (c == 12 && !cli.empty()) report.checks.push_back(cli_repeat(cli, seed, workdir));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const auto& r : report.checks) {
      std::printf("    %-5s %-40s measured %-24s target %-24s tol %s  %s\n", to_string(r.status), r.name.c_str(),
                  io::format_double(r.measured).c_str(), io::format_double(r.target).c_str(),
                  io::format_double(r.tolerance).c_str(), r.detail.c_str());
    }
    const double budget = criterion_budget(c);
    const bool in_budget = secs <= budget;
    const bool pass = report.criterion_status(c) != CheckStatus::Fail && in_budget;
    all_pass = all_pass && pass;
    std::printf("[%s] criterion %2d  %-24s %8.2f s (budget %g s%s)\n", pass ? "PASS" : "FAIL", c,
                criterion_title(c), secs, budget, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
