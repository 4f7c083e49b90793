// crystal-flow: run scenario files.
//
//   crystal-flow simulate scenarios/wulff-shrink.json --check
//   crystal-flow verify-identity scenarios/identity-sweep.json --out-dir /tmp/cf
//
// Several files run in parallel; outputs go to <out-dir>/<scenario name>/.
// Exit status: 0 ok, 1 a check failed, 2 bad input.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "crystal_flow/scenario.hpp"

using namespace crystal_flow;

namespace {

struct Args {
  std::vector<std::string> files;
  std::string out_dir;
  bool check = false;
  std::optional<double> max_time;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

int run(Action action, const Args& args) {
  RunOptions opts;
  // the environment wins over --out-dir
  if (const char* env = std::getenv("CRYSTAL_FLOW_OUT"); env && *env)
    opts.out_dir = env;
  else if (!args.out_dir.empty())
    opts.out_dir = args.out_dir;
  opts.check = args.check;
  opts.max_time = args.max_time;
  opts.seed = args.seed;

  std::vector<ScenarioOutcome> results(args.files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < args.files.size();)
      results[k] = run_scenario(std::filesystem::path(args.files[k]), action, opts);
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(args.jobs > 0 ? args.jobs : hw, args.files.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const ScenarioOutcome& r = results[k];
    const char* verdict = r.exit_code == 0 ? "ok" : r.exit_code == 1 ? "FAIL" : "ERROR";
    std::cout << args.files[k] << ": " << verdict;
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << "\n";
    for (const auto& c : r.checks)
      std::cout << "  " << (c.passed ? "pass " : "FAIL ") << c.metric << ": " << c.detail << "\n";
    code = std::max(code, r.exit_code);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystalline elastic flow of polygonal curves"};
  app.require_subcommand(1);
  Args args;
  std::optional<Action> chosen;

  for (Action a : {Action::Simulate, Action::Catalog, Action::Classify, Action::TranslatingCheck,
                   Action::VerifyIdentity, Action::Audit}) {
    CLI::App* sub = app.add_subcommand(to_string(a));
    sub->add_option("files", args.files, "scenario files")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", args.out_dir, "output directory (default ./out; $CRYSTAL_FLOW_OUT takes precedence)");
    sub->add_flag("--check", args.check, "evaluate the scenario's checks");
    sub->add_option("--max-time", args.max_time, "override integrator max_time")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "override the random generator seed");
    sub->add_option("-j,--jobs", args.jobs, "parallel workers (default: hardware threads)");
    sub->callback([&chosen, a] { chosen = a; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run(*chosen, args);
}
