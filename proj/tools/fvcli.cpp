// Command-line driver: solve a single problem, run a convergence study, or
// run a stability study, all driven by a JSON config.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fvr/study.hpp"

namespace {

std::vector<int> parse_n_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw fvr::config_error("invalid --n-list entry: " + tok);
    }
  }
  if (out.empty()) throw fvr::config_error("empty --n-list");
  return out;
}

void print_convergence_summary(const fvr::ConvergenceStudy& st, bool quiet) {
  if (quiet) return;
  std::printf("%6s %12s %8s %12s %12s %12s %9s %9s %9s\n", "n", "h", "dofs", "err_h1", "err_l2",
              "err_sc", "ord_h1", "ord_l2", "ord_sc");
  for (std::size_t i = 0; i < st.reports.size(); ++i) {
    const auto& r = st.reports[i];
    std::printf("%6d %12.4e %8d %12.4e %12.4e %12.4e", r.n, r.h, r.dof_count, r.err_h1, r.err_l2,
                r.err_supercloseness);
    if (i >= 1 && st.rates)
      std::printf(" %9.3f %9.3f %9.3f\n", st.rates->order_h1[i - 1], st.rates->order_l2[i - 1],
                  st.rates->order_sc[i - 1]);
    else
      std::printf(" %9s %9s %9s\n", "-", "-", "-");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arbitrary-order vertex-centered finite volume solver on rectangles"};
  app.require_subcommand(1);

  std::string config_path, out_path, n_list_str = "4,8,16,32";
  int probes = 20;
  std::uint64_t seed = 0;
  bool seed_set = false, quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON problem config")->required();
    cmd->add_option("--out", out_path, "output file path")->required();
    cmd->add_flag("--quiet", quiet, "suppress the summary table");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; },
        "override the config seed");
  };

  CLI::App* solve = app.add_subcommand("solve", "assemble and solve one problem");
  add_common(solve);
  CLI::App* conv = app.add_subcommand("convergence", "uniform-refinement convergence study");
  add_common(conv);
  conv->add_option("--n-list", n_list_str, "comma-separated mesh sizes (default 4,8,16,32)");
  CLI::App* stab = app.add_subcommand("stability", "coercivity / boundedness / inf-sup study");
  add_common(stab);
  stab->add_option("--n-list", n_list_str, "comma-separated mesh sizes (default 4,8,16,32)");
  stab->add_option("--probes", probes, "random probes per mesh level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fvr::ProblemConfig cfg = fvr::load_config(config_path);
    if (seed_set) cfg.seed = seed;

    if (solve->parsed()) {
      fvr::SolveResult res = fvr::run_solve(cfg);
      fvr::write_file(out_path, fvr::solve_to_json(cfg, res).dump(2) + "\n");
      if (!quiet) {
        std::printf("solved: %d dofs, h = %g\n", res.dofs, res.h);
        if (res.error)
          std::printf("err_h1 = %.6e  err_l2 = %.6e  err_sc = %.6e\n", res.error->err_h1,
                      res.error->err_l2, res.error->err_supercloseness);
      }
    } else if (conv->parsed()) {
      std::vector<int> ns = parse_n_list(n_list_str);
      fvr::ConvergenceStudy st = fvr::run_convergence(cfg, ns);
      fvr::write_file(out_path, fvr::convergence_to_csv(st));
      print_convergence_summary(st, quiet);
    } else {
      std::vector<int> ns = parse_n_list(n_list_str);
      auto rows = fvr::run_stability(cfg, ns, probes);
      fvr::write_file(out_path, fvr::stability_to_json(cfg, rows, probes).dump(2) + "\n");
      if (!quiet)
        for (const auto& row : rows)
          std::printf("n = %d: dofs = %d, coercivity = %s, boundedness = %.6g, sigma_min = %s\n",
                      row.n, row.dofs,
                      row.report.coercivity_ratio
                          ? std::to_string(*row.report.coercivity_ratio).c_str()
                          : "unsupported",
                      row.report.boundedness_ratio,
                      row.report.infsup_sigma ? std::to_string(*row.report.infsup_sigma).c_str()
                                              : "skipped");
    }
  } catch (const fvr::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
