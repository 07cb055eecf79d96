#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dstring/cli.hpp"

namespace {

constexpr const char* kFooter = R"(Commands and output files (<prefix>_<name>):
  kernel    kernel.csv    t,gamma
  evolve    evolve.csv    t,re_c_a,im_c_a,re_p_a,im_p_a,ccr_defect
  energies  energies.csv  t,string_energy
  rates     rates.csv     channel,rate,analytic,rel_err
            density.csv   state,weight,string_change,bath_change,channel
  oracle    oracle.csv    t,phonon_number,string_energy,interaction_energy,reservoir_energy,ccr_defect
  shapes    shapes.csv    r,P,Q
Every command also writes summary.txt (key=value; analytic/oracle pairs carry
.analytic, .oracle and .rel_err suffixes).

All quantities are in the units of the config (hbar = c = 1): t in time units,
rates per unit time, energies in frequency units, r in length units.
Numbers use the shortest round-trip decimal form; text cells are quoted.

Exit status: 0 success, 2 config error, 3 numeric or precondition error, 4 I/O error.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped string coupled to a scalar-field reservoir: kernels, solutions, energies, rates and a discrete-bath oracle."};
  app.footer(kFooter);
  app.name("dstring");

  dstring::Invocation inv;
  std::string out;
  app.add_option("command", inv.command, "kernel | evolve | energies | rates | oracle | shapes")->required();
  app.add_option("--config", inv.config_path, "key=value configuration file")->required();
  app.add_option("--out", out, "output path prefix (overrides output.prefix)");
  app.add_option("--threads", inv.threads, "worker threads for parallel sections")->check(CLI::Range(1u, 1024u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!out.empty()) inv.out_prefix = out;
  return dstring::run(inv, std::cerr);
}
