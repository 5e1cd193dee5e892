#include <iostream>

#include "CLI11.hpp"
#include "tsec/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Global cross sections and harmonic flux forms of flows on flat tori"};
  std::string command, config, out = "tsec_out";
  tsec::cli::Overrides ov;
  int resolution = 0, truncation = -1;
  long long denominator = 0;
  double tolerance = 0.0;
  app.add_option("command", command, "check-invariance | check-harmonic | find-section | build-metric | "
                                     "return-map | suspend | round-trip")
      ->required()
      ->check(CLI::IsMember(tsec::cli::command_names()));
  app.add_option("--config", config, "experiment config (INI)")->required();
  app.add_option("--out", out, "output directory");
  auto* res_opt = app.add_option("--resolution", resolution, "grid points per axis (even, >= 8)");
  auto* k_opt = app.add_option("--truncation", truncation, "Fourier truncation K of the primitive h");
  auto* d_opt = app.add_option("--denominator", denominator, "denominator bound D for rational periods");
  auto* t_opt = app.add_option("--tolerance", tolerance, "residual tolerance");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*res_opt) ov.resolution = resolution;
  if (*k_opt) ov.truncation = truncation;
  if (*d_opt) ov.denominator = denominator;
  if (*t_opt) ov.tolerance = tolerance;
  try {
    auto cfg = tsec::cli::load_config(config);
    tsec::cli::apply(cfg, ov);
    int code = tsec::cli::run_command(command, std::move(cfg), out);
    std::cout << command << ": exit " << code << " (report in " << out << "/report.json)\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "tsec: error: " << e.what() << '\n';
    return 1;
  }
}
