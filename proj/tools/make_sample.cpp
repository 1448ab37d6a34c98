// Writes a synthetic shot CSV in the ingestion format.
//   make_sample [--shots N] [--seed S] [--out PATH]

#include <iostream>

#include "CLI11.hpp"
#include "xg/shot_data.hpp"
#include "xg/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic shot sample"};
  xg::synthetic::GeneratorConfig cfg;
  cfg.n_shots = 5000;
  std::string out = "sample_shots.csv";
  app.add_option("--shots", cfg.n_shots, "number of shots")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "generator seed");
  app.add_option("--out", out, "output CSV");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto shots = xg::synthetic::generate(cfg);
    xg::write_shot_csv(shots, out, false);
    std::cout << "wrote " << shots.size() << " shots to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
