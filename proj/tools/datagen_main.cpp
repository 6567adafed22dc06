// Writes a synthetic two-group classification dataset (CSV + schema) with a
// configurable statistical-parity gap, for demos and end-to-end testing
// without the real survey files.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fairshift/report.hpp"
#include "fairshift/rng.hpp"

namespace {

// Box-Muller from the toolkit's deterministic uniform source.
double normal(fairshift::Rng& rng) {
  double u1 = rng.uniform01();
  while (u1 <= 1e-300) u1 = rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic dataset generator"};
  std::string out_dir = "synth";
  long rows = 20000;
  std::uint64_t seed = 1;
  double protected_fraction = 0.4;
  double positive_rate_complement = 0.45;
  double positive_rate_protected = 0.25;
  app.add_option("--out-dir", out_dir, "directory for data.csv and synth.schema");
  app.add_option("--rows", rows, "row count");
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--protected-fraction", protected_fraction, "P(group = B)");
  app.add_option("--positive-rate-complement", positive_rate_complement, "P(+1 | group A)");
  app.add_option("--positive-rate-protected", positive_rate_protected, "P(+1 | group B)");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  fairshift::Rng rng(fairshift::derive_seed(seed, fairshift::Stream::Synthetic));

  std::ofstream csv(out_dir + "/data.csv");
  if (!csv) {
    std::cerr << "cannot write " << out_dir << "/data.csv\n";
    return 1;
  }
  long protected_count = 0, positive_count = 0;
  for (long i = 0; i < rows; ++i) {
    const bool prot = rng.bernoulli(protected_fraction);
    const double pos_rate = prot ? positive_rate_protected : positive_rate_complement;
    const int label = rng.bernoulli(pos_rate) ? +1 : -1;
    protected_count += prot;
    positive_count += label == +1;

    // Two informative numerics and one label-correlated categorical; the
    // group column itself is a feature, like the survey data.
    const double x1 = normal(rng) + 1.1 * label;
    const double x2 = normal(rng) + 0.5 * label + (prot ? 0.4 : -0.1);
    const double u = rng.uniform01();
    const char* cat;
    if (label == +1) {
      cat = u < 0.55 ? "high" : (u < 0.85 ? "mid" : "low");
    } else {
      cat = u < 0.20 ? "high" : (u < 0.50 ? "mid" : "low");
    }
    csv << fairshift::format_double(x1) << "," << fairshift::format_double(x2) << "," << cat << ","
        << (prot ? "B" : "A") << "," << (label == +1 ? "yes" : "no") << "\n";
  }
  csv.close();

  const std::string schema =
      "delimiter = comma\n"
      "label_column = outcome\n"
      "positive_label = yes\n"
      "negative_label = no\n"
      "protected_column = group\n"
      "protected_value = B\n"
      "column = x1 numeric\n"
      "column = x2 numeric\n"
      "column = grade categorical\n"
      "column = group categorical\n"
      "column = outcome categorical\n";
  fairshift::write_text_file(out_dir + "/synth.schema", schema);

  std::cout << "rows = " << rows << "\n"
            << "protected_fraction = " << double(protected_count) / double(rows) << "\n"
            << "positive_fraction = " << double(positive_count) / double(rows) << "\n"
            << "files = " << out_dir << "/data.csv, " << out_dir << "/synth.schema\n";
  return 0;
}
