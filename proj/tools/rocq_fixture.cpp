#include <iostream>

#include <CLI11.hpp>

#include "rocq/analytics/reference_fixture.hpp"
#include "rocq/common/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Writes the synthetic reference-run logs used by the analytics checks"};
  std::string kind, out;
  std::uint64_t seed = 1;
  app.add_option("KIND", kind, "Fixture to build")->required()->check(CLI::IsMember({"reference"}));
  app.add_option("OUTDIR", out)->required();
  app.add_option("--seed", seed, "Placement seed; totals do not depend on it");
  CLI11_PARSE(app, argc, argv);
  try {
    std::filesystem::remove_all(out);
    rocq::analytics::write_fixture(rocq::analytics::build_reference_fixture(seed), out);
  } catch (const rocq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
