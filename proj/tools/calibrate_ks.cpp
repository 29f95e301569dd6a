// Regenerates tests/fixtures/ks_ceilings.json: for each family, the
// two-sample KS distance between Y_n and Y_4n at a large n (where the
// limit law has nearly settled) plus the 1% two-sample critical value.
// That sum is the ceiling the smaller-n check in the test suite must meet.
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "json.hpp"
#include "learnrate/distributions.hpp"
#include "learnrate/harmonic_limits.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "tests/fixtures/ks_ceilings.json";
  const std::uint64_t seed = 20240611;
  const std::size_t n = 10000;
  const std::size_t trials = 5000;

  nlohmann::json doc{{"seed", seed}, {"n", n}, {"trials", trials}, {"families", nlohmann::json::object()}};
  for (double beta : {0.0, -0.5}) {
    const auto dist = beta == 0.0 ? learnrate::make_distribution(learnrate::Family::Uniform)
                                  : learnrate::make_distribution(learnrate::Family::PowerGap, beta);
    const auto r = learnrate::limit_law_selfconsistency(dist, n, trials, seed, 0);
    const std::string key = beta == 0.0 ? "uniform" : "powergap_-0.5";
    doc["families"][key] = {{"beta", beta},
                            {"ks", r.ks},
                            {"critical_1pct", r.critical_1pct},
                            {"ceiling", r.ks + r.critical_1pct}};
    std::cerr << key << ": ks=" << r.ks << " ceiling=" << r.ks + r.critical_1pct << '\n';
  }
  std::ofstream f(path);
  if (!f) {
    std::cerr << "cannot write " << path << '\n';
    return 1;
  }
  f << doc.dump(2) << '\n';
  return f ? 0 : 1;
}
