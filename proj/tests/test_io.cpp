#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "coagfrag/io.hpp"

using namespace coagfrag;

namespace {

Trajectory sample_run() {
  Scenario sc;
  sc.kernel = kernels::smoluchowski();
  sc.fragmentation = power_law_fragmentation(0.5, 0.5);
  sc.truncation = {50.0, 1.0 / 3.0};
  sc.grid.cells = 60;
  sc.horizon = 0.5;
  sc.snapshots = {0.25, 0.5};
  return run(sc);
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(Io, SnapshotsRoundTrip) {
  const Trajectory t = sample_run();
  const auto text = io::snapshots_to_json(t).dump();
  const auto loaded = io::snapshots_from_json(nlohmann::json::parse(text));
  ASSERT_EQ(loaded.snapshots.size(), t.snapshots.size());
  for (std::size_t k = 0; k < t.snapshots.size(); ++k) EXPECT_TRUE(loaded.snapshots[k] == t.snapshots[k]);
  EXPECT_TRUE(std::equal(loaded.edges.begin(), loaded.edges.end(), t.grid.edges().begin()));
}

TEST(Io, TimeseriesSchemaAndDeterminism) {
  DiagnosticsParams p;
  p.sigma = 1.0 / 3.0;
  p.lambda = 2.0 / 3.0;
  p.horizon = 0.5;
  std::ostringstream a, b;
  io::write_timeseries_csv(a, diagnose(sample_run(), p));
  io::write_timeseries_csv(b, diagnose(sample_run(), p));
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,M0,M1,M_neg2sigma,Ynorm,L_envelope,tail_R,tail_value,modulus_pair,modulus_measured,modulus_bound");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
  }
  EXPECT_EQ(rows, 3);
}

TEST(Io, DiagnosticsJsonCarriesPassFlags) {
  const Trajectory t = sample_run();
  DiagnosticsParams p;
  p.sigma = 1.0 / 3.0;
  p.lambda = 2.0 / 3.0;
  p.horizon = 0.5;
  const auto rep = diagnose(t, p);
  const auto j = io::diagnostics_to_json(rep, t);
  EXPECT_EQ(j.at("pass").at("all").get<bool>(), rep.all_pass());
  EXPECT_EQ(j.at("snapshots").size(), rep.snapshots.size());
  EXPECT_DOUBLE_EQ(j.at("L_envelope").get<double>(), rep.L);
}
