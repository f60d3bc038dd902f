// Copyright 2026 The ensq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ensq/runner.hpp"

namespace ensq {
namespace {

Config ini(const std::string& text) {
  std::istringstream is(text);
  return Config::from_ini(is);
}

std::map<std::string, std::string> report(const Artifacts& a) {
  std::map<std::string, std::string> out;
  for (const auto& [name, body] : a) {
    if (name != "report.txt") continue;
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
      const auto eq = line.find('=');
      out[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  return out;
}

double num(const std::map<std::string, std::string>& r, const std::string& key) {
  const auto it = r.find(key);
  if (it == r.end()) {
    ADD_FAILURE() << "missing report key " << key;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::stod(it->second);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ini("[trap]\nbogus = 1\n"), SchemaError);
  EXPECT_THROW(ini("[nosuch]\nmean_atoms = 1\n"), SchemaError);
  auto c = ini("[trap]\nmean_atoms = many\n");
  EXPECT_THROW(c.number("trap.mean_atoms"), SchemaError);
  auto e = ini("[run]\nexperiment = rabi\n");
  EXPECT_THROW(run_experiment("ramsey", e), SchemaError);
  Config d;
  EXPECT_THROW(run_experiment("teleport", d), SchemaError);
  Config f;
  EXPECT_THROW(run_experiment("fit", f), SchemaError);
}

TEST(Config, ResolvedEchoCarriesProvenance) {
  auto c = ini("[run]\ntrials = 7\n");
  std::ostringstream os;
  c.write_resolved(os);
  const auto s = os.str();
  EXPECT_NE(s.find("[trap]\n"), std::string::npos);
  EXPECT_NE(s.find("mean_atoms = 7.6  ; [paper-default]"), std::string::npos);
  EXPECT_NE(s.find("trials = 7  ; [user]"), std::string::npos);
  EXPECT_NE(s.find("v_ref_mhz = 500  ; [free]"), std::string::npos);
}

TEST(Runner, CertifyFromPointsFile) {
  const auto path = std::filesystem::temp_directory_path() / "ensq_points.txt";
  {
    std::ofstream out(path);
    out << "# P0 err\n0.44 0.02\n0.46 0.03  # P1 err\n";
  }
  Config c;
  c.set("certify.points", path.string());
  c.set("certify.atoms", "9");
  const auto a = run_experiment("certify", c);
  EXPECT_EQ(a.front().first, "config.resolved.ini");
  const auto r = report(a);
  EXPECT_NEAR(num(r, "fraction"), 0.82, 0.005);
  EXPECT_NEAR(num(r, "fraction_stderr"), 0.06, 0.01);
  EXPECT_EQ(r.at("exceeds_bound_k7"), "true");
  EXPECT_EQ(r.at("exceeds_bound_k8"), "false");
  std::filesystem::remove(path);
}

Config small_ramsey(int threads) {
  auto c = ini(
      "[run]\ntrials = 12\nseed = 99\n"
      "[scan]\nstart = 0\nstop = 4\npoints = 3\n"
      "[ramsey]\nphases = 4\n"
      "[noise]\nt2_ms = 2.6\n"
      "[sim]\ne_max = 1\n");
  c.set("run.threads", std::to_string(threads));
  return c;
}

// Property: artifacts are byte-identical for any thread count, apart from
// the echoed thread setting itself.
TEST(Runner, OutputsDoNotDependOnThreads) {
  auto a = small_ramsey(1), b = small_ramsey(3);
  const auto x = run_experiment("ramsey", a), y = run_experiment("ramsey", b);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 1; i < x.size(); ++i) {
    EXPECT_EQ(x[i].first, y[i].first);
    EXPECT_EQ(x[i].second, y[i].second) << x[i].first;
  }
  auto again = small_ramsey(1);
  EXPECT_EQ(run_experiment("ramsey", again), x);
}

TEST(Runner, RamseyDualFitsAgree) {
  auto c = ini(
      "[run]\ntrials = 300\nseed = 3\n"
      "[noise]\nlaser_linewidth_hz = 0\nt2_ms = 2.6\n"
      "[sim]\ne_max = 1\n");
  const auto r = report(run_experiment("ramsey", c));
  EXPECT_EQ(r.at("fits_agree"), "true");
  EXPECT_NEAR(num(r, "gaussian.T2"), 2.6e-3, 0.3e-3);
  EXPECT_NEAR(num(r, "kuhr.T2"), 2.6e-3, 0.3e-3);
}

TEST(Runner, PerfectBlockadeSuppressesTarget) {
  auto c = ini(
      "[run]\ntrials = 150\n"
      "[scan]\nstart = 0\nstop = 1\npoints = 3\n"
      "[blockade2]\nperfect_blockade = true\nobservable = p1bar\n");
  const auto r = report(run_experiment("blockade2", c));
  EXPECT_LE(num(r, "ratio_ub_over_ua"), num(r, "leakage_floor"));
  EXPECT_LT(num(r, "ratio_ub_over_ua"), 0.01);
}

TEST(Runner, WritesArtifacts) {
  Config c;
  const auto dir = std::filesystem::temp_directory_path() / "ensq_artifacts";
  std::filesystem::remove_all(dir);
  write_artifacts(dir, run_experiment("certify", c));
  EXPECT_TRUE(std::filesystem::exists(dir / "config.resolved.ini"));
  EXPECT_TRUE(std::filesystem::exists(dir / "results.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.txt"));
  EXPECT_EQ(resolve_output_dir(c, "x/y"), std::filesystem::path("x/y"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ensq
