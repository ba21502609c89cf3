#include "zakharov/experiment.hpp"
#include "zakharov/random.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace zakharov {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("zakharov-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json base_json()
{
  return Json::parse(R"({
    "domain": {"dimension": 1, "bc": "navier", "n": 128},
    "params": {"kappa": 3.5, "omegaSq": 1.0, "functional": "zakharov"}
  })");
}

ExperimentConfig config_for(const std::string& task, const fs::path& out, Json j = base_json())
{
  j["task"] = task;
  j["output_dir"] = out.string();
  return parse_config(j);
}

std::string validation_message(const Json& j)
{
  try {
    parse_config(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, Defaults)
{
  const ExperimentConfig c = parse_config(Json::object());
  EXPECT_EQ(c.task, "solve");
  EXPECT_EQ(c.domain.n, 128);
  EXPECT_EQ(c.params.functional, Functional::Zakharov);
  EXPECT_EQ(c.k_max, 4);
  EXPECT_EQ(c.trials, 50);
}

TEST(Config, ParsesNestedFields)
{
  Json j = base_json();
  j["solver"] = {{"tol", 1e-9}, {"path_nodes", 21}};
  j["seed"] = 17;
  j["sweep"] = {{"axis", "kappa"}, {"values", {3.0, 4.0}}};
  j["task"] = "sweep";
  const ExperimentConfig c = parse_config(j);
  EXPECT_EQ(c.solver.tol, 1e-9);
  EXPECT_EQ(c.solver.path_nodes, 21);
  EXPECT_EQ(c.solver.seed, 17u);
  EXPECT_EQ(c.axis, "kappa");
  EXPECT_EQ(c.values, (std::vector<double>{3.0, 4.0}));
  EXPECT_EQ(c.params.kappa, 3.5);
}

TEST(Config, RejectsUnknownKeysEverywhere)
{
  for (const char* ptr : {"/colour", "/domain/size", "/params/beta", "/solver/rtol", "/sweep/step"}) {
    Json j = base_json();
    j["sweep"] = {{"axis", "kappa"}, {"values", {1.0}}};
    j[Json::json_pointer(ptr)] = 1;
    const std::string msg = validation_message(j);
    const std::string key = std::string(ptr).substr(std::string(ptr).rfind('/') + 1);
    EXPECT_NE(msg.find("unknown key"), std::string::npos) << ptr;
    EXPECT_NE(msg.find(key), std::string::npos) << msg;
  }
}

TEST(Config, RejectsBadValues)
{
  Json j = base_json();
  j["params"]["kappa"] = 0.0;
  EXPECT_NE(validation_message(j).find("kappa"), std::string::npos);
  j = base_json();
  j["params"]["kappa"] = "3.5";
  EXPECT_NE(validation_message(j).find("params.kappa"), std::string::npos);
  j = base_json();
  j["domain"]["n"] = 4;
  EXPECT_FALSE(validation_message(j).empty());
  j = base_json();
  j["task"] = "optimize";
  EXPECT_NE(validation_message(j).find("task"), std::string::npos);
  j = base_json();
  j["seed"] = -1;
  EXPECT_NE(validation_message(j).find("seed"), std::string::npos);
  j = base_json();
  j["task"] = "sweep";
  j["sweep"] = {{"axis", "beta"}, {"values", {1.0}}};
  EXPECT_NE(validation_message(j).find("sweep.axis"), std::string::npos);
  j = base_json();
  j["domain"]["dimension"] = 2;
  j["domain"]["bc"] = "dirichlet";
  EXPECT_FALSE(validation_message(j).empty());
}

TEST(Config, HashIsStableAndSensitive)
{
  const ExperimentConfig a = config_for("solve", "/tmp/a");
  const ExperimentConfig b = config_for("solve", "/tmp/b");
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_EQ(config_hash(a), config_hash(b)); // output_dir is not part of the hash
  Json j = base_json();
  j["params"]["kappa"] = 3.6;
  EXPECT_NE(config_hash(a), config_hash(config_for("solve", "/tmp/a", j)));
  EXPECT_NE(config_hash(a), config_hash(config_for("spectrum", "/tmp/a")));
}

TEST(FieldCsv, RoundTripIsBitwise)
{
  const fs::path dir = scratch("csv");
  for (int dim : {1, 2}) {
    DomainSpec d;
    d.dimension = dim;
    d.extents.assign(dim, 2.5);
    d.n = 17;
    Rng rng(dim);
    const Field u(d, random_smooth_field(d, rng, 5, 1e-3));
    const fs::path f = dir / ("u" + std::to_string(dim) + ".csv");
    write_field_csv(u, f);
    const std::string text = slurp(f);
    EXPECT_EQ(text.substr(0, text.find('\n')), dim == 1 ? "x,u" : "x,y,u");
    EXPECT_EQ(read_field_csv(d, f).values, u.values);
    DomainSpec wrong = d;
    wrong.n = 16;
    EXPECT_THROW(read_field_csv(wrong, f), ValidationError);
  }
}

TEST(WorkerCount, ReadsEnvironment)
{
  ::setenv("ZAKHAROV_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3);
  ::setenv("ZAKHAROV_THREADS", "0", 1);
  EXPECT_THROW(worker_count(), ValidationError);
  ::setenv("ZAKHAROV_THREADS", "two", 1);
  EXPECT_THROW(worker_count(), ValidationError);
  ::unsetenv("ZAKHAROV_THREADS");
  EXPECT_GE(worker_count(), 1);
}

TEST(Run, SpectrumRecordAndFieldDumps)
{
  const fs::path out = scratch("spectrum");
  Json j = base_json();
  j["domain"]["n"] = 1024;
  j["k_max"] = 3;
  const RunOutcome r = run_safely(config_for("spectrum", out, j));
  ASSERT_EQ(r.exit_code, ExitOk) << r.record.dump();
  const Json rec = Json::parse(slurp(out / "spectrum.json"));
  EXPECT_EQ(rec["schema"], "zakharov-run/1");
  EXPECT_EQ(rec["config_hash"].get<std::string>().size(), 16u);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NEAR(rec["results"]["pairs"][k - 1]["lambda"].get<double>(), k * k, 1e-3 * k * k);
    const fs::path csv = out / ("phi_" + std::to_string(k) + ".csv");
    ASSERT_TRUE(fs::exists(csv));
    const Json side = Json::parse(slurp(out / ("phi_" + std::to_string(k) + ".json")));
    EXPECT_EQ(side["config_hash"], rec["config_hash"]);
    const DomainSpec d = parse_config(j).domain;
    EXPECT_EQ(read_field_csv(d, csv).values.size(), 1024);
  }
}

TEST(Run, ReproducibleExceptTiming)
{
  Json j = base_json();
  j["domain"]["n"] = 256;
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  const RunOutcome ra = run(config_for("solve", a, j));
  const RunOutcome rb = run(config_for("solve", b, j));
  ASSERT_EQ(ra.exit_code, ExitOk);
  Json ja = Json::parse(slurp(a / "solve.json"));
  Json jb = Json::parse(slurp(b / "solve.json"));
  ja.erase("timing");
  jb.erase("timing");
  EXPECT_EQ(ja.dump(), jb.dump());
  EXPECT_EQ(slurp(a / "solution.csv"), slurp(b / "solution.csv"));
  EXPECT_EQ(slurp(a / "solution.json"), slurp(b / "solution.json"));
}

TEST(Run, SolveReportsEnergyIdentity)
{
  Json j = base_json();
  j["domain"]["n"] = 256;
  const RunOutcome r = run(config_for("solve", scratch("solve"), j));
  ASSERT_EQ(r.exit_code, ExitOk);
  const Json& res = r.record["results"];
  EXPECT_EQ(res["method"], "mountain_pass");
  EXPECT_EQ(res["report"]["status"], "Converged");
  const double e = res["report"]["energy"].get<double>();
  EXPECT_NEAR(res["energy_identity"]["value"].get<double>(), e, 1e-10 * (1 + e));
  EXPECT_LT(e, res["energy_identity"]["upper_bound"].get<double>());
}

TEST(Run, BelowThresholdSolveRoutesToCertificate)
{
  Json j = base_json();
  j["params"]["kappa"] = 2.0;
  j["params"]["omegaSq"] = 1.5;
  j["trials"] = 10;
  const RunOutcome r = run_safely(config_for("solve", scratch("below"), j));
  EXPECT_EQ(r.exit_code, ExitOk);
  EXPECT_EQ(r.record["results"]["outcome"], "no nonzero solution");
  EXPECT_EQ(r.record["results"]["certificate"]["verdict"], "passed");
}

TEST(Run, ExitCodes)
{
  Json j = base_json();
  j["solver"] = {{"max_iterations", 1}, {"handoff_tol", 1e-12}};
  EXPECT_EQ(run_safely(config_for("solve", scratch("maxiter"), j)).exit_code, ExitSolverFailure);

  j = base_json();
  j["method"] = "e2_global";
  const RunOutcome bad = run_safely(config_for("solve", scratch("method"), j));
  EXPECT_EQ(bad.exit_code, ExitValidation);
  EXPECT_NE(bad.record["error"].get<std::string>().find("e2_global"), std::string::npos);

  j = base_json();
  j["params"]["kappa"] = 2.0;
  j["params"]["omegaSq"] = 1.5;
  EXPECT_EQ(run_safely(config_for("multiplicity", scratch("nowindow"), j)).exit_code, ExitValidation);
}

TEST(Run, CompareTable)
{
  Json j = base_json();
  j["params"]["kappa"] = 2.0;
  j["params"]["omegaSq"] = 1.5;
  j["trials"] = 10;
  const RunOutcome r = run(config_for("compare", scratch("compare"), j));
  ASSERT_EQ(r.exit_code, ExitOk);
  const Json& t = r.record["results"]["table"];
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0]["outcome"], "no nonzero solution");
  EXPECT_GT(t[1]["energy"].get<double>(), 0.0);
  EXPECT_GE(t[1]["morse_index"].get<int>(), 1);
  EXPECT_LE(t[2]["energy"].get<double>(), 0.0);
}

TEST(Run, VerifyIdentities)
{
  Json j = base_json();
  j["suite"] = "identities";
  const RunOutcome r = run(config_for("verify", scratch("verify"), j));
  EXPECT_EQ(r.exit_code, ExitOk);
  EXPECT_TRUE(r.record["results"]["passed"].get<bool>());
  EXPECT_EQ(r.record["results"]["checks"].size(), 4u);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& f)
{
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(f);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      cells.push_back(c);
    }
    if (!line.empty() && line.back() == ',') {
      cells.emplace_back();
    }
    rows.push_back(cells);
  }
  return rows;
}

TEST(Sweep, OmegaFlipsAtThreshold)
{
  // kappa - omegaSq crosses lambda_1 ~ 1 at omegaSq = 2.5.
  Json j = base_json();
  j["trials"] = 5;
  j["write_fields"] = false;
  j["sweep"] = {{"axis", "omegaSq"}, {"values", {1.0, 2.0, 2.7, 3.0}}};
  const fs::path out = scratch("sweep_omega");
  ::setenv("ZAKHAROV_THREADS", "2", 1);
  const RunOutcome r = run(config_for("sweep", out, j));
  ::unsetenv("ZAKHAROV_THREADS");
  EXPECT_EQ(r.exit_code, ExitOk);
  const auto rows = read_csv(out / "sweep.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"value", "energy", "grad_norm", "morse_index", "nehari_res", "status"}));
  EXPECT_EQ(rows[1][5], "Converged");
  EXPECT_EQ(rows[2][5], "Converged");
  EXPECT_EQ(rows[3][5], "nonexistence:passed");
  EXPECT_EQ(rows[4][5], "nonexistence:passed");
  // H(0) = A + omegaSq B does not see kappa, so the branch does not bifurcate
  // from zero: the level rises as kappa - omegaSq approaches lambda_1.
  EXPECT_LT(std::stod(rows[1][1]), std::stod(rows[2][1]));
  EXPECT_TRUE(fs::exists(out / "runs" / "run_1" / "solve.json"));
}

TEST(Sweep, FailedRowDoesNotStopOthers)
{
  Json j = base_json();
  j["write_fields"] = false;
  j["sweep"] = {{"axis", "n"}, {"values", {4, 64}}};
  const fs::path out = scratch("sweep_err");
  const RunOutcome r = run(config_for("sweep", out, j));
  EXPECT_EQ(r.exit_code, ExitValidation);
  const auto rows = read_csv(out / "sweep.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][5].rfind("error:", 0), 0u);
  EXPECT_EQ(rows[2][5], "Converged");
}

TEST(Sweep, MeshRefinementIsSecondOrder)
{
  Json j = base_json();
  j["write_fields"] = false;
  j["sweep"] = {{"axis", "n"}, {"values", {63, 127, 255}}};
  const RunOutcome r = run(config_for("sweep", scratch("sweep_n"), j));
  ASSERT_EQ(r.exit_code, ExitOk);
  const double order = r.record["results"]["richardson"][0]["order"].get<double>();
  EXPECT_NEAR(order, 2.0, 0.2);
}

TEST(Sweep, SigmaSlope)
{
  Json j = base_json();
  j["domain"]["n"] = 1023;
  j["params"]["functional"] = "approx1";
  j["sweep"] = {{"axis", "sigma"}, {"values", {0.125, 0.25, 0.5}}};
  const RunOutcome r = run(config_for("sweep", scratch("sweep_sigma"), j));
  ASSERT_EQ(r.exit_code, ExitOk);
  const double slope = r.record["results"]["loglog_slope"].get<double>();
  EXPECT_GE(slope, -3.3);
  EXPECT_LE(slope, -2.7);
}

#ifdef ZAKHAROV_CLI_PATH
int cli(const std::string& args)
{
  const std::string cmd = std::string(ZAKHAROV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const Json& j)
{
  const fs::path f = dir / name;
  std::ofstream(f) << j.dump(2);
  return f;
}

TEST(Cli, ExitCodesAndOverrides)
{
  const fs::path dir = scratch("cli");
  Json j = base_json();
  j["k_max"] = 2;
  const fs::path good = write_config(dir, "good.json", j);
  EXPECT_EQ(cli("spectrum --config " + good.string() + " --out " + (dir / "o1").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o1" / "spectrum.json"));

  Json bad = j;
  bad["params"]["gamma"] = 1.0;
  EXPECT_EQ(cli("spectrum --config " + write_config(dir, "bad.json", bad).string()), 2);
  EXPECT_EQ(cli("spectrum --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(cli("spectrum"), 2);
  EXPECT_EQ(cli("sweep --config " + good.string() + " --axis kappa"), 2);
  EXPECT_EQ(cli("sweep --config " + good.string() + " --axis kappa --values 3,x"), 2);

  Json w = j;
  w["write_fields"] = false;
  const fs::path wf = write_config(dir, "sweep.json", w);
  EXPECT_EQ(cli("sweep --config " + wf.string() + " --axis kappa --values 3,3.5 --seed 5 --out " +
                (dir / "o2").string()),
            0);
  const Json rec = Json::parse(slurp(dir / "o2" / "sweep.json"));
  EXPECT_EQ(rec["config"]["seed"], 5);
  EXPECT_EQ(rec["results"]["rows"].size(), 2u);
}
#endif

} // namespace
} // namespace zakharov
