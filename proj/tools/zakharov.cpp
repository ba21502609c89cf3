// Command-line runner: zakharov <task> --config <file> [--out <dir>] [--seed <int>]
//                                [--axis <name> --values <csv-list>]
#include "zakharov/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_values(const std::string& csv)
{
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw zakharov::ValidationError("--values: \"" + item + "\" is not a number");
    }
    out.push_back(v);
  }
  return out;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Variational solver for the stationary Zakharov equation"};
  std::string task;
  std::string config;
  std::string out_dir;
  long long seed = -1;
  std::string axis;
  std::string values;
  app.add_option("task", task, "spectrum | solve | multiplicity | nonexist | compare | verify | sweep")->required();
  app.add_option("--config", config, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--seed", seed, "random seed (overrides seed)")->check(CLI::NonNegativeNumber);
  auto* axis_opt = app.add_option("--axis", axis, "sweep axis: omegaSq | kappa | n | sigma");
  app.add_option("--values", values, "comma-separated sweep values")->needs(axis_opt);
  axis_opt->needs(app.get_option("--values"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? zakharov::ExitOk : zakharov::ExitValidation;
  }

  zakharov::ExperimentConfig cfg;
  try {
    nlohmann::ordered_json j;
    {
      std::ifstream in(config);
      if (!in) {
        throw zakharov::ValidationError("cannot read config file " + config);
      }
      try {
        j = nlohmann::ordered_json::parse(in);
      } catch (const nlohmann::ordered_json::parse_error& e) {
        throw zakharov::ValidationError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (!j.is_object()) {
      throw zakharov::ValidationError("config must be a JSON object");
    }
    j["task"] = task;
    if (!out_dir.empty()) {
      j["output_dir"] = out_dir;
    }
    if (seed >= 0) {
      j["seed"] = static_cast<unsigned>(seed);
    }
    if (!axis.empty()) {
      j["sweep"] = {{"axis", axis}, {"values", parse_values(values)}};
    }
    cfg = zakharov::parse_config(j);
  } catch (const zakharov::ValidationError& e) {
    std::cerr << "zakharov: invalid configuration: " << e.what() << '\n';
    return zakharov::ExitValidation;
  }

  const zakharov::RunOutcome out = zakharov::run_safely(cfg);
  if (out.record.contains("error")) {
    std::cerr << "zakharov: " << out.record["error"].get<std::string>() << '\n';
  } else {
    std::cout << (cfg.output_dir / (cfg.task + ".json")).string() << '\n';
  }
  return out.exit_code;
}
