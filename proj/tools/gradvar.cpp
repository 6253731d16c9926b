// gradvar: run experiments, verify transcripts, sweep parameters.
//
//   gradvar run    --config exp.cfg [--out run.csv] [--seed N]
//   gradvar verify --config run.csv --suite all [--out report.csv]
//   gradvar sweep  --config exp.cfg --axis T --values 100,1000,10000 [--out sweep.csv]
//
// Exit codes: 0 ok, 1 a verification check failed, 2 configuration or
// parse error, 3 numerical error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradvar/experiment.hpp"
#include "gradvar/transcript.hpp"

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gradvar::ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw gradvar::ConfigError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

gradvar::ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  auto cfg = gradvar::ExperimentConfig::parse(slurp(path));
  if (seed) cfg.seed = *seed;
  return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(gradvar::detail::parse_double(item));
    } catch (const gradvar::ParseError&) {
      throw gradvar::ConfigError("--values: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw gradvar::ConfigError("--values is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-variation online learning experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string suite = "all";
  std::string axis;
  std::string values;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run an experiment and write its transcript");
  run->add_option("--config", config, "experiment config file")->required();
  run->add_option("--out", out, "transcript path (stdout if omitted)");
  run->add_option("--seed", seed, "override the config seed");

  auto* verify = app.add_subcommand("verify", "check a transcript against the oracle suites");
  verify->add_option("--config", config, "transcript file")->required();
  verify->add_option("--suite", suite, "replay | lemmas | closed-form | cmd | bound | all");
  verify->add_option("--out", out, "report path (stdout if omitted)");

  auto* sweep = app.add_subcommand("sweep", "run a config over one parameter axis");
  sweep->add_option("--config", config, "experiment config file")->required();
  sweep->add_option("--axis", axis, "T | G | sigma_noise | gamma | eps")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->required();
  sweep->add_option("--out", out, "table path (stdout if omitted)");
  sweep->add_option("--seed", seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const auto cfg = load_config(config, seed);
      Output o(out);
      const auto res = gradvar::run_experiment(cfg, &o.stream());
      std::cerr << "rounds " << res.rounds << "  regret " << res.regret() << "  bound " << res.bound.bound
                << "  ratio " << res.bound.ratio() << '\n';
      if (res.warnings) std::cerr << "warning: " << res.warnings << " gradients or hints exceeded learner.G\n";
      return 0;
    }
    if (*verify) {
      const auto tr = gradvar::read_transcript_string(slurp(config));
      const auto rep = gradvar::verify_transcript(tr, suite);
      Output o(out);
      rep.write(o.stream());
      return rep.pass() ? 0 : kExitCheckFailed;
    }
    if (*sweep) {
      const auto cfg = load_config(config, seed);
      const auto rows = gradvar::run_sweep(cfg, axis, parse_values(values));
      Output o(out);
      gradvar::write_sweep(o.stream(), axis, rows);
      return 0;
    }
  } catch (const gradvar::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gradvar::StreamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gradvar::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const gradvar::DomainError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
