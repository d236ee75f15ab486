#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bcrsp/cli.hpp"

namespace {

std::string read_config(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path);
  if (!in) throw bcrsp::cli::ConfigError("cannot open config file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional controlled remote state preparation simulator"};
  app.require_subcommand(1);

  std::string config_path = "-";
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  std::size_t dimension = 3;
  std::string source;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "Write output to this file instead of stdout");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run = app.add_subcommand("run", "Run protocol trials");
  auto* sweep = app.add_subcommand("sweep", "Sweep a noise factor grid");
  for (auto* sub : {run, sweep}) {
    sub->add_option("--config", config_path, "JSON config file, '-' for stdin");
    sub->add_option("--seed", seed, "Override the config seed");
    add_common(sub);
  }
  auto* table = app.add_subcommand("table", "Print the correction table");
  table->add_option("--dimension,-N", dimension, "Qudit dimension");
  add_common(table);
  auto* decompose = app.add_subcommand("decompose", "Decompose a unitary into a beam-splitter network");
  decompose->add_option("source", source, "charlie4, identity<N>, fourier<N> or a JSON matrix file")->required();
  decompose->add_option("--out", out_path, "Write output to this file instead of stdout");
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--seed", seed, "Seed for random inputs");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open output file '" << out_path << "'\n";
      return 2;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  try {
    const auto fmt = bcrsp::cli::parse_format(format);
    if (run->parsed() || sweep->parsed()) {
      auto config = bcrsp::cli::parse_config(read_config(config_path));
      if (seed) config.seed = *seed;
      return run->parsed() ? bcrsp::cli::cmd_run(config, fmt, out, std::cerr)
                           : bcrsp::cli::cmd_sweep(config, fmt, out, std::cerr);
    }
    if (table->parsed()) return bcrsp::cli::cmd_table(dimension, fmt, out, std::cerr);
    if (decompose->parsed()) return bcrsp::cli::cmd_decompose(source, out, std::cerr);
    if (verify->parsed()) return bcrsp::cli::cmd_verify(seed.value_or(20240601), fmt, out, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
